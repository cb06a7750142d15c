"""Daily OHLCV ingestion and ISO-week resampling."""

from __future__ import annotations

import csv
import io
import logging
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .errors import (
    CsvFormatError,
    EmptySeriesError,
    FetchError,
    InsufficientDataError,
    ValidationError,
)

logger = logging.getLogger(__name__)

CSV_HEADER = ("Date", "Open", "High", "Low", "Close", "Adj Close", "Volume")


@dataclass(frozen=True)
class DailyBar:
    date: date
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: float


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


def _check_bars(dates, open_, high, low, close, volume, what: str) -> None:
    n = len(dates)
    for name, arr in (("open", open_), ("high", high), ("low", low), ("close", close), ("volume", volume)):
        if len(arr) != n:
            raise ValidationError(f"{what}: column {name} has {len(arr)} values, expected {n}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"{what}: column {name} contains non-finite values")
    lo = np.minimum(open_, close)
    hi = np.maximum(open_, close)
    bad = np.flatnonzero((low > lo) | (hi > high))
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            f"{what}: bar {dates[i]} violates low <= open/close <= high "
            f"(open={open_[i]}, high={high[i]}, low={low[i]}, close={close[i]})"
        )
    if np.any(volume < 0):
        i = int(np.flatnonzero(volume < 0)[0])
        raise ValidationError(f"{what}: negative volume on {dates[i]}")
    for a, b in zip(dates, dates[1:]):
        if b <= a:
            kind = "duplicate date" if a == b else "dates not strictly increasing"
            raise ValidationError(f"{what}: {kind} at {b}")


@dataclass(frozen=True)
class DailySeries:
    """Column-oriented daily bars, validated on construction."""

    dates: tuple[date, ...]
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    adj_close: np.ndarray
    volume: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        for name in ("open", "high", "low", "close", "adj_close", "volume"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        _check_bars(self.dates, self.open, self.high, self.low, self.close, self.volume, "daily series")
        if len(self.adj_close) != len(self.dates):
            raise ValidationError("daily series: adj_close length mismatch")

    @classmethod
    def from_bars(cls, bars) -> "DailySeries":
        bars = list(bars)
        return cls(
            dates=[b.date for b in bars],
            open=[b.open for b in bars],
            high=[b.high for b in bars],
            low=[b.low for b in bars],
            close=[b.close for b in bars],
            adj_close=[b.adj_close for b in bars],
            volume=[b.volume for b in bars],
        )

    def __len__(self) -> int:
        return len(self.dates)

    def bars(self) -> list[DailyBar]:
        return [
            DailyBar(d, *map(float, row))
            for d, row in zip(
                self.dates,
                zip(self.open, self.high, self.low, self.close, self.adj_close, self.volume),
            )
        ]

    def between(self, start: date | None = None, end: date | None = None) -> "DailySeries":
        """Bars with start <= date <= end (either bound optional)."""
        keep = [
            i for i, d in enumerate(self.dates)
            if (start is None or d >= start) and (end is None or d <= end)
        ]
        return self._take(keep)

    def _take(self, idx) -> "DailySeries":
        idx = list(idx)
        return DailySeries(
            dates=[self.dates[i] for i in idx],
            open=self.open[idx],
            high=self.high[idx],
            low=self.low[idx],
            close=self.close[idx],
            adj_close=self.adj_close[idx],
            volume=self.volume[idx],
        )


@dataclass(frozen=True)
class WeeklySeries:
    """One bar per ISO calendar week present in the daily input.

    ``week_start`` is the Monday of each ISO week, ``n_days`` the number of
    daily bars folded into it (holiday weeks have fewer than five).
    """

    week_start: tuple[date, ...]
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    adj_close: np.ndarray
    volume: np.ndarray
    n_days: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "week_start", tuple(self.week_start))
        object.__setattr__(self, "n_days", tuple(int(n) for n in self.n_days))
        for name in ("open", "high", "low", "close", "adj_close", "volume"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        _check_bars(self.week_start, self.open, self.high, self.low, self.close, self.volume, "weekly series")

    def __len__(self) -> int:
        return len(self.week_start)

    @property
    def returns(self) -> np.ndarray:
        return weekly_returns(self)

    def head(self, n: int) -> "WeeklySeries":
        """The first ``n`` weeks, as if the data ended there."""
        return WeeklySeries(
            week_start=self.week_start[:n],
            open=self.open[:n],
            high=self.high[:n],
            low=self.low[:n],
            close=self.close[:n],
            adj_close=self.adj_close[:n],
            volume=self.volume[:n],
            n_days=self.n_days[:n],
        )

    def with_close(self, field: str) -> "WeeklySeries":
        """Swap in adjusted closes when ``field == "adj_close"``."""
        if field == "close":
            return self
        if field != "adj_close":
            raise ValueError(f"unknown price field {field!r}")
        ratio = self.adj_close / self.close
        return WeeklySeries(
            week_start=self.week_start,
            open=self.open * ratio,
            high=self.high * ratio,
            low=self.low * ratio,
            close=self.adj_close,
            adj_close=self.adj_close,
            volume=self.volume,
            n_days=self.n_days,
        )


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CsvFormatError(f"column {column}: cannot parse {text!r} as a number", row) from None
    if not np.isfinite(value):
        raise CsvFormatError(f"column {column}: non-finite value {text!r}", row)
    return value


def parse_ohlcv_csv(text: str) -> DailySeries:
    """Parse a ``Date,Open,High,Low,Close,Adj Close,Volume`` document.

    Row numbers in errors are 1-based file lines (the header is line 1).
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty document", 1) from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise CsvFormatError(f"unexpected header {header!r}, expected {','.join(CSV_HEADER)}", 1)

    bars = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise CsvFormatError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", line_no)
        try:
            day = date.fromisoformat(row[0].strip())
        except ValueError:
            raise CsvFormatError(f"bad date {row[0]!r}", line_no) from None
        values = [_parse_float(v.strip(), line_no, c) for v, c in zip(row[1:], CSV_HEADER[1:])]
        bars.append(DailyBar(day, *values))

    bars.sort(key=lambda b: b.date)
    return DailySeries.from_bars(bars)


def load_ohlcv_csv(path: str | Path) -> DailySeries:
    return parse_ohlcv_csv(Path(path).read_text())


def to_csv(series: DailySeries) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for b in series.bars():
        writer.writerow([b.date.isoformat(), repr(b.open), repr(b.high), repr(b.low),
                         repr(b.close), repr(b.adj_close), repr(b.volume)])
    return out.getvalue()


def iso_week_start(day: date) -> date:
    return day - timedelta(days=day.isoweekday() - 1)


def resample_weekly(daily: DailySeries) -> WeeklySeries:
    """Aggregate daily bars into ISO (Mon-Sun) weeks.

    open = first open, high = max, low = min, close = last close,
    volume = sum. Partial weeks still produce a bar.
    """
    if len(daily) == 0:
        raise EmptySeriesError("cannot resample an empty daily series")

    groups: list[list[int]] = []
    starts: list[date] = []
    for i, d in enumerate(daily.dates):
        ws = iso_week_start(d)
        if not starts or starts[-1] != ws:
            starts.append(ws)
            groups.append([])
        groups[-1].append(i)

    return WeeklySeries(
        week_start=starts,
        open=[daily.open[g[0]] for g in groups],
        high=[daily.high[g].max() for g in groups],
        low=[daily.low[g].min() for g in groups],
        close=[daily.close[g[-1]] for g in groups],
        adj_close=[daily.adj_close[g[-1]] for g in groups],
        volume=[daily.volume[g].sum() for g in groups],
        n_days=[len(g) for g in groups],
    )


def weekly_returns(series: WeeklySeries) -> np.ndarray:
    """r_t = close_t / close_{t-1} - 1, one shorter than the bar list."""
    if len(series) < 2:
        raise InsufficientDataError(f"weekly returns need at least 2 bars, got {len(series)}")
    close = series.close
    return close[1:] / close[:-1] - 1.0


def relative_series(series: WeeklySeries) -> np.ndarray:
    """Closes normalised by the first close, so element 0 is 1."""
    if len(series) == 0:
        raise EmptySeriesError("relative series of an empty series")
    first = series.close[0]
    if first <= 0:
        raise ValidationError(f"first close must be positive, got {first}")
    return series.close / first


def fetch_remote(
    symbol: str,
    start: date | None,
    end: date | None,
    endpoint: str,
    timeout: float = 30.0,
) -> DailySeries:
    """GET a CSV from ``endpoint`` and parse it.

    ``endpoint`` is a template with ``{symbol}``, ``{start}`` and ``{end}``
    placeholders (ISO dates, empty when unbounded). Transport problems raise
    :class:`FetchError`; a body that does not parse raises
    :class:`CsvFormatError`. Nothing partial is ever returned.
    """
    url = endpoint.format(
        symbol=urllib.parse.quote(symbol),
        start=start.isoformat() if start else "",
        end=end.isoformat() if end else "",
    )
    logger.info("fetching %s from %s", symbol, url)
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            status = resp.status
            body = resp.read()
    except urllib.error.HTTPError as exc:
        raise FetchError(f"{url}: HTTP {exc.code}") from exc
    except (urllib.error.URLError, OSError) as exc:
        raise FetchError(f"{url}: {exc}") from exc
    if not 200 <= status < 300:
        raise FetchError(f"{url}: HTTP {status}")
    try:
        text = body.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CsvFormatError(f"response is not UTF-8: {exc}") from exc
    series = parse_ohlcv_csv(text)
    if start is not None or end is not None:
        series = series.between(start, end)
    return series
