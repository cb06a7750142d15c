"""MACD, RSI, Bollinger bands, BIAS and ATR over a bar series.

Every function returns an array aligned with its input; positions before
the indicator's warmup are NaN. Periods count bars, so on weekly data a
14-period RSI spans 14 weeks. Rolling statistics are evaluated window by
window so a value depends only on its own window, never on how much data
follows it; window sums use math.fsum, so a constant window averages to
exactly its value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError


@dataclass(frozen=True)
class IndicatorConfig:
    macd_fast: int = 12
    macd_slow: int = 26
    rsi_n: int = 14
    boll_n: int = 20
    boll_m: float = 2.0
    boll_ddof: int = 0
    bias_n: int = 20
    atr_n: int = 14

    def __post_init__(self):
        for name in ("macd_fast", "macd_slow", "rsi_n", "boll_n", "bias_n", "atr_n"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.macd_fast >= self.macd_slow:
            raise ValueError("macd_fast must be smaller than macd_slow")
        if self.boll_m <= 0:
            raise ValueError("boll_m must be positive")


def _need(values: np.ndarray, n: int, what: str) -> None:
    if len(values) < n:
        raise InsufficientDataError(f"{what} needs at least {n} values, got {len(values)}")


def sma(values, n: int) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    _need(x, n, f"SMA({n})")
    xs = x.tolist()
    out = np.full(len(x), np.nan)
    for t in range(n - 1, len(xs)):
        out[t] = math.fsum(xs[t - n + 1:t + 1]) / n
    return out


def rolling_std(values, n: int, ddof: int = 0) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    _need(x, n, f"rolling std({n})")
    if n - ddof < 1:
        raise ValueError("rolling std needs n > ddof")
    xs = x.tolist()
    out = np.full(len(x), np.nan)
    for t in range(n - 1, len(xs)):
        window = xs[t - n + 1:t + 1]
        m = math.fsum(window) / n
        out[t] = math.sqrt(math.fsum((v - m) ** 2 for v in window) / (n - ddof))
    return out


def ema(values, n: int) -> np.ndarray:
    """EMA with alpha = 2/(n+1), seeded by the SMA of the first n values."""
    if n < 1:
        raise ValueError("EMA period must be >= 1")
    x = np.asarray(values, dtype=float)
    _need(x, n, f"EMA({n})")
    alpha = 2.0 / (n + 1)
    out = np.full(len(x), np.nan)
    prev = math.fsum(x[:n].tolist()) / n
    out[n - 1] = prev
    for t in range(n, len(x)):
        prev = alpha * x[t] + (1.0 - alpha) * prev
        out[t] = prev
    return out


def macd(closes, cfg: IndicatorConfig = IndicatorConfig()) -> np.ndarray:
    x = np.asarray(closes, dtype=float)
    _need(x, cfg.macd_slow, "MACD")
    return ema(x, cfg.macd_fast) - ema(x, cfg.macd_slow)


def rsi(closes, n: int = 14) -> np.ndarray:
    """Simple-average RSI over the trailing n price changes.

    avg_loss == 0 gives 100 (or 50 if avg_gain is also 0); avg_gain == 0
    gives 0.
    """
    x = np.asarray(closes, dtype=float)
    _need(x, n + 1, f"RSI({n})")
    delta = np.diff(x).tolist()
    gains = [d if d > 0 else 0.0 for d in delta]
    losses = [-d if d < 0 else 0.0 for d in delta]
    out = np.full(len(x), np.nan)
    for t in range(n, len(x)):
        g = math.fsum(gains[t - n:t]) / n
        l = math.fsum(losses[t - n:t]) / n
        if l == 0.0:
            out[t] = 50.0 if g == 0.0 else 100.0
        elif g == 0.0:
            out[t] = 0.0
        else:
            out[t] = 100.0 - 100.0 / (1.0 + g / l)
    return out


def typical_price(high, low, close) -> np.ndarray:
    return (np.asarray(high, float) + np.asarray(low, float) + np.asarray(close, float)) / 3.0


def bollinger(typical_prices, n: int = 20, m: float = 2.0, ddof: int = 0):
    """Return (upper, middle, lower) bands around the rolling SMA."""
    tp = np.asarray(typical_prices, dtype=float)
    middle = sma(tp, n)
    width = m * rolling_std(tp, n, ddof=ddof)
    return middle + width, middle, middle - width


def bias(closes, n: int = 20) -> np.ndarray:
    """Percent distance of the close from its n-period average."""
    x = np.asarray(closes, dtype=float)
    avg = sma(x, n)
    if np.any(avg[n - 1:] == 0.0):
        raise DomainError("BIAS undefined where the moving average is zero")
    return 100.0 * (x - avg) / avg


def true_range(high, low, close) -> np.ndarray:
    """TR_t for t >= 1; TR_0 is NaN because it has no previous close."""
    h = np.asarray(high, float)
    l = np.asarray(low, float)
    c = np.asarray(close, float)
    tr = np.full(len(c), np.nan)
    prev = c[:-1]
    tr[1:] = np.maximum.reduce([h[1:] - l[1:], np.abs(h[1:] - prev), np.abs(l[1:] - prev)])
    return tr


def atr(high, low, close, n: int = 14) -> np.ndarray:
    """Wilder ATR; the first value (index n) is the mean of TR_1..TR_n."""
    c = np.asarray(close, float)
    _need(c, n + 1, f"ATR({n})")
    tr = true_range(high, low, close)
    out = np.full(len(c), np.nan)
    prev = math.fsum(tr[1:n + 1].tolist()) / n
    out[n] = prev
    for t in range(n + 1, len(c)):
        prev = (prev * (n - 1) + tr[t]) / n
        out[t] = prev
    return out


def first_defined(values: np.ndarray) -> int:
    idx = np.flatnonzero(~np.isnan(values))
    return int(idx[0]) if idx.size else len(values)


@dataclass(frozen=True)
class IndicatorPanel:
    close: np.ndarray
    macd: np.ndarray
    rsi: np.ndarray
    boll_upper: np.ndarray
    boll_middle: np.ndarray
    boll_lower: np.ndarray
    bias: np.ndarray
    atr: np.ndarray

    COLUMNS = ("macd", "rsi", "boll_upper", "boll_middle", "boll_lower", "bias", "atr")

    @property
    def warmup(self) -> int:
        """Index of the first bar at which every indicator is defined."""
        return max(first_defined(getattr(self, c)) for c in self.COLUMNS)

    def __len__(self) -> int:
        return len(self.close)


def compute_panel(series, cfg: IndicatorConfig = IndicatorConfig()) -> IndicatorPanel:
    """All five indicators on a bar series exposing high/low/close arrays."""
    close = np.asarray(series.close, float)
    upper, middle, lower = bollinger(
        typical_price(series.high, series.low, close), cfg.boll_n, cfg.boll_m, cfg.boll_ddof
    )
    return IndicatorPanel(
        close=close,
        macd=macd(close, cfg),
        rsi=rsi(close, cfg.rsi_n),
        boll_upper=upper,
        boll_middle=middle,
        boll_lower=lower,
        bias=bias(close, cfg.bias_n),
        atr=atr(series.high, series.low, close, cfg.atr_n),
    )
