"""Directional-change events and scaling-law statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError

UP_DC, DOWN_DC, UP_OS, DOWN_OS = 1, -1, 2, -2


@dataclass(frozen=True)
class DcConfig:
    delta: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class DcEvent:
    index: int
    kind: int
    price: float


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float


def _scan(closes: np.ndarray, delta: float):
    """Run the detector; yields (index, kind or 0, mode after index)."""
    mode = 0
    hi = lo = closes[0]
    yield 0, 0, 0
    for i in range(1, len(closes)):
        p = closes[i]
        kind = 0
        if mode == 0:
            if p >= lo * (1.0 + delta):
                kind, mode, hi = UP_DC, 1, p
            elif p <= hi * (1.0 - delta):
                kind, mode, lo = DOWN_DC, -1, p
            else:
                hi = max(hi, p)
                lo = min(lo, p)
        elif mode == 1:
            if p <= hi * (1.0 - delta):
                kind, mode, lo = DOWN_DC, -1, p
            elif p > hi:
                kind, hi = UP_OS, p
        else:
            if p >= lo * (1.0 + delta):
                kind, mode, hi = UP_DC, 1, p
            elif p < lo:
                kind, lo = DOWN_OS, p
        yield i, kind, mode


def _check_prices(closes) -> np.ndarray:
    x = np.asarray(closes, dtype=float)
    if len(x) < 2:
        raise InsufficientDataError("directional changes need at least 2 prices")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise DomainError("directional changes need strictly positive, finite prices")
    return x


def detect_dc_events(closes, cfg: DcConfig = DcConfig()) -> list[DcEvent]:
    """Directional changes (+1/-1) and overshoots (+2/-2) at threshold delta.

    The trend is undetermined until the price first moves delta away from
    its running min (up) or max (down). In an up trend each new high is a
    +2 overshoot and a fall of delta below the latest high is a -1 change;
    the down trend mirrors this. Events fire on the first observation that
    crosses the threshold.
    """
    x = _check_prices(closes)
    return [DcEvent(i, k, float(x[i])) for i, k, _ in _scan(x, cfg.delta) if k]


def trend_mode(closes, cfg: DcConfig = DcConfig()) -> np.ndarray:
    """Trend sign (+1, -1, or 0 while undetermined) after each observation."""
    x = _check_prices(closes)
    return np.array([m for _, _, m in _scan(x, cfg.delta)], dtype=float)


def dc_cumulative_counts(events, length: int | None = None):
    """Running counts of +1 and -1 changes per index, and their difference."""
    events = list(events)
    if length is None:
        length = events[-1].index + 1 if events else 0
    plus = np.zeros(length, dtype=int)
    minus = np.zeros(length, dtype=int)
    for e in events:
        if e.kind == UP_DC:
            plus[e.index] += 1
        elif e.kind == DOWN_DC:
            minus[e.index] += 1
    cum_plus = np.cumsum(plus)
    cum_minus = np.cumsum(minus)
    return cum_plus, cum_minus, cum_plus - cum_minus


def cumulative_abs_change(values) -> np.ndarray:
    """Element t is the sum of |v_u - v_{u-1}| for u <= t+1 (length n-1)."""
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        raise InsufficientDataError("cumulative change needs at least 2 values")
    return np.cumsum(np.abs(np.diff(x)))


def linear_fit(series) -> ScalingFit:
    """OLS of ``series`` against 0..n-1; R^2 is 1 for a constant target."""
    y = np.asarray(series, dtype=float)
    n = len(y)
    if n < 2:
        raise InsufficientDataError("linear fit needs at least 2 points")
    t = np.arange(n, dtype=float)
    t_mean = t.mean()
    y_mean = y.mean()
    dt = t - t_mean
    slope = float(np.dot(dt, y - y_mean) / np.dot(dt, dt))
    intercept = float(y_mean - slope * t_mean)
    resid = y - (intercept + slope * t)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(y - y_mean, y - y_mean))
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return ScalingFit(slope, intercept, r2)


_BLOCK = 256


def _row_sums(m: np.ndarray, rows: np.ndarray, r0: int) -> np.ndarray:
    # running sums are sequential, so entry [t, t] never sees columns past t
    return np.cumsum(m, axis=1)[rows - r0, rows]


def _prefix_residuals(cum: np.ndarray, r0: int, r1: int) -> np.ndarray:
    """Residuals for prefixes ending at rows r0..r1-1, fitted all at once."""
    rows = np.arange(r0, r1)
    cols = np.arange(r1, dtype=float)
    ybar = np.cumsum(cum[:r1])[rows] / (rows + 1)
    tbar = rows / 2.0
    mask = cols[None, :] <= rows[:, None]
    dt = np.where(mask, cols[None, :] - tbar[:, None], 0.0)
    dy = np.where(mask, cum[None, :r1] - ybar[:, None], 0.0)
    sxx = _row_sums(dt * dt, rows, r0)
    sxy = _row_sums(dt * dy, rows, r0)
    slope = sxy / sxx
    intercept = ybar - slope * tbar
    resid = np.where(mask, cum[None, :r1] - (intercept[:, None] + slope[:, None] * cols[None, :]), 0.0)
    scale = np.sqrt(_row_sums(resid * resid, rows, r0) / (rows + 1))
    last = resid[rows - r0, rows]
    # cum is non-decreasing, so its prefix maximum is the last value;
    # exact lines leave round-off residuals that count as zero
    flat = scale <= 1e-12 * np.maximum(1.0, cum[rows])
    return np.where(flat, 0.0, last / np.where(flat, 1.0, scale))


def scaling_residual(values) -> np.ndarray:
    """Causal standardised residual of cumulative absolute change.

    The cumulative series starts at 0 for the first observation. At index
    t the line is refitted on points 0..t only and the last residual is
    divided by the RMS residual of that fit. Undefined (NaN) for t < 2.
    """
    x = np.asarray(values, dtype=float)
    if len(x) < 3:
        raise InsufficientDataError("scaling residual needs at least 3 values")
    cum = np.concatenate([[0.0], cumulative_abs_change(x)])
    out = np.full(len(x), np.nan)
    for r0 in range(2, len(x), _BLOCK):
        r1 = min(r0 + _BLOCK, len(x))
        out[r0:r1] = _prefix_residuals(cum, r0, r1)
    return out
