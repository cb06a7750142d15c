"""Deterministic synthetic OHLCV data for fixtures and demos."""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np

from .market_data import DailySeries

# market-closed weekdays to leave holes in the calendar (partial weeks)
_HOLIDAYS = {(1, 1), (7, 4), (12, 25), (11, 24), (5, 29), (9, 4)}


def trading_days(start: date, end: date) -> list[date]:
    days = []
    d = start
    while d <= end:
        if d.isoweekday() <= 5 and (d.month, d.day) not in _HOLIDAYS:
            days.append(d)
        d += timedelta(days=1)
    return days


def synthetic_daily(
    seed: int,
    start: date = date(2021, 1, 1),
    end: date = date(2024, 5, 1),
    price: float = 100.0,
    drift: float = 0.0004,
    vol: float = 0.015,
    volume: float = 1e6,
) -> DailySeries:
    """Geometric random walk with intraday ranges and lognormal volume."""
    rng = np.random.default_rng(seed)
    days = trading_days(start, end)
    n = len(days)
    log_ret = rng.normal(drift, vol, n)
    close = price * np.exp(np.cumsum(log_ret))
    prev = np.concatenate([[price], close[:-1]])
    open_ = prev * np.exp(rng.normal(0.0, vol / 4, n))
    spread = np.abs(rng.normal(0.0, vol / 2, (2, n)))
    high = np.maximum(open_, close) * (1.0 + spread[0])
    low = np.minimum(open_, close) * (1.0 - spread[1])
    vols = np.round(volume * np.exp(rng.normal(0.0, 0.3, n)))
    o, h, l, c = (np.round(a, 4) for a in (open_, high, low, close))
    h = np.maximum.reduce([h, o, c])
    l = np.minimum.reduce([l, o, c])
    return DailySeries(dates=days, open=o, high=h, low=l, close=c, adj_close=c, volume=vols)
