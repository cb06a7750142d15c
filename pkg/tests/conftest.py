from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

from weeklab.market_data import DailySeries, resample_weekly
from weeklab.synthetic import synthetic_daily

FIXTURES = Path(__file__).parent / "fixtures"


def _ball_normal(rng, n, d, radius):
    out = []
    while len(out) < n:
        p = rng.normal(size=d)
        if np.linalg.norm(p) <= radius:
            out.append(p)
    return np.array(out)


def make_blobs(seed=0, n=50, sep=4.0, radius=1.9):
    """Two unit-variance Gaussian blobs ``sep`` sigma apart.

    Draws further than ``radius`` from their centre are rejected, so the
    blobs are separable with a margin of sep - 2 * radius.
    """
    rng = np.random.default_rng(seed)
    d = 2
    centre = np.array([sep / 2, 0.0])
    X = np.vstack([_ball_normal(rng, n, d, radius) - centre, _ball_normal(rng, n, d, radius) + centre])
    y = np.array([0] * n + [1] * n)
    return X, y


def make_xor(seed=0, n=25, spread=0.1):
    rng = np.random.default_rng(seed)
    centres = [(0, 0, 0), (1, 1, 0), (0, 1, 1), (1, 0, 1)]
    rows, labels = [], []
    for cx, cy, label in centres:
        rows.append(rng.normal((cx, cy), spread, (n, 2)))
        labels += [label] * n
    return np.vstack(rows), np.array(labels)


@pytest.fixture(scope="session")
def blobs():
    return make_blobs()


@pytest.fixture(scope="session")
def blobs_holdout():
    return make_blobs(seed=1)


@pytest.fixture(scope="session")
def xor():
    return make_xor()


@pytest.fixture(scope="session")
def xor4():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    return X, np.array([0, 1, 1, 0])


def weekday_series(closes, start=date(2024, 1, 1), volumes=None, spread=0.0):
    """Daily series on consecutive weekdays from ``start`` with given closes."""
    days = []
    d = start
    while len(days) < len(closes):
        if d.isoweekday() <= 5:
            days.append(d)
        d += timedelta(days=1)
    c = np.asarray(closes, dtype=float)
    v = np.ones(len(c)) if volumes is None else np.asarray(volumes, dtype=float)
    return DailySeries(dates=days, open=c, high=c + spread, low=c - spread,
                       close=c, adj_close=c, volume=v)


@pytest.fixture(scope="session")
def weekly_syn():
    return resample_weekly(synthetic_daily(seed=11))


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES):
            terminalreporter.write_line(line)
