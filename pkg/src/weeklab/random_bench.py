"""Random-trader benchmark: the mean gross return over in/out decision vectors.

Over T weeks a random trader picks s_t in {0, 1} per week and ends with
R = prod(1 + s_t r_t). Averaging over all 2^T vectors factorises to
prod(1 + r_t/2). Restricting to traders that are right in exactly k
weeks, week t contributes a_t when right and b_t when wrong (up week:
a = 1 + r, b = 1; down or flat week: a = 1, b = 1 + r), so the sum over
those traders is the x^k coefficient of prod(a_t x + b_t).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HorizonTooLargeError, ValidationError

MAX_ENUMERATION_WEEKS = 20


@dataclass(frozen=True)
class BenchResult:
    expected_gross: float
    method: str  # closed_form | enumeration | dp | monte_carlo
    n_cases: int
    std_error: float | None = None

    @property
    def expected_net(self) -> float:
        return self.expected_gross - 1.0


@dataclass(frozen=True)
class Enumeration:
    result: BenchResult
    states: np.ndarray  # (2^T, T) uint8, 1 = in
    gross: np.ndarray  # gross return per case
    correct: np.ndarray  # number of right decisions per case

    @property
    def accuracy(self) -> np.ndarray:
        return self.correct / self.states.shape[1]


@dataclass(frozen=True)
class AccuracyCurve:
    expected: np.ndarray  # E_0..E_T
    breakeven_k: int | None  # smallest k with E_j > 1 for every j >= k

    @property
    def horizon(self) -> int:
        return len(self.expected) - 1

    def rows(self):
        T = self.horizon
        for k, e in enumerate(self.expected):
            yield k, 100.0 * k / T if T else 0.0, float(e) - 1.0


def _returns(returns) -> np.ndarray:
    r = np.asarray(returns, dtype=float).ravel()
    if len(r) < 1:
        raise ValidationError("benchmark needs at least one weekly return")
    if not np.all(np.isfinite(r)) or np.any(r <= -1.0):
        raise DomainError("weekly returns must be finite and exceed -1")
    return r


def decision_factors(returns) -> tuple[np.ndarray, np.ndarray]:
    """Per-week gross factor when right (a) and when wrong (b)."""
    r = _returns(returns)
    up = r > 0
    return np.where(up, 1.0 + r, 1.0), np.where(up, 1.0, 1.0 + r)


def expected_return_all(returns) -> BenchResult:
    r = _returns(returns)
    value = 1.0
    for x in r:
        value *= 1.0 + x / 2.0
    return BenchResult(value, "closed_form", 2 ** len(r))


def _check_horizon(T: int) -> None:
    if T > MAX_ENUMERATION_WEEKS:
        raise HorizonTooLargeError(
            f"enumeration is capped at {MAX_ENUMERATION_WEEKS} weeks (got {T}); "
            "use expected_return_all, expected_return_at_accuracy or monte_carlo"
        )


def enumerate_all(returns) -> Enumeration:
    """Every one of the 2^T in/out vectors with its gross return.

    Case i is in during week t when bit (T-1-t) of i is 0, so case 0 is
    "always in" and the last case "always out".
    """
    r = _returns(returns)
    T = len(r)
    _check_horizon(T)
    idx = np.arange(2 ** T, dtype=np.int64)
    states = np.empty((2 ** T, T), dtype=np.uint8)
    gross = np.ones(2 ** T)
    correct = np.zeros(2 ** T, dtype=np.int64)
    for t in range(T):
        s = (1 - ((idx >> (T - 1 - t)) & 1)).astype(np.uint8)
        states[:, t] = s
        gross *= 1.0 + s * r[t]
        correct += (s == 1) == (r[t] > 0)
    result = BenchResult(float(np.mean(gross)), "enumeration", 2 ** T)
    return Enumeration(result, states, gross, correct)


def _poly(returns) -> np.ndarray:
    """Coefficients c_k of prod(a_t x + b_t), lowest degree first."""
    a, b = decision_factors(returns)
    coef = np.array([1.0])
    for at, bt in zip(a, b):
        nxt = np.zeros(len(coef) + 1)
        nxt[:-1] += coef * bt
        nxt[1:] += coef * at
        coef = nxt
    return coef


def expected_return_at_accuracy(returns, k: int) -> BenchResult:
    """Mean gross return over the C(T, k) traders right in exactly k weeks."""
    r = _returns(returns)
    T = len(r)
    if not 0 <= k <= T:
        raise ValueError(f"k must lie in [0, {T}], got {k}")
    coef = _poly(r)
    n = math.comb(T, k)
    return BenchResult(float(coef[k] / n), "dp", n)


def enumerate_at_accuracy(returns, k: int) -> BenchResult:
    """Brute-force counterpart of :func:`expected_return_at_accuracy`."""
    r = _returns(returns)
    T = len(r)
    _check_horizon(T)
    if not 0 <= k <= T:
        raise ValueError(f"k must lie in [0, {T}], got {k}")
    a, b = decision_factors(r)
    total = []
    for right in itertools.combinations(range(T), k):
        chosen = set(right)
        g = 1.0
        for t in range(T):
            g *= a[t] if t in chosen else b[t]
        total.append(g)
    return BenchResult(math.fsum(total) / len(total), "enumeration", len(total))


def accuracy_cases(returns, k: int) -> list[tuple[tuple[int, ...], float]]:
    """(state vector, gross return) of each trader right in exactly k weeks."""
    r = _returns(returns)
    _check_horizon(len(r))
    up = r > 0
    out = []
    for right in itertools.combinations(range(len(r)), k):
        chosen = set(right)
        s = tuple(int(up[t] == (t in chosen)) for t in range(len(r)))
        out.append((s, math.prod(1.0 + st * rt for st, rt in zip(s, r))))
    return out


def accuracy_curve(returns) -> AccuracyCurve:
    r = _returns(returns)
    T = len(r)
    coef = _poly(r)
    expected = np.array([coef[k] / math.comb(T, k) for k in range(T + 1)])
    breakeven = None
    for k in range(T, -1, -1):
        if expected[k] > 1.0:
            breakeven = k
        else:
            break
    return AccuracyCurve(expected, breakeven)


def monte_carlo(returns, p: float, samples: int, seed: int = 0) -> BenchResult:
    """Traders right each week independently with probability p."""
    r = _returns(returns)
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    a, b = decision_factors(r)
    rng = np.random.default_rng(seed)
    right = rng.random((samples, len(r))) < p
    gross = np.ones(samples)
    for t in range(len(r)):
        gross *= np.where(right[:, t], a[t], b[t])
    if np.all(gross == gross[0]):
        # a degenerate sample (p = 0 or 1) must not pick up summation round-off
        return BenchResult(float(gross[0]), "monte_carlo", samples, 0.0)
    mean = float(gross.mean())
    se = float(gross.std(ddof=1) / math.sqrt(samples))
    return BenchResult(mean, "monte_carlo", samples, se)
