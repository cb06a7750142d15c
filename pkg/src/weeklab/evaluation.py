"""Classification metrics and the long/flat backtest."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    mcc: float
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "mcc": self.mcc,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
        }


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def classification_metrics(pred, truth) -> Metrics:
    """Confusion-matrix metrics with class 1 as positive; 0/0 ratios are 0."""
    p = np.asarray(pred).astype(int)
    t = np.asarray(truth).astype(int)
    if len(p) != len(t):
        raise ValidationError(f"{len(p)} predictions vs {len(t)} labels")
    if len(p) == 0:
        raise ValidationError("metrics need at least one prediction")
    tp = int(np.sum((p == 1) & (t == 1)))
    fp = int(np.sum((p == 1) & (t == 0)))
    tn = int(np.sum((p == 0) & (t == 0)))
    fn = int(np.sum((p == 0) & (t == 1)))
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = _ratio(2 * precision * recall, precision + recall)
    den = math.sqrt(float(tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    mcc = _ratio(tp * tn - fp * fn, den)
    return Metrics(
        accuracy=(tp + tn) / len(p),
        precision=precision,
        recall=recall,
        f1=f1,
        mcc=max(-1.0, min(1.0, mcc)),
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
    )


def decision_accuracy(positions, returns) -> float:
    """Share of weeks where in/out matched the move (out is right on a flat week)."""
    s = np.asarray(positions).astype(int)
    r = np.asarray(returns, dtype=float)
    if len(s) != len(r):
        raise ValidationError("positions and returns must align")
    return float(np.mean((s == 1) == (r > 0))) if len(s) else 0.0


@dataclass(frozen=True)
class BacktestReport:
    gross_return: float
    positions: tuple[int, ...]
    principal: tuple[float, ...]  # principal[0] is the starting amount

    @property
    def net_return(self) -> float:
        return self.gross_return - 1.0

    def to_dict(self) -> dict:
        return {
            "gross_return": self.gross_return,
            "net_return": self.net_return,
            "positions": list(self.positions),
            "principal": list(self.principal),
        }


def run_long_flat_strategy(pred, realized_returns, initial: float = 1.0) -> BacktestReport:
    """Hold the asset in weeks predicted up (1), cash otherwise."""
    s = [int(v) for v in np.asarray(pred).astype(int)]
    r = [float(v) for v in np.asarray(realized_returns, dtype=float)]
    if len(s) != len(r):
        raise ValidationError(f"{len(s)} predictions vs {len(r)} returns")
    if any(v not in (0, 1) for v in s):
        raise ValidationError("positions must be 0 (out) or 1 (in)")
    if any(v <= -1.0 for v in r):
        raise ValidationError("weekly returns must exceed -1")
    path = [float(initial)]
    value = float(initial)
    for pos, ret in zip(s, r):
        if pos:
            value *= 1.0 + ret
        path.append(value)
    return BacktestReport(gross_return=value / initial, positions=tuple(s), principal=tuple(path))


def perfect_return(returns) -> float:
    """Gross return of being in exactly on the up weeks."""
    return math.prod(1.0 + r for r in map(float, returns) if r > 0)


def buy_and_hold(returns) -> float:
    return math.prod(1.0 + r for r in map(float, returns))
