"""Log-magnitude duplication of training rows."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class AugmentConfig:
    enabled: bool = True
    base: float = math.e
    units: str = "percent"  # "percent" or "fraction"
    source: str = "next"  # "next": labelled week's return, "own": the sample week's return

    def __post_init__(self):
        if self.units not in ("percent", "fraction"):
            raise ValueError(f"augment.units must be 'percent' or 'fraction', got {self.units!r}")
        if self.source not in ("next", "own"):
            raise ValueError(f"augment.source must be 'next' or 'own', got {self.source!r}")
        if self.base <= 1:
            raise ValueError("augment.base must be > 1")


@dataclass(frozen=True)
class AugmentedTrainSet:
    features: np.ndarray
    labels: np.ndarray
    origin: np.ndarray  # source row of each output row
    counts: np.ndarray  # duplicate count per original row

    def __len__(self) -> int:
        return len(self.labels)


def duplicate_count(return_change: float, cfg: AugmentConfig = AugmentConfig()) -> int:
    """max(ceil(log(|r|)), 1), with r in percent and a natural log by default."""
    r = float(return_change)
    if not r > -1.0:
        raise DomainError(f"return change must exceed -1, got {r}")
    magnitude = abs(r) * (100.0 if cfg.units == "percent" else 1.0)
    if magnitude == 0.0:
        return 1
    return max(math.ceil(math.log(magnitude, cfg.base)), 1)


def augment(features, labels, returns, cfg: AugmentConfig = AugmentConfig()) -> AugmentedTrainSet:
    """Repeat row i duplicate_count(returns[i]) times, copies kept adjacent.

    Apply once, to training rows only; the caller owns that contract.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    r = np.asarray(returns, dtype=float)
    if not (len(x) == len(y) == len(r)):
        raise ValidationError(
            f"augment needs aligned inputs, got {len(x)} rows, {len(y)} labels, {len(r)} returns"
        )
    if cfg.enabled:
        counts = np.array([duplicate_count(v, cfg) for v in r], dtype=int)
    else:
        counts = np.ones(len(r), dtype=int)
    origin = np.repeat(np.arange(len(r)), counts)
    return AugmentedTrainSet(features=x[origin], labels=y[origin], origin=origin, counts=counts)


def sample_weights(returns, cfg: AugmentConfig = AugmentConfig()) -> np.ndarray:
    """Duplicate counts as weights, for learners that take per-row weights.

    Weighting by these integers is equivalent to duplication only for
    learners whose objective is a plain sum over rows.
    """
    return np.array([float(duplicate_count(v, cfg)) for v in returns])
