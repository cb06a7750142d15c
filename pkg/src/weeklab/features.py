"""Per-week feature rows, labels, standardisation, PCA and the chronological split.

Order of operations: indicators and intrinsic-time signals are computed
on the full weekly series (all causal), warmup weeks are dropped, every
signal is discretised to +/-1, and a train/test split is taken from the
end of the series. Standardisation and PCA are then fitted on the train
rows alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import InsufficientDataError, ValidationError
from .indicators import IndicatorConfig, IndicatorPanel, compute_panel
from .intrinsic_time import (
    DcConfig,
    dc_cumulative_counts,
    detect_dc_events,
    scaling_residual,
    trend_mode,
)
from .market_data import WeeklySeries, weekly_returns

FEATURE_NAMES = (
    "macd",
    "rsi",
    "bollinger",
    "bias",
    "atr",
    "dc_mode",
    "dc_imbalance",
    "price_scaling",
    "volume_scaling",
)


@dataclass(frozen=True)
class DiscretizeConfig:
    rsi_oversold: float = 30.0
    rsi_overbought: float = 70.0


@dataclass(frozen=True)
class FeatureConfig:
    indicators: IndicatorConfig = field(default_factory=IndicatorConfig)
    dc: DcConfig = field(default_factory=DcConfig)
    discretize: DiscretizeConfig = field(default_factory=DiscretizeConfig)


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    names: tuple[str, ...]
    timestamps: tuple[date, ...]
    # position of each row in the source weekly series
    week_index: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            values = values.reshape(len(self.timestamps), -1)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "week_index", np.asarray(self.week_index, dtype=int))
        if values.shape[0] != len(self.timestamps) or values.shape[0] != len(self.week_index):
            raise ValidationError("feature rows, timestamps and week indices must align")
        if values.shape[1] != len(self.names):
            raise ValidationError("one name per feature column required")
        if np.isnan(values).any():
            raise ValidationError("feature matrix contains undefined entries")
        if any(b <= a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise ValidationError("feature timestamps must be strictly increasing")

    def __len__(self) -> int:
        return self.values.shape[0]

    def rows(self, sl) -> "FeatureMatrix":
        """Row subset by slice or integer index array, order kept."""
        if isinstance(sl, slice):
            stamps = self.timestamps[sl]
        else:
            stamps = tuple(self.timestamps[i] for i in np.asarray(sl, dtype=int))
        return FeatureMatrix(self.values[sl], self.names, stamps, self.week_index[sl])


@dataclass(frozen=True)
class Dataset:
    """Labelled feature rows plus the realised return each label refers to."""

    features: FeatureMatrix
    labels: np.ndarray
    next_returns: np.ndarray
    own_returns: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class SplitDataset:
    train: Dataset
    test: Dataset


def make_labels(weekly_returns) -> np.ndarray:
    """y_t = 1 if r_{t+1} > 0 else 0; the last return gets no label."""
    r = np.asarray(weekly_returns, dtype=float)
    if len(r) < 2:
        raise InsufficientDataError("labels need at least 2 returns")
    return (r[1:] > 0).astype(int)


def _sign(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, 1.0, -1.0)


def _delta(x: np.ndarray) -> np.ndarray:
    out = np.full(len(x), np.nan)
    out[1:] = x[1:] - x[:-1]
    return out


def intrinsic_signals(series: WeeklySeries, cfg: DcConfig) -> dict[str, np.ndarray]:
    close = np.asarray(series.close, float)
    events = detect_dc_events(close, cfg)
    _, _, imbalance = dc_cumulative_counts(events, len(close))
    return {
        "dc_mode": trend_mode(close, cfg),
        "dc_imbalance": imbalance.astype(float),
        "price_residual": scaling_residual(close),
        "volume_residual": scaling_residual(series.volume),
    }


def raw_signals(series: WeeklySeries, cfg: FeatureConfig = FeatureConfig()) -> dict[str, np.ndarray]:
    """Continuous per-week inputs of the discretisation rules (NaN in warmup)."""
    panel: IndicatorPanel = compute_panel(series, cfg.indicators)
    signals = {
        "macd_delta": _delta(panel.macd),
        "rsi": panel.rsi,
        "rsi_delta": _delta(panel.rsi),
        "close_minus_middle": panel.close - panel.boll_middle,
        "bias": panel.bias,
        "atr_delta": _delta(panel.atr),
    }
    signals.update(intrinsic_signals(series, cfg.dc))
    return signals


def discretize(signals, cfg: DiscretizeConfig = DiscretizeConfig()) -> np.ndarray:
    """Map continuous signals to a +/-1 matrix with columns FEATURE_NAMES.

    MACD and ATR follow the sign of their week-on-week change; RSI is +1
    when oversold, -1 when overbought and otherwise follows its change;
    Bollinger is +1 below the middle band; BIAS is +1 when negative; the
    intrinsic-time signals keep their sign. Zero maps to +1.
    """
    for name, col in signals.items():
        if np.isnan(np.asarray(col, float)).any():
            raise ValidationError(f"signal {name!r} has undefined values; drop warmup first")
    rsi_ = np.asarray(signals["rsi"], float)
    rsi_col = np.where(
        rsi_ < cfg.rsi_oversold,
        1.0,
        np.where(rsi_ > cfg.rsi_overbought, -1.0, _sign(np.asarray(signals["rsi_delta"], float))),
    )
    cols = [
        _sign(np.asarray(signals["macd_delta"], float)),
        rsi_col,
        np.where(np.asarray(signals["close_minus_middle"], float) < 0, 1.0, -1.0),
        np.where(np.asarray(signals["bias"], float) < 0, 1.0, -1.0),
        _sign(np.asarray(signals["atr_delta"], float)),
        _sign(np.asarray(signals["dc_mode"], float)),
        _sign(np.asarray(signals["dc_imbalance"], float)),
        _sign(np.asarray(signals["price_residual"], float)),
        _sign(np.asarray(signals["volume_residual"], float)),
    ]
    return np.column_stack(cols)


def signal_warmup(signals) -> int:
    start = 0
    for col in signals.values():
        defined = np.flatnonzero(~np.isnan(np.asarray(col, float)))
        start = max(start, int(defined[0]) if defined.size else len(col))
    return start


def weekly_features(series: WeeklySeries, cfg: FeatureConfig = FeatureConfig()) -> FeatureMatrix:
    """Discretised feature rows for every post-warmup week, last week included."""
    signals = raw_signals(series, cfg)
    start = signal_warmup(signals)
    if start >= len(series):
        raise InsufficientDataError(
            f"{len(series)} weeks do not cover the {start}-week indicator warmup"
        )
    trimmed = {k: np.asarray(v, float)[start:] for k, v in signals.items()}
    return FeatureMatrix(
        values=discretize(trimmed, cfg.discretize),
        names=FEATURE_NAMES,
        timestamps=series.week_start[start:],
        week_index=np.arange(start, len(series)),
    )


def build_dataset(series: WeeklySeries, cfg: FeatureConfig = FeatureConfig()) -> Dataset:
    """Feature rows paired with next-week labels; the final week is dropped."""
    feats = weekly_features(series, cfg)
    returns = weekly_returns(series)
    # returns[w] is the move from week w to week w+1; labels[w-1] uses it
    labels = make_labels(returns)
    idx = feats.week_index
    labelled = idx < len(series) - 1
    feats = feats.rows(np.flatnonzero(labelled))
    idx = feats.week_index
    if np.any(idx < 1):
        raise ValidationError("feature rows must start after the first week")
    own = returns[idx - 1]
    return Dataset(
        features=feats,
        labels=labels[idx - 1],
        next_returns=returns[idx],
        own_returns=own,
    )


def chrono_split(dataset: Dataset, test_size: int = 20) -> SplitDataset:
    """The last ``test_size`` rows become the test set; nothing is shuffled."""
    n = len(dataset)
    if test_size < 1:
        raise ValueError("test_size must be >= 1")
    if n <= test_size:
        raise InsufficientDataError(
            f"{n} labelled weeks leave no training rows for test_size={test_size}"
        )
    cut = n - test_size

    def part(sl):
        return Dataset(
            features=dataset.features.rows(sl),
            labels=dataset.labels[sl],
            next_returns=dataset.next_returns[sl],
            own_returns=dataset.own_returns[sl],
        )

    split = SplitDataset(train=part(slice(0, cut)), test=part(slice(cut, n)))
    assert split.train.features.timestamps[-1] < split.test.features.timestamps[0]
    return split


@dataclass(frozen=True)
class Standardizer:
    means: np.ndarray
    scales: np.ndarray

    def apply(self, matrix) -> np.ndarray:
        return (np.asarray(matrix, float) - self.means) / self.scales

    def invert(self, matrix) -> np.ndarray:
        return np.asarray(matrix, float) * self.scales + self.means


def standardize_fit(matrix) -> Standardizer:
    """Column means and population standard deviations; constant columns get scale 1."""
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise InsufficientDataError("standardisation needs a non-empty 2-D matrix")
    means = x.mean(axis=0)
    scales = x.std(axis=0)
    scales = np.where(scales > 0, scales, 1.0)
    return Standardizer(means, scales)


def standardize_apply(stats: Standardizer, matrix) -> np.ndarray:
    return stats.apply(matrix)


@dataclass(frozen=True)
class PcaModel:
    means: np.ndarray
    scales: np.ndarray
    components: np.ndarray  # (n_components, n_features), rows orthonormal
    explained_variance_ratio: np.ndarray  # all eigen-directions, descending
    n_components: int

    @property
    def retained_ratio(self) -> np.ndarray:
        return self.explained_variance_ratio[: self.n_components]

    def to_dict(self) -> dict:
        return {
            "means": self.means.tolist(),
            "scales": self.scales.tolist(),
            "components": self.components.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
            "n_components": self.n_components,
        }


def _orient(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, j])))
        if out[i, j] < 0:
            out[:, j] = -out[:, j]
    return out


def pca_fit(
    matrix,
    variance_threshold: float = 0.95,
    n_components: int | None = None,
    standardize: bool = True,
) -> PcaModel:
    """Eigendecomposition of the (standardised) sample covariance.

    Keeps the smallest k whose cumulative explained-variance ratio reaches
    ``variance_threshold`` unless ``n_components`` is given.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InsufficientDataError("PCA needs at least 2 rows")
    if not 0.0 < variance_threshold <= 1.0:
        raise ValueError("variance_threshold must lie in (0, 1]")
    d = x.shape[1]
    if standardize:
        stats = standardize_fit(x)
        means, scales = stats.means, stats.scales
    else:
        means, scales = x.mean(axis=0), np.ones(d)
    z = (x - means) / scales
    cov = z.T @ z / (x.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(-eigvals, kind="stable")
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = _orient(eigvecs[:, order])
    total = eigvals.sum()
    if total > 0:
        ratio = eigvals / total
    else:
        ratio = np.zeros(d)
    if n_components is None:
        if total > 0:
            cum = np.cumsum(ratio)
            hits = np.flatnonzero(cum >= variance_threshold - 1e-12)
            k = int(hits[0]) + 1 if hits.size else d
        else:
            k = 1
    else:
        if not 1 <= n_components <= d:
            raise ValueError(f"n_components must lie in [1, {d}]")
        k = n_components
    return PcaModel(
        means=means,
        scales=scales,
        components=eigvecs[:, :k].T.copy(),
        explained_variance_ratio=ratio,
        n_components=k,
    )


def pca_transform(model: PcaModel, matrix) -> np.ndarray:
    z = (np.asarray(matrix, dtype=float) - model.means) / model.scales
    return z @ model.components.T


def pca_inverse_transform(model: PcaModel, projected) -> np.ndarray:
    z = np.asarray(projected, dtype=float) @ model.components
    return z * model.scales + model.means
