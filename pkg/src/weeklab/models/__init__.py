"""The eight classifiers behind one fit/predict contract.

>>> spec = ClassifierSpec("KNN", {"k": 1})
>>> model = fit(spec, [[0.0], [1.0]], [0, 1])
>>> predict(model, [[0.1]]).tolist()
[0]
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DegenerateDataError, DomainError, ValidationError
from .ensembles import AdaBoost, BaggedTrees, GradientBoosting, RandomForest
from .logistic import LogisticRegression
from .mlp import MLPClassifier, mlp_numeric_gradient_check
from .neighbors import KNNClassifier
from .svm import SVMClassifier
from .tree import DecisionTree

KINDS = ("KNN", "LR", "RF", "AB", "GB", "Bag", "SVM", "MLP")

ESTIMATORS = {
    "KNN": KNNClassifier,
    "LR": LogisticRegression,
    "RF": RandomForest,
    "AB": AdaBoost,
    "GB": GradientBoosting,
    "Bag": BaggedTrees,
    "SVM": SVMClassifier,
    "MLP": MLPClassifier,
}

DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "KNN": {"k": 5},
    "LR": {"learning_rate": 0.1, "l2": 1e-4, "epochs": 500},
    "RF": {"n_estimators": 100, "max_depth": 8, "max_features": "sqrt"},
    "AB": {"n_estimators": 100, "max_depth": 1},
    "GB": {"n_estimators": 100, "learning_rate": 0.1, "max_depth": 3},
    "Bag": {"n_estimators": 100, "max_depth": None, "max_features": None},
    "SVM": {"C": 1.0, "kernel": "rbf", "gamma": None, "tol": 1e-3},
    "MLP": {"hidden": [16], "learning_rate": 0.05, "epochs": 2000},
}

# kinds whose constructor takes the spec seed
_SEEDED = {"RF", "Bag", "MLP"}

MODEL_FORMAT = "weeklab-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ESTIMATORS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind])
        if unknown:
            raise ValueError(f"{self.kind}: unknown hyperparameters {sorted(unknown)}")

    @property
    def resolved_params(self) -> dict:
        return {**DEFAULT_PARAMS[self.kind], **self.params}

    def build(self):
        kwargs = dict(self.resolved_params)
        if self.kind in _SEEDED:
            kwargs["seed"] = self.seed
        return ESTIMATORS[self.kind](**kwargs)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.resolved_params, "seed": self.seed}


@dataclass(frozen=True)
class TrainedModel:
    spec: ClassifierSpec
    estimator: Any
    n_features: int
    train_accuracy: float

    @property
    def kind(self) -> str:
        return self.spec.kind


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(0, 0) if X.size == 0 else X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValidationError("features must be a 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise DomainError("features must be finite")
    return X


def fit(spec: ClassifierSpec, X, y=None) -> TrainedModel:
    """Fit ``spec`` on (X, y); X may also be an AugmentedTrainSet."""
    if y is None and hasattr(X, "features") and hasattr(X, "labels"):
        X, y = X.features, X.labels
    X = _as_matrix(X)
    y = np.asarray(y)
    if len(y) != len(X):
        raise ValidationError(f"{len(X)} rows but {len(y)} labels")
    if not np.isin(y, (0, 1)).all():
        raise ValidationError("labels must be 0 or 1")
    y = y.astype(int)
    if len(y) < 2 and spec.kind != "KNN":
        raise DegenerateDataError(f"{spec.kind} needs at least 2 rows")
    if len(y) < 1:
        raise DegenerateDataError("cannot fit on an empty training set")
    if spec.kind != "KNN" and len(np.unique(y)) < 2:
        raise DegenerateDataError(f"{spec.kind} needs both classes in the training labels")
    est = spec.build().fit(X, y)
    acc = float(np.mean(est.predict(X) == y))
    return TrainedModel(spec=spec, estimator=est, n_features=X.shape[1], train_accuracy=acc)


def predict(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return np.zeros(0, dtype=int)
    X = _as_matrix(X)
    if X.shape[1] != model.n_features:
        raise ValidationError(f"model expects {model.n_features} features, got {X.shape[1]}")
    return model.estimator.predict(X).astype(int)


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "spec": model.spec.to_dict(),
        "n_features": model.n_features,
        "train_accuracy": model.train_accuracy,
        "parameters": model.estimator.to_dict(),
    }


def model_from_dict(doc: dict) -> TrainedModel:
    if doc.get("format") != MODEL_FORMAT:
        raise ValidationError("not a weeklab model document")
    if doc.get("version") != MODEL_VERSION:
        raise ValidationError(f"unsupported model document version {doc.get('version')!r}")
    s = doc["spec"]
    spec = ClassifierSpec(s["kind"], dict(s["params"]), int(s["seed"]))
    est = ESTIMATORS[spec.kind].from_dict(doc["parameters"])
    return TrainedModel(spec, est, int(doc["n_features"]), float(doc["train_accuracy"]))


def dumps_model(model: TrainedModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def loads_model(text: str) -> TrainedModel:
    return model_from_dict(json.loads(text))


__all__ = [
    "KINDS",
    "DEFAULT_PARAMS",
    "ClassifierSpec",
    "TrainedModel",
    "DecisionTree",
    "fit",
    "predict",
    "model_to_dict",
    "model_from_dict",
    "dumps_model",
    "loads_model",
    "mlp_numeric_gradient_check",
]
