"""Random forest, bagging, AdaBoost (SAMME) and gradient boosting.

Every member tree draws from its own generator seeded ``seed + index`` so
an ensemble is reproducible tree by tree.
"""

from __future__ import annotations

import math

import numpy as np

from .logistic import sigmoid
from .tree import DecisionTree


def _majority(votes: np.ndarray) -> np.ndarray:
    # votes: (n_trees, n_rows) of 0/1; ties go to class 0
    return (2 * votes.sum(axis=0) > votes.shape[0]).astype(int)


class BaggedTrees:
    """Bootstrap-aggregated classification trees, hard majority vote."""

    kind = "Bag"

    def __init__(
        self,
        n_estimators: int = 100,
        max_depth: int | None = None,
        max_features: int | str | None = None,
        min_samples_leaf: int = 1,
        seed: int = 0,
    ):
        if n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        self.n_estimators = int(n_estimators)
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_leaf = min_samples_leaf
        self.seed = int(seed)

    def _n_features(self, d: int) -> int | None:
        if self.max_features is None:
            return None
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(d)))
        return int(self.max_features)

    def fit(self, X, y) -> "BaggedTrees":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        n, d = X.shape
        m = self._n_features(d)
        self.trees_ = []
        for i in range(self.n_estimators):
            rng = np.random.default_rng(self.seed + i)
            sample = rng.integers(0, n, size=n)
            tree = DecisionTree(
                criterion="gini",
                max_depth=self.max_depth,
                min_samples_leaf=self.min_samples_leaf,
                max_features=m,
                rng=rng,
            )
            self.trees_.append(tree.fit(X[sample], y[sample]))
        return self

    def predict(self, X) -> np.ndarray:
        votes = np.array([t.predict(X) for t in self.trees_])
        return _majority(votes)

    def to_dict(self) -> dict:
        return {"trees": [t.to_dict() for t in self.trees_]}

    @classmethod
    def from_dict(cls, d: dict):
        model = cls()
        model.trees_ = [DecisionTree.from_dict(t) for t in d["trees"]]
        model.n_estimators = len(model.trees_)
        return model


class RandomForest(BaggedTrees):
    """Bagging plus a random sqrt(d) feature subset at every split."""

    kind = "RF"

    def __init__(
        self,
        n_estimators: int = 100,
        max_depth: int | None = 8,
        max_features: int | str | None = "sqrt",
        min_samples_leaf: int = 1,
        seed: int = 0,
    ):
        super().__init__(n_estimators, max_depth, max_features, min_samples_leaf, seed)


class AdaBoost:
    """Discrete two-class SAMME over depth-1 stumps.

    Stops early on a perfect stump (kept with weight 1) or on a stump no
    better than chance (dropped unless it is the first).
    """

    kind = "AB"

    def __init__(self, n_estimators: int = 100, max_depth: int = 1):
        self.n_estimators = int(n_estimators)
        self.max_depth = int(max_depth)

    def fit(self, X, y) -> "AdaBoost":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        n = len(y)
        w = np.full(n, 1.0 / n)
        self.stumps_, self.alphas_ = [], []
        for m in range(self.n_estimators):
            stump = DecisionTree(criterion="gini", max_depth=self.max_depth).fit(X, y, w)
            miss = stump.predict(X) != y
            err = float(np.dot(w, miss) / w.sum())
            if err <= 0.0:
                self.stumps_.append(stump)
                self.alphas_.append(1.0)
                break
            if err >= 0.5:
                if m == 0:
                    self.stumps_.append(stump)
                    self.alphas_.append(1.0)
                break
            alpha = math.log((1.0 - err) / err)
            self.stumps_.append(stump)
            self.alphas_.append(alpha)
            w = w * np.exp(alpha * miss)
            w = w / w.sum()
        return self

    def decision_function(self, X) -> np.ndarray:
        score = np.zeros(len(X))
        for a, s in zip(self.alphas_, self.stumps_):
            score += a * (2 * s.predict(X) - 1)
        return score

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)

    def to_dict(self) -> dict:
        return {"alphas": list(self.alphas_), "stumps": [s.to_dict() for s in self.stumps_]}

    @classmethod
    def from_dict(cls, d: dict) -> "AdaBoost":
        model = cls()
        model.alphas_ = [float(a) for a in d["alphas"]]
        model.stumps_ = [DecisionTree.from_dict(s) for s in d["stumps"]]
        return model


class GradientBoosting:
    """Logistic-loss gradient boosting with Newton-step leaf values."""

    kind = "GB"

    def __init__(self, n_estimators: int = 100, learning_rate: float = 0.1, max_depth: int = 3):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        self.n_estimators = int(n_estimators)
        self.learning_rate = learning_rate
        self.max_depth = int(max_depth)

    def fit(self, X, y) -> "GradientBoosting":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        p0 = float(np.clip(y.mean(), 1e-12, 1 - 1e-12))
        self.init_ = math.log(p0 / (1.0 - p0))
        F = np.full(len(y), self.init_)
        self.trees_ = []
        for _ in range(self.n_estimators):
            p = sigmoid(F)
            resid = y - p
            tree = DecisionTree(criterion="mse", max_depth=self.max_depth).fit(X, resid)
            leaves = tree.apply(X)
            hess = p * (1.0 - p)
            for leaf in np.unique(leaves):
                sel = leaves == leaf
                denom = hess[sel].sum()
                tree.value[leaf] = float(resid[sel].sum() / denom) if denom > 1e-12 else 0.0
            F = F + self.learning_rate * tree.predict_value(X)
            self.trees_.append(tree)
        return self

    def decision_function(self, X) -> np.ndarray:
        F = np.full(len(X), self.init_)
        for tree in self.trees_:
            F = F + self.learning_rate * tree.predict_value(X)
        return F

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)

    def to_dict(self) -> dict:
        return {
            "init": self.init_,
            "learning_rate": self.learning_rate,
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GradientBoosting":
        model = cls(learning_rate=d["learning_rate"])
        model.init_ = float(d["init"])
        model.trees_ = [DecisionTree.from_dict(t) for t in d["trees"]]
        return model
