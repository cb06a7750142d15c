"""CART learner shared by the tree ensembles.

Classification trees split on weighted Gini impurity and store the
weighted fraction of class 1 in each leaf; regression trees split on
squared error and store the weighted mean. A node keeps splitting while
it is impure and some threshold separates its rows, even when the best
split does not lower the impurity (XOR-shaped data needs that).
"""

from __future__ import annotations

import numpy as np

LEAF = -1


class DecisionTree:
    def __init__(
        self,
        criterion: str = "gini",
        max_depth: int | None = None,
        min_samples_leaf: int = 1,
        max_features: int | None = None,
        rng: np.random.Generator | None = None,
    ):
        if criterion not in ("gini", "mse"):
            raise ValueError(f"unknown criterion {criterion!r}")
        if max_depth is not None and max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    # building

    def fit(self, X, y, sample_weight=None) -> "DecisionTree":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []
        self.n_features = X.shape[1]
        # explicit stack keeps node numbering depth-first and deterministic
        root = self._new_node(np.arange(len(y)), y, w)
        stack = [(root, np.arange(len(y)), 0)]
        while stack:
            node, idx, depth = stack.pop()
            split = self._choose_split(X, y, w, idx, depth)
            if split is None:
                continue
            f, thr, left_idx, right_idx = split
            self.feature[node] = f
            self.threshold[node] = thr
            l = self._new_node(left_idx, y, w)
            r = self._new_node(right_idx, y, w)
            self.left[node], self.right[node] = l, r
            stack.append((r, right_idx, depth + 1))
            stack.append((l, left_idx, depth + 1))
        return self

    def _new_node(self, idx, y, w) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        ws = w[idx]
        self.value.append(float(np.dot(ws, y[idx]) / ws.sum()))
        return len(self.value) - 1

    def _impure(self, y, w, idx) -> bool:
        ys = y[idx]
        if self.criterion == "gini":
            return bool(ys.min() != ys.max())
        ws = w[idx]
        mean = np.dot(ws, ys) / ws.sum()
        return bool(np.dot(ws, (ys - mean) ** 2) > 1e-14 * ws.sum())

    def _candidate_features(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        if self.max_features is None or self.max_features >= d:
            return np.arange(d), np.array([], dtype=int)
        perm = self.rng.permutation(d)
        return perm[: self.max_features], perm[self.max_features:]

    def _choose_split(self, X, y, w, idx, depth):
        if self.max_depth is not None and depth >= self.max_depth:
            return None
        if len(idx) < 2 * self.min_samples_leaf or not self._impure(y, w, idx):
            return None
        first, rest = self._candidate_features(X.shape[1])
        best = self._best_over(X, y, w, idx, first)
        if best is None and rest.size:
            best = self._best_over(X, y, w, idx, rest)
        if best is None:
            return None
        _, f, thr = best
        mask = X[idx, f] <= thr
        return f, thr, idx[mask], idx[~mask]

    def _best_over(self, X, y, w, idx, features):
        best = None
        m = self.min_samples_leaf
        n = len(idx)
        for f in features:
            xf = X[idx, f]
            order = np.argsort(xf, kind="stable")
            xs, ys, ws = xf[order], y[idx][order], w[idx][order]
            # split after position i puts rows 0..i on the left
            pos = np.arange(m - 1, n - m)
            if pos.size == 0:
                continue
            pos = pos[xs[pos] < xs[pos + 1]]
            if pos.size == 0:
                continue
            # right-hand sums come from suffix sums, not total minus prefix
            wl = np.cumsum(ws)[pos]
            sl = np.cumsum(ws * ys)[pos]
            wr = np.cumsum(ws[::-1])[::-1][pos + 1]
            sr = np.cumsum((ws * ys)[::-1])[::-1][pos + 1]
            with np.errstate(divide="ignore", invalid="ignore"):
                ml = np.where(wl > 0, sl / wl, 0.0)
                mr = np.where(wr > 0, sr / wr, 0.0)
            if self.criterion == "gini":
                cost = wl * ml * (1.0 - ml) + wr * mr * (1.0 - mr)
            else:
                wy2 = ws * ys * ys
                ql = np.cumsum(wy2)[pos]
                qr = np.cumsum(wy2[::-1])[::-1][pos + 1]
                cost = (ql - sl * ml) + (qr - sr * mr)
            j = int(np.argmin(cost))
            if best is None or cost[j] < best[0]:
                p = pos[j]
                best = (float(cost[j]), int(f), float((xs[p] + xs[p + 1]) / 2.0))
        return best

    # inference

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.asarray(X, dtype=float)
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        node = np.zeros(len(X), dtype=int)
        rows = np.arange(len(X))
        active = feature[node] != LEAF
        while active.any():
            a = rows[active]
            f = feature[node[a]]
            go_left = X[a, f] <= threshold[node[a]]
            node[a] = np.where(go_left, left[node[a]], right[node[a]])
            active = feature[node] != LEAF
        return node

    def predict_value(self, X) -> np.ndarray:
        return np.asarray(self.value)[self.apply(X)]

    def predict(self, X) -> np.ndarray:
        """Class labels; a leaf at exactly 0.5 votes 0."""
        return (self.predict_value(X) > 0.5).astype(int)

    @property
    def depth(self) -> int:
        depths = {0: 0}
        for node in range(len(self.feature)):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return max(depths.values())

    # serialisation

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "feature": list(self.feature),
            "threshold": list(self.threshold),
            "left": list(self.left),
            "right": list(self.right),
            "value": list(self.value),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        tree = cls(criterion=d["criterion"])
        tree.feature = [int(v) for v in d["feature"]]
        tree.threshold = [float(v) for v in d["threshold"]]
        tree.left = [int(v) for v in d["left"]]
        tree.right = [int(v) for v in d["right"]]
        tree.value = [float(v) for v in d["value"]]
        return tree
