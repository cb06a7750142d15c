from __future__ import annotations

import numpy as np


class KNNClassifier:
    """Majority vote of the k nearest training rows (Euclidean).

    Equal distances are resolved in favour of the lower training index and
    tied votes go to class 0.
    """

    kind = "KNN"

    def __init__(self, k: int = 5, chunk: int = 256):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = int(k)
        self.chunk = chunk

    def fit(self, X, y) -> "KNNClassifier":
        self.X_ = np.asarray(X, dtype=float)
        self.y_ = np.asarray(y, dtype=int)
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        k = min(self.k, len(self.y_))
        out = np.empty(len(X), dtype=int)
        for start in range(0, len(X), self.chunk):
            block = X[start:start + self.chunk]
            dist = ((block[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
            nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
            ones = self.y_[nearest].sum(axis=1)
            out[start:start + len(block)] = (2 * ones > k).astype(int)
        return out

    def to_dict(self) -> dict:
        return {"k": self.k, "X": self.X_.tolist(), "y": self.y_.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "KNNClassifier":
        model = cls(k=d["k"])
        n_cols = len(d["X"][0]) if d["X"] else 0
        model.X_ = np.asarray(d["X"], dtype=float).reshape(len(d["y"]), n_cols)
        model.y_ = np.asarray(d["y"], dtype=int)
        return model
