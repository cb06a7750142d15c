from __future__ import annotations

import numpy as np


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


class LogisticRegression:
    """Binary logistic regression trained by full-batch gradient descent.

    Minimises mean cross-entropy plus ``l2/2 * ||w||^2`` (intercept not
    penalised), starting from all-zero weights.
    """

    kind = "LR"

    def __init__(self, learning_rate: float = 0.1, l2: float = 1e-4, epochs: int = 500):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if l2 < 0:
            raise ValueError("l2 must be non-negative")
        self.learning_rate = learning_rate
        self.l2 = l2
        self.epochs = int(epochs)

    def fit(self, X, y) -> "LogisticRegression":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n, d = X.shape
        w = np.zeros(d)
        b = 0.0
        self.loss_history_ = []
        for _ in range(self.epochs):
            z = X @ w + b
            p = sigmoid(z)
            self.loss_history_.append(
                float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * self.l2 * np.dot(w, w))
            )
            err = p - y
            w = w - self.learning_rate * (X.T @ err / n + self.l2 * w)
            b = b - self.learning_rate * float(err.mean())
        self.coef_ = w
        self.intercept_ = b
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)

    def to_dict(self) -> dict:
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_}

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticRegression":
        model = cls()
        model.coef_ = np.asarray(d["coef"], dtype=float)
        model.intercept_ = float(d["intercept"])
        return model
