"""Feed-forward network: tanh hidden layers, one sigmoid output, cross-entropy loss."""

from __future__ import annotations

import numpy as np


def init_params(layer_sizes, rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
    """Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    params = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        W = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = rng.uniform(-bound, bound, size=fan_out)
        params.append((W, b))
    return params


def forward(params, X):
    """Return (output logits, activations per layer including the input)."""
    acts = [np.asarray(X, dtype=float)]
    a = acts[0]
    for W, b in params[:-1]:
        a = np.tanh(a @ W.T + b)
        acts.append(a)
    W, b = params[-1]
    return (a @ W.T + b)[:, 0], acts


def loss(params, X, y) -> float:
    z, _ = forward(params, X)
    return float(np.mean(np.logaddexp(0.0, z) - np.asarray(y, float) * z))


def loss_and_grad(params, X, y):
    """Mean cross-entropy and its gradient by backpropagation."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    z, acts = forward(params, X)
    value = float(np.mean(np.logaddexp(0.0, z) - y * z))
    p = 0.5 * (1.0 + np.tanh(0.5 * z))
    delta = ((p - y) / n)[:, None]
    grads = [None] * len(params)
    for layer in range(len(params) - 1, -1, -1):
        W, _ = params[layer]
        a_prev = acts[layer]
        grads[layer] = (delta.T @ a_prev, delta.sum(axis=0))
        if layer > 0:
            delta = (delta @ W) * (1.0 - a_prev ** 2)
    return value, grads


def numeric_gradient(params, X, y, step: float = 1e-5):
    """Central finite differences of ``loss`` for every weight and bias."""
    grads = []
    for W, b in params:
        gW = np.zeros_like(W)
        gb = np.zeros_like(b)
        for arr, g in ((W, gW), (b, gb)):
            for idx in np.ndindex(arr.shape):
                orig = arr[idx]
                arr[idx] = orig + step
                up = loss(params, X, y)
                arr[idx] = orig - step
                down = loss(params, X, y)
                arr[idx] = orig
                g[idx] = (up - down) / (2.0 * step)
        grads.append((gW, gb))
    return grads


def max_relative_error(analytic, numeric, floor: float = 1e-8) -> float:
    """max |a - n| / max(|a|, |n|, floor) over all parameters."""
    worst = 0.0
    for (aW, ab), (nW, nb) in zip(analytic, numeric):
        for a, n in ((aW, nW), (ab, nb)):
            denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
            worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


class MLPClassifier:
    kind = "MLP"

    def __init__(
        self,
        hidden: tuple[int, ...] | list[int] = (16,),
        learning_rate: float = 0.05,
        epochs: int = 2000,
        seed: int = 0,
    ):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if isinstance(hidden, int):
            hidden = (hidden,)
        if not hidden or any(h < 1 for h in hidden):
            raise ValueError("hidden layers need at least one unit each")
        self.hidden = tuple(int(h) for h in hidden)
        self.learning_rate = learning_rate
        self.epochs = int(epochs)
        self.seed = int(seed)

    def init(self, n_features: int):
        rng = np.random.default_rng(self.seed)
        return init_params((n_features, *self.hidden, 1), rng)

    def fit(self, X, y) -> "MLPClassifier":
        X = np.asarray(X, dtype=float)
        params = self.init(X.shape[1])
        self.loss_history_ = []
        for _ in range(self.epochs):
            value, grads = loss_and_grad(params, X, y)
            self.loss_history_.append(value)
            params = [
                (W - self.learning_rate * gW, b - self.learning_rate * gb)
                for (W, b), (gW, gb) in zip(params, grads)
            ]
        self.params_ = params
        self.final_loss_ = loss(params, X, y)
        return self

    def decision_function(self, X) -> np.ndarray:
        return forward(self.params_, X)[0]

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)

    def to_dict(self) -> dict:
        return {
            "hidden": list(self.hidden),
            "layers": [{"W": W.tolist(), "b": b.tolist()} for W, b in self.params_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MLPClassifier":
        model = cls(hidden=d["hidden"])
        model.params_ = [
            (np.asarray(layer["W"], dtype=float), np.asarray(layer["b"], dtype=float))
            for layer in d["layers"]
        ]
        return model


def mlp_numeric_gradient_check(X, y, hidden=(4,), seed: int = 0, step: float = 1e-5, params=None) -> float:
    """Max relative error between backprop and central differences."""
    X = np.asarray(X, dtype=float)
    if params is None:
        params = MLPClassifier(hidden=hidden, seed=seed).init(X.shape[1])
    params = [(W.astype(float).copy(), b.astype(float).copy()) for W, b in params]
    _, analytic = loss_and_grad(params, X, y)
    numeric = numeric_gradient(params, X, y, step)
    return max_relative_error(analytic, numeric)
