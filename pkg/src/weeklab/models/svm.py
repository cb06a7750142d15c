"""Soft-margin kernel SVM trained with SMO.

Each step optimises the maximal violating pair of the dual
    min 1/2 a'Qa - sum(a),  y'a = 0,  0 <= a_i <= C,   Q_ij = y_i y_j K_ij
analytically, and training stops once the violation gap drops below
``tol``. That gap bounds every KKT complementarity residual.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)

TAU = 1e-12


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def linear_kernel(A, B, gamma: float = 0.0) -> np.ndarray:
    return np.asarray(A, dtype=float) @ np.asarray(B, dtype=float).T


KERNELS = {"rbf": rbf_kernel, "linear": linear_kernel}


def smo(K: np.ndarray, y: np.ndarray, C: float, tol: float, max_iter: int):
    """Solve the dual for labels y in {-1, +1}; returns (alpha, b, G, iterations)."""
    n = len(y)
    alpha = np.zeros(n)
    G = -np.ones(n)
    QD = np.diag(K).copy()
    it = 0
    while it < max_iter:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        score = -y * G
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        j = int(np.flatnonzero(low)[np.argmin(score[low])])
        if score[i] - score[j] < tol:
            break
        it += 1
        Qi = y[i] * y * K[i]
        Qj = y[j] * y * K[j]
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(QD[i] + QD[j] + 2.0 * Qi[j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            elif alpha[j] > C:
                alpha[j] = C
                alpha[i] = C + diff
        else:
            quad = max(QD[i] + QD[j] - 2.0 * Qi[j], TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            elif alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = total
        G += Qi * (alpha[i] - ai) + Qj * (alpha[j] - aj)
    else:
        logger.warning("SMO stopped after %d iterations without reaching tol=%g", max_iter, tol)

    score = -y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        b = float(score[free].mean())
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        hi = score[up].max() if up.any() else score.max()
        lo = score[low].min() if low.any() else score.min()
        b = float((hi + lo) / 2.0)
    return alpha, b, G, it


def kkt_residual(alpha, G, y, b, C) -> float:
    """Largest violation of the KKT complementarity conditions.

    With margin m_i = y_i f(x_i) - 1: free multipliers need m_i = 0,
    zero ones m_i >= 0 and bounded ones m_i <= 0.
    """
    margin = G + y * b
    res = np.where(
        alpha <= 0,
        np.maximum(0.0, -margin),
        np.where(alpha >= C, np.maximum(0.0, margin), np.abs(margin)),
    )
    return float(res.max()) if len(res) else 0.0


class SVMClassifier:
    kind = "SVM"

    def __init__(
        self,
        C: float = 1.0,
        kernel: str = "rbf",
        gamma: float | None = None,
        tol: float = 1e-3,
        max_iter: int = 100_000,
    ):
        if C <= 0:
            raise ValueError("C must be positive")
        if kernel not in KERNELS:
            raise ValueError(f"unknown kernel {kernel!r}")
        self.C = float(C)
        self.kernel = kernel
        self.gamma = gamma
        self.tol = tol
        self.max_iter = int(max_iter)

    def fit(self, X, y) -> "SVMClassifier":
        X = np.asarray(X, dtype=float)
        ys = np.where(np.asarray(y) > 0, 1.0, -1.0)
        self.gamma_ = float(self.gamma) if self.gamma is not None else 1.0 / X.shape[1]
        K = KERNELS[self.kernel](X, X, self.gamma_)
        alpha, b, G, it = smo(K, ys, self.C, self.tol, self.max_iter)
        self.alpha_ = alpha
        self.b_ = b
        self.n_iter_ = it
        self.kkt_residual_ = kkt_residual(alpha, G, ys, b, self.C)
        sv = alpha > 0
        self.support_vectors_ = X[sv]
        self.dual_coef_ = alpha[sv] * ys[sv]
        return self

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if len(self.dual_coef_) == 0:
            return np.full(len(X), self.b_)
        K = KERNELS[self.kernel](X, self.support_vectors_, self.gamma_)
        return K @ self.dual_coef_ + self.b_

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "gamma": self.gamma_,
            "b": self.b_,
            "support_vectors": self.support_vectors_.tolist(),
            "dual_coef": self.dual_coef_.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SVMClassifier":
        model = cls(kernel=d["kernel"], gamma=d["gamma"])
        model.gamma_ = float(d["gamma"])
        model.b_ = float(d["b"])
        model.dual_coef_ = np.asarray(d["dual_coef"], dtype=float)
        sv = d["support_vectors"]
        n_cols = len(sv[0]) if sv else 0
        model.support_vectors_ = np.asarray(sv, dtype=float).reshape(len(sv), n_cols)
        return model
