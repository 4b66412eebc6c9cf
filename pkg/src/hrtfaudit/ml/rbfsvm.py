"""One-vs-rest RBF-kernel SVM trained with SMO (maximal violating pair)."""

from dataclasses import dataclass

import numpy as np

from .._accel import smo_solve
from ..errors import DataError


@dataclass
class KernelSvmModel:
    support: np.ndarray  # training rows [n x d]
    dual_coef: np.ndarray  # [n_classes x n] = alpha * y, within [-C, C]
    biases: np.ndarray
    gamma: float
    c_reg: float
    converged: bool


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :]
          - 2.0 * (A @ B.T))
    return np.exp(-gamma * np.maximum(sq, 0.0))


def default_gamma(X) -> float:
    """1 / (n_features * mean per-feature variance of the training data)."""
    var = float(np.mean(np.var(X, axis=0)))
    if var <= 0.0:
        var = 1.0
    return 1.0 / (X.shape[1] * var)


def train_rbf_svm(X, y, n_classes: int, c_reg: float = 1.0,
                  gamma: float | None = None, tol: float = 1e-4,
                  max_iter: int = 200000, seed: int = 0) -> KernelSvmModel:
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(X) != len(y) or len(y) == 0:
        raise DataError("bad training data shapes")
    if gamma is None:
        gamma = default_gamma(X)
    K = rbf_kernel(X, X, gamma)
    n = len(y)
    dual = np.zeros((n_classes, n))
    biases = np.zeros(n_classes)
    converged = True
    for c in range(n_classes):
        y_signed = np.where(y == c, 1.0, -1.0)
        alpha, b, gap, _ = smo_solve(K, y_signed, c_reg, tol, max_iter)
        dual[c] = alpha * y_signed
        biases[c] = b
        converged &= bool(gap < tol)
    return KernelSvmModel(X, dual, biases, gamma, c_reg, converged)


def decision_values_rbf(model: KernelSvmModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[1] != model.support.shape[1]:
        raise DataError(f"expected {model.support.shape[1]} features, "
                        f"got {X.shape[1]}")
    K = rbf_kernel(X, model.support, model.gamma)
    return K @ model.dual_coef.T + model.biases


def predict_rbf_svm(model: KernelSvmModel, X) -> np.ndarray:
    return np.argmax(decision_values_rbf(model, X), axis=1)
