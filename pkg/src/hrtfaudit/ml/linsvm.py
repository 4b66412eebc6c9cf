"""One-vs-rest linear SVM via dual coordinate descent.

L2-regularised L1-hinge binary problems; a constant column is appended
to carry the bias (regularised, as in liblinear's -B option).  Features
are expected pre-standardised by the caller.
"""

from dataclasses import dataclass

import numpy as np

from .._accel import cd_epoch
from ..errors import DataError


@dataclass
class LinearSvmModel:
    weights: np.ndarray  # [n_classes x n_features]
    biases: np.ndarray  # [n_classes]
    c_reg: float
    converged: bool
    n_epochs: int


def _train_binary(X, y_signed, c_reg, max_iter, tol, rng):
    n = len(y_signed)
    aug = np.hstack([X, np.ones((n, 1))])
    qdiag = np.einsum("ij,ij->i", aug, aug)
    qdiag = np.maximum(qdiag, 1e-12)
    alpha = np.zeros(n)
    w = np.zeros(aug.shape[1])
    converged = False
    epoch = 0
    for epoch in range(1, max_iter + 1):
        order = rng.permutation(n)
        max_pg = cd_epoch(aug, y_signed, alpha, w, qdiag, c_reg, order)
        if max_pg < tol:
            converged = True
            break
    return w[:-1], w[-1], converged, epoch


def train_linear_svm(X, y, n_classes: int, c_reg: float = 1.0,
                     max_iter: int = 1000, tol: float = 1e-4,
                     seed: int = 0) -> LinearSvmModel:
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(X) != len(y) or len(y) == 0:
        raise DataError("bad training data shapes")
    weights = np.zeros((n_classes, X.shape[1]))
    biases = np.zeros(n_classes)
    all_converged = True
    last_epoch = 0
    for c in range(n_classes):
        rng = np.random.default_rng((seed, c))
        y_signed = np.where(y == c, 1.0, -1.0)
        w, b, conv, epoch = _train_binary(X, y_signed, c_reg, max_iter,
                                          tol, rng)
        weights[c] = w
        biases[c] = b
        all_converged &= conv
        last_epoch = max(last_epoch, epoch)
    return LinearSvmModel(weights, biases, c_reg, all_converged, last_epoch)


def decision_values_linear(model: LinearSvmModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[1] != model.weights.shape[1]:
        raise DataError(f"expected {model.weights.shape[1]} features, "
                        f"got {X.shape[1]}")
    return X @ model.weights.T + model.biases


def predict_linear_svm(model: LinearSvmModel, X) -> np.ndarray:
    return np.argmax(decision_values_linear(model, X), axis=1)
