"""Gradient-boosted trees for multiclass softmax cross-entropy.

Each round fits one depth-limited regression tree per class to the
residual (one-hot minus softmax); leaf values are Newton steps
sum(residual) / (sum(p*(1-p)) + ridge), shrunk by the learning rate.
"""

from dataclasses import dataclass, field

import numpy as np

from .._accel import best_split_sse
from ..errors import DataError

HESSIAN_RIDGE = 1e-6
MAX_LEAF_VALUE = 10.0  # guards Newton steps in near-pure leaves


@dataclass
class RegNode:
    feature: int = -1
    threshold: float = 0.0
    left: "RegNode | None" = None
    right: "RegNode | None" = None
    value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None


@dataclass
class GbtModel:
    trees: list  # [round][class] -> RegNode
    init_scores: np.ndarray  # initial per-class log-odds
    n_classes: int
    n_features: int
    learning_rate: float
    importance_raw: np.ndarray = field(default=None)
    train_losses: np.ndarray = field(default=None)  # loss after each round


def _leaf_value(residual, hessian):
    v = float(np.sum(residual)) / (float(np.sum(hessian)) + HESSIAN_RIDGE)
    return float(np.clip(v, -MAX_LEAF_VALUE, MAX_LEAF_VALUE))


def _grow_reg(X, r, h, depth, max_depth, min_leaf, importance):
    if depth >= max_depth or len(r) < 2 * min_leaf:
        return RegNode(value=_leaf_value(r, h))
    feat, thr, gain = best_split_sse(X, r, min_leaf)
    if feat < 0 or gain <= 0.0:
        return RegNode(value=_leaf_value(r, h))
    importance[feat] += gain
    mask = X[:, feat] <= thr
    left = _grow_reg(X[mask], r[mask], h[mask], depth + 1, max_depth,
                     min_leaf, importance)
    right = _grow_reg(X[~mask], r[~mask], h[~mask], depth + 1, max_depth,
                      min_leaf, importance)
    return RegNode(feature=feat, threshold=thr, left=left, right=right)


def _eval_reg(node: RegNode, X) -> np.ndarray:
    out = np.empty(len(X))
    stack = [(node, np.arange(len(X)))]
    while stack:
        n, idx = stack.pop()
        if n.is_leaf:
            out[idx] = n.value
        else:
            mask = X[idx, n.feature] <= n.threshold
            stack.append((n.left, idx[mask]))
            stack.append((n.right, idx[~mask]))
    return out


def _softmax(scores):
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def train_gbt(X, y, n_classes: int, n_rounds: int = 200,
              learning_rate: float = 0.1, max_depth: int = 3,
              min_samples_leaf: int = 1, seed: int = 0) -> GbtModel:
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(X) != len(y) or len(y) == 0:
        raise DataError("bad training data shapes")
    n = len(y)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    priors = np.clip(onehot.mean(axis=0), 1e-12, None)
    init = np.log(priors)
    scores = np.tile(init, (n, 1))
    importance = np.zeros(X.shape[1])
    trees = []
    losses = []
    for _ in range(n_rounds):
        proba = _softmax(scores)
        round_trees = []
        for c in range(n_classes):
            residual = onehot[:, c] - proba[:, c]
            hessian = proba[:, c] * (1.0 - proba[:, c])
            tree = _grow_reg(X, residual, hessian, 0, max_depth,
                             min_samples_leaf, importance)
            scores[:, c] += learning_rate * _eval_reg(tree, X)
            round_trees.append(tree)
        trees.append(round_trees)
        proba = _softmax(scores)
        losses.append(float(-np.mean(
            np.log(np.clip(proba[np.arange(n), y], 1e-300, None)))))
    return GbtModel(trees, init, n_classes, X.shape[1], learning_rate,
                    importance, np.asarray(losses))


def predict_scores_gbt(model: GbtModel, X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=float)
    if X.shape[1] != model.n_features:
        raise DataError(f"expected {model.n_features} features, "
                        f"got {X.shape[1]}")
    scores = np.tile(model.init_scores, (len(X), 1))
    for round_trees in model.trees:
        for c, tree in enumerate(round_trees):
            scores[:, c] += model.learning_rate * _eval_reg(tree, X)
    return scores


def predict_gbt(model: GbtModel, X) -> np.ndarray:
    return np.argmax(predict_scores_gbt(model, X), axis=1)
