"""CART decision tree with exhaustive Gini split search."""

from dataclasses import dataclass, field

import numpy as np

from .._accel import best_split_gini
from ..errors import DataError


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    proba: np.ndarray | None = None  # class probabilities at a leaf

    @property
    def is_leaf(self) -> bool:
        return self.proba is not None


@dataclass
class TreeModel:
    root: TreeNode
    n_classes: int
    n_features: int
    max_depth: int
    min_samples_leaf: int
    importance_raw: np.ndarray = field(default=None)  # unnormalised


def _gini_weighted(y, n_classes):
    counts = np.bincount(y, minlength=n_classes).astype(float)
    n = len(y)
    return n - float(np.sum(counts * counts)) / n  # n * gini


def _grow(X, y, n_classes, depth, max_depth, min_leaf, importance):
    n = len(y)
    counts = np.bincount(y, minlength=n_classes).astype(float)
    if depth >= max_depth or n < 2 * min_leaf or np.count_nonzero(counts) < 2:
        return TreeNode(proba=counts / n)
    feat, thr, child_score = best_split_gini(X, y, n_classes, min_leaf)
    if feat < 0:
        return TreeNode(proba=counts / n)
    parent_score = _gini_weighted(y, n_classes)
    decrease = parent_score - child_score
    if decrease <= 0.0:
        return TreeNode(proba=counts / n)
    importance[feat] += decrease
    mask = X[:, feat] <= thr
    left = _grow(X[mask], y[mask], n_classes, depth + 1, max_depth,
                 min_leaf, importance)
    right = _grow(X[~mask], y[~mask], n_classes, depth + 1, max_depth,
                  min_leaf, importance)
    return TreeNode(feature=feat, threshold=thr, left=left, right=right)


def train_cart(X, y, n_classes: int, max_depth: int = 12,
               min_samples_leaf: int = 1, seed: int = 0) -> TreeModel:
    """Greedy CART; split search is exhaustive over features x midpoints.

    Deterministic: the seed is accepted for interface symmetry with the
    other trainers but the algorithm itself has no random choices.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(X) != len(y) or len(y) == 0:
        raise DataError("bad training data shapes")
    importance = np.zeros(X.shape[1])
    root = _grow(X, y, n_classes, 0, max_depth, min_samples_leaf, importance)
    return TreeModel(root, n_classes, X.shape[1], max_depth,
                     min_samples_leaf, importance)


def predict_proba_tree(model: TreeModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[1] != model.n_features:
        raise DataError(f"expected {model.n_features} features, "
                        f"got {X.shape[1]}")
    out = np.empty((len(X), model.n_classes))
    stack = [(model.root, np.arange(len(X)))]
    while stack:
        node, idx = stack.pop()
        if node.is_leaf:
            out[idx] = node.proba
        else:
            mask = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
    return out


def predict_tree(model: TreeModel, X) -> np.ndarray:
    return np.argmax(predict_proba_tree(model, X), axis=1)
