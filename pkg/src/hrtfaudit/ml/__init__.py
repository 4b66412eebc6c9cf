"""Classical classifiers and evaluation machinery."""

import numpy as np

from ..errors import DataError
from .cv import accuracy, confusion_matrix, grouped_kfold
from .gbt import GbtModel, predict_gbt, train_gbt
from .linsvm import LinearSvmModel, predict_linear_svm, train_linear_svm
from .rbfsvm import (KernelSvmModel, default_gamma, predict_rbf_svm,
                     train_rbf_svm)
from .tree import TreeModel, predict_tree, train_cart

__all__ = [
    "GbtModel", "KernelSvmModel", "LinearSvmModel", "TreeModel",
    "accuracy", "confusion_matrix", "default_gamma", "feature_importance",
    "grouped_kfold", "predict", "train_cart", "train_gbt",
    "train_linear_svm", "train_rbf_svm",
]


def predict(model, X) -> np.ndarray:
    """Class labels for any trained model type."""
    if isinstance(model, TreeModel):
        return predict_tree(model, X)
    if isinstance(model, GbtModel):
        return predict_gbt(model, X)
    if isinstance(model, LinearSvmModel):
        return predict_linear_svm(model, X)
    if isinstance(model, KernelSvmModel):
        return predict_rbf_svm(model, X)
    raise DataError(f"unknown model type {type(model).__name__}")


def feature_importance(model) -> np.ndarray:
    """Per-feature impurity reduction, normalised to sum to 1.

    All-zero when the model never split.
    """
    if isinstance(model, (TreeModel, GbtModel)):
        raw = model.importance_raw
    else:
        raise DataError(f"no feature importance for {type(model).__name__}")
    total = float(np.sum(raw))
    if total <= 0.0:
        return np.zeros_like(raw)
    return raw / total
