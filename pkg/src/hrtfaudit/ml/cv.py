"""Grouped stratified k-fold, accuracy, confusion matrices."""

import numpy as np

from ..errors import DataError, UsageError


def grouped_kfold(groups, labels, k: int, seed: int = 0) -> list[np.ndarray]:
    """k disjoint test-index sets; every group lands in exactly one fold.

    Greedy group-level stratification: groups are shuffled with the seed
    and processed class by class (shuffled order within a class); each is
    assigned to the fold with the smallest current row count of that
    group's class; ties go to the fold with fewer rows overall, then to
    the lower fold id. Class-by-class processing keeps fold totals even:
    a class's surplus groups always land on the currently smallest folds.
    """
    if k < 2:
        raise UsageError("k must be >= 2")
    groups = np.asarray(groups)
    labels = np.asarray(labels)
    if len(groups) != len(labels):
        raise DataError("groups/labels length mismatch")
    uniq, first = np.unique(groups, return_index=True)
    # keep first-appearance order so the shuffle alone decides assignment
    uniq = uniq[np.argsort(first)]
    if len(uniq) < k:
        raise UsageError(f"fewer groups ({len(uniq)}) than folds ({k})")
    group_rows = {g: np.nonzero(groups == g)[0] for g in uniq}
    for g in uniq:
        if len(np.unique(labels[group_rows[g]])) != 1:
            raise DataError(f"group {g!r} spans multiple labels")
    classes = np.unique(labels)
    class_index = {c: i for i, c in enumerate(classes)}

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(uniq))
    group_class = np.array([class_index[labels[group_rows[uniq[gi]][0]]]
                            for gi in order])
    order = order[np.argsort(group_class, kind="stable")]
    class_counts = np.zeros((k, len(classes)), dtype=int)
    totals = np.zeros(k, dtype=int)
    folds = [[] for _ in range(k)]
    for gi in order:
        g = uniq[gi]
        rows = group_rows[g]
        ci = class_index[labels[rows[0]]]
        fold = min(range(k),
                   key=lambda f: (class_counts[f, ci], totals[f], f))
        folds[fold].extend(rows.tolist())
        class_counts[fold, ci] += len(rows)
        totals[fold] += len(rows)
    return [np.sort(np.asarray(f, dtype=int)) for f in folds]


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) == 0 or len(y_true) != len(y_pred):
        raise DataError("accuracy: empty or mismatched inputs")
    return float(np.mean(y_true == y_pred))


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if np.any((y_true < 0) | (y_true >= n_classes)) \
            or np.any((y_pred < 0) | (y_pred >= n_classes)):
        raise DataError("label out of range")
    cm = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm
