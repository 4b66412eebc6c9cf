"""Linear and kernel SVM tests against brute-force and QP oracles."""

import numpy as np
import pytest

from hrtfaudit.ml import (default_gamma, predict_linear_svm, predict_rbf_svm,
                          train_linear_svm, train_rbf_svm)
from hrtfaudit.ml.linsvm import decision_values_linear
from hrtfaudit.ml.rbfsvm import decision_values_rbf, rbf_kernel


# ----------------------------------------------------------------- linear

def _blobs(seed=0, n=30, gap=6.0):
    rng = np.random.default_rng(seed)
    a = rng.normal((-gap / 2, 0), 0.5, size=(n, 2))
    b = rng.normal((gap / 2, 0), 0.5, size=(n, 2))
    X = np.vstack([a, b])
    y = np.repeat([0, 1], n)
    return X, y


def test_linear_separates_blobs():
    X, y = _blobs()
    model = train_linear_svm(X, y, 2)
    assert (predict_linear_svm(model, X) == y).mean() == 1.0
    assert model.converged


def test_linear_duplicate_rows_equivalence():
    # duplicating every row while halving C leaves the dual problem,
    # hence the decision function, unchanged
    X, y = _blobs(seed=1, n=12)
    base = train_linear_svm(X, y, 2, c_reg=1.0, tol=1e-8, max_iter=20000)
    doubled = train_linear_svm(np.vstack([X, X]), np.concatenate([y, y]), 2,
                               c_reg=0.5, tol=1e-8, max_iter=20000)
    grid = np.random.default_rng(2).normal(size=(50, 2)) * 4.0
    np.testing.assert_allclose(decision_values_linear(base, grid),
                               decision_values_linear(doubled, grid),
                               atol=1e-6)


def test_linear_1d_sign_pattern_matches_margin_grid_search():
    X = np.array([[-3.0], [-2.0], [-1.0], [1.0], [2.0], [3.0]])
    y = np.array([0, 0, 0, 1, 1, 1])
    model = train_linear_svm(X, y, 2, c_reg=100.0, tol=1e-8, max_iter=50000)
    # brute-force grid over (w, b) maximising the margin of a separator
    best = None
    ys = 2 * y - 1
    for w in np.linspace(-4, 4, 801):
        for b in np.linspace(-4, 4, 801):
            d = w * X[:, 0] + b
            if np.all(ys * d > 0):
                margin = np.min(np.abs(d)) / max(abs(w), 1e-12)
                if best is None or margin > best[0]:
                    best = (margin, w, b)
    assert best is not None
    _, w_ref, b_ref = best
    ref_signs = np.sign(w_ref * X[:, 0] + b_ref)
    got = decision_values_linear(model, X)
    # one-vs-rest: class-1 column minus class-0 column carries the sign
    signs = np.sign(got[:, 1] - got[:, 0])
    np.testing.assert_array_equal(signs, ref_signs)


def test_linear_zero_weight_feature_invariance():
    X, y = _blobs(seed=3, n=15)
    model = train_linear_svm(X, y, 2)
    X_pad = np.hstack([X, np.zeros((len(X), 1))])
    model_pad = train_linear_svm(X_pad, y, 2)
    np.testing.assert_array_equal(predict_linear_svm(model, X),
                                  predict_linear_svm(model_pad, X_pad))


def test_linear_multiclass_three_blobs():
    rng = np.random.default_rng(5)
    centers = np.array([[-5, 0], [5, 0], [0, 6]])
    X = np.vstack([rng.normal(c, 0.4, size=(20, 2)) for c in centers])
    y = np.repeat([0, 1, 2], 20)
    model = train_linear_svm(X, y, 3)
    assert (predict_linear_svm(model, X) == y).mean() == 1.0


def test_linear_deterministic_given_seed():
    X, y = _blobs(seed=6)
    a = train_linear_svm(X, y, 2, seed=9)
    b = train_linear_svm(X, y, 2, seed=9)
    np.testing.assert_array_equal(a.weights, b.weights)


# ------------------------------------------------------------------- RBF

def test_rbf_solves_xor():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([0, 0, 1, 1])
    model = train_rbf_svm(X, y, 2, gamma=1.0, c_reg=10.0)
    assert (predict_rbf_svm(model, X) == y).mean() == 1.0


def test_rbf_dual_in_box():
    X, y = _blobs(seed=7, n=10, gap=2.0)
    c = 2.5
    model = train_rbf_svm(X, y, 2, gamma=0.5, c_reg=c)
    coef = model.dual_coef
    assert np.all(coef <= c + 1e-9)
    assert np.all(coef >= -c - 1e-9)
    # equality constraint of the dual: sum of signed coefficients is zero
    assert abs(coef.sum(axis=1)).max() <= 1e-9


def _qp_oracle(X, y01, gamma, c_reg, iters=200000, lr=1e-3):
    """Projected-gradient ascent on the standard SVM dual."""
    ys = 2.0 * np.asarray(y01, dtype=float) - 1.0
    K = rbf_kernel(X, X, gamma)
    Q = np.outer(ys, ys) * K
    alpha = np.zeros(len(ys))
    for _ in range(iters):
        grad = 1.0 - Q @ alpha
        alpha = np.clip(alpha + lr * grad, 0.0, c_reg)
        # project onto the equality constraint sum(alpha * y) = 0
        for _ in range(3):
            viol = alpha @ ys
            alpha = np.clip(alpha - viol * ys / len(ys), 0.0, c_reg)
    free = (alpha > 1e-6) & (alpha < c_reg - 1e-6)
    dec0 = (alpha * ys) @ K
    if free.any():
        b = np.mean(ys[free] - dec0[free])
    else:
        b = 0.0
    return dec0 + b


def test_rbf_matches_qp_oracle_on_20_points():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(20, 2))
    y = (X[:, 0] * X[:, 1] > 0).astype(int)
    gamma, c = 0.8, 5.0
    model = train_rbf_svm(X, y, 2, gamma=gamma, c_reg=c)
    got = predict_rbf_svm(model, X)
    oracle_dec = _qp_oracle(X, y, gamma, c)
    # compare predictions away from exact ties
    sure = np.abs(oracle_dec) > 1e-3
    expect = (oracle_dec > 0).astype(int)
    np.testing.assert_array_equal(got[sure], expect[sure])


def test_rbf_gamma_to_zero_collapses_to_majority():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(30, 3))
    y = np.array([0] * 20 + [1] * 10)
    model = train_rbf_svm(X, y, 2, gamma=1e-9, c_reg=1.0)
    preds = predict_rbf_svm(model, rng.normal(size=(40, 3)))
    assert np.mean(preds == 0) >= 0.95


def test_rbf_default_gamma_scale():
    rng = np.random.default_rng(17)
    X = rng.normal(size=(50, 4))
    g = default_gamma(X)
    assert g == pytest.approx(1.0 / (4 * X.var(axis=0).mean()), rel=1e-9)


def test_rbf_multiclass_ring_blobs():
    rng = np.random.default_rng(19)
    centers = np.array([[0, 0], [4, 0], [0, 4]])
    X = np.vstack([rng.normal(c, 0.3, size=(15, 2)) for c in centers])
    y = np.repeat([0, 1, 2], 15)
    model = train_rbf_svm(X, y, 3, c_reg=10.0)
    assert (predict_rbf_svm(model, X) == y).mean() == 1.0


def test_rbf_decision_values_shape():
    X, y = _blobs(seed=21, n=8)
    model = train_rbf_svm(X, y, 2)
    vals = decision_values_rbf(model, X)
    assert vals.shape == (16, 2)
