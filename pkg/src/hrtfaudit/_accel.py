"""Hot inner loops, JIT-compiled with numba when available.

Every kernel has a pure-numpy twin so the package works without numba.
Set HRTFAUDIT_NO_NUMBA=1 (or install without numba) to force the numpy
path; ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

import numpy as np


def _want_numba() -> bool:
    flag = os.environ.get("HRTFAUDIT_NO_NUMBA", "").strip().lower()
    if flag not in ("", "0", "false"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _want_numba()


# ---------------------------------------------------------------------------
# polyphase resampling
# ---------------------------------------------------------------------------

def _polyphase_np(x, h, up, down, n_out):
    """y[n] = up * sum_q x[q] * h[n*down + c - up*q], c = filter centre."""
    c = (len(h) - 1) // 2
    nh = len(h)
    nx = len(x)
    y = np.zeros(n_out)
    for n in range(n_out):
        u = n * down + c
        q_lo = max(0, -(-(u - nh + 1) // up))  # ceil((u - nh + 1) / up)
        q_hi = min(u // up, nx - 1)
        if q_hi < q_lo:
            continue
        q = np.arange(q_lo, q_hi + 1)
        y[n] = up * np.dot(x[q_lo:q_hi + 1], h[u - up * q])
    return y


def _polyphase_loop(x, h, up, down, n_out):
    c = (len(h) - 1) // 2
    nh = len(h)
    nx = len(x)
    y = np.zeros(n_out)
    for n in range(n_out):
        u = n * down + c
        q_lo = (u - nh + 1 + up - 1) // up
        if q_lo < 0:
            q_lo = 0
        q_hi = u // up
        if q_hi > nx - 1:
            q_hi = nx - 1
        acc = 0.0
        for q in range(q_lo, q_hi + 1):
            acc += x[q] * h[u - up * q]
        y[n] = up * acc
    return y


# ---------------------------------------------------------------------------
# exhaustive split search (classification / Gini)
# ---------------------------------------------------------------------------

def _best_split_gini_np(X, y, n_classes, min_leaf):
    """Returns (feature, threshold, n*weighted_child_gini); feature=-1 if none.

    Thresholds are midpoints of consecutive distinct sorted values.  Ties
    resolve to the lowest feature index, then the lowest threshold.
    """
    n, d = X.shape
    best_score = np.inf
    best_feat = -1
    best_thr = 0.0
    if n < 2:
        return best_feat, best_thr, best_score
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    total = np.sum(onehot, axis=0)
    nl = np.arange(1, n, dtype=float)
    nr = n - nl
    for j in range(d):
        col = X[:, j]
        order = np.argsort(col, kind="mergesort")
        cs = col[order]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        valid = (cs[1:] > cs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
        if not valid.any():
            continue
        right = total - left
        score = (nl - np.sum(left * left, axis=1) / nl) \
            + (nr - np.sum(right * right, axis=1) / nr)
        score = np.where(valid, score, np.inf)
        i = int(np.argmin(score))
        if score[i] < best_score:
            best_score = float(score[i])
            best_feat = j
            best_thr = 0.5 * (cs[i] + cs[i + 1])
    return best_feat, best_thr, best_score


def _best_split_gini_loop(X, y, n_classes, min_leaf):
    n, d = X.shape
    total = np.zeros(n_classes)
    for i in range(n):
        total[y[i]] += 1.0
    best_score = np.inf
    best_feat = -1
    best_thr = 0.0
    left = np.zeros(n_classes)
    for j in range(d):
        col = X[:, j].copy()
        order = np.argsort(col)
        for k in range(n_classes):
            left[k] = 0.0
        nl = 0
        for i in range(n - 1):
            left[y[order[i]]] += 1.0
            nl += 1
            v0 = col[order[i]]
            v1 = col[order[i + 1]]
            if v1 <= v0:
                continue
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            sl = 0.0
            sr = 0.0
            for k in range(n_classes):
                lc = left[k]
                rc = total[k] - lc
                sl += lc * lc
                sr += rc * rc
            score = (nl - sl / nl) + (nr - sr / nr)
            if score < best_score:
                best_score = score
                best_feat = j
                best_thr = 0.5 * (v0 + v1)
    return best_feat, best_thr, best_score


# ---------------------------------------------------------------------------
# exhaustive split search (regression / SSE reduction, for boosting)
# ---------------------------------------------------------------------------

def _best_split_sse_np(X, r, min_leaf):
    """Returns (feature, threshold, sse_gain); gain = parent SSE - child SSE."""
    n, d = X.shape
    s_tot = float(np.sum(r))
    base = s_tot * s_tot / n
    best_gain = 0.0
    best_feat = -1
    best_thr = 0.0
    nl = np.arange(1, n, dtype=float)
    nr = n - nl
    for j in range(d):
        col = X[:, j]
        order = np.argsort(col, kind="mergesort")
        cs = col[order]
        sl = np.cumsum(r[order])[:-1]
        valid = (cs[1:] > cs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
        if not valid.any():
            continue
        sr = s_tot - sl
        gain = sl * sl / nl + sr * sr / nr - base
        gain = np.where(valid, gain, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > best_gain:
            best_gain = float(gain[i])
            best_feat = j
            best_thr = 0.5 * (cs[i] + cs[i + 1])
    return best_feat, best_thr, best_gain


def _best_split_sse_loop(X, r, min_leaf):
    n, d = X.shape
    s_tot = 0.0
    for i in range(n):
        s_tot += r[i]
    base = s_tot * s_tot / n
    best_gain = 0.0
    best_feat = -1
    best_thr = 0.0
    for j in range(d):
        col = X[:, j].copy()
        order = np.argsort(col)
        sl = 0.0
        for i in range(n - 1):
            sl += r[order[i]]
            v0 = col[order[i]]
            v1 = col[order[i + 1]]
            if v1 <= v0:
                continue
            nl = i + 1
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            sr = s_tot - sl
            gain = sl * sl / nl + sr * sr / nr - base
            if gain > best_gain:
                best_gain = gain
                best_feat = j
                best_thr = 0.5 * (v0 + v1)
    return best_feat, best_thr, best_gain


# ---------------------------------------------------------------------------
# dual coordinate descent epoch (L2-regularised L1-hinge linear SVM)
# ---------------------------------------------------------------------------

def _cd_epoch_loop(X, y, alpha, w, qdiag, c_reg, order):
    """One pass over `order`; updates alpha/w in place.

    Returns the maximal absolute projected gradient seen this epoch.
    """
    max_pg = 0.0
    n_feat = X.shape[1]
    for t in range(len(order)):
        i = order[t]
        g = 0.0
        for k in range(n_feat):
            g += X[i, k] * w[k]
        g = y[i] * g - 1.0
        a = alpha[i]
        if a <= 0.0:
            pg = g if g < 0.0 else 0.0
        elif a >= c_reg:
            pg = g if g > 0.0 else 0.0
        else:
            pg = g
        if abs(pg) > max_pg:
            max_pg = abs(pg)
        if pg != 0.0:
            new = a - g / qdiag[i]
            if new < 0.0:
                new = 0.0
            elif new > c_reg:
                new = c_reg
            d = new - a
            if d != 0.0:
                alpha[i] = new
                dy = d * y[i]
                for k in range(n_feat):
                    w[k] += dy * X[i, k]
    return max_pg


def _cd_epoch_np(X, y, alpha, w, qdiag, c_reg, order):
    max_pg = 0.0
    for i in order:
        g = y[i] * float(X[i] @ w) - 1.0
        a = alpha[i]
        if a <= 0.0:
            pg = min(g, 0.0)
        elif a >= c_reg:
            pg = max(g, 0.0)
        else:
            pg = g
        max_pg = max(max_pg, abs(pg))
        if pg != 0.0:
            new = min(max(a - g / qdiag[i], 0.0), c_reg)
            d = new - a
            if d != 0.0:
                alpha[i] = new
                w += (d * y[i]) * X[i]
    return max_pg


# ---------------------------------------------------------------------------
# SMO on a precomputed kernel matrix (binary, [0, C] box)
# ---------------------------------------------------------------------------

def _smo_solve_loop(K, y, c_reg, tol, max_iter):
    """Maximal-violating-pair SMO for min 1/2 a'Qa - e'a, 0 <= a <= C.

    Returns (alpha, bias, final_gap, n_iterations).
    """
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective at alpha = 0
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        # working pair: i maximises -y*G over I_up, j minimises over I_low
        m_val = -np.inf
        m_idx = -1
        mm_val = np.inf
        mm_idx = -1
        for t in range(n):
            v = -y[t] * grad[t]
            up = (y[t] > 0 and alpha[t] < c_reg) or (y[t] < 0 and alpha[t] > 0)
            low = (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < c_reg)
            if up and v > m_val:
                m_val = v
                m_idx = t
            if low and v < mm_val:
                mm_val = v
                mm_idx = t
        gap = m_val - mm_val
        if gap < tol or m_idx < 0 or mm_idx < 0:
            break
        i = m_idx
        j = mm_idx
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 1e-12:
            quad = 1e-12
        # feasible direction: alpha_i += y_i*s, alpha_j -= y_j*s with s >= 0
        s = gap / quad
        s_max_i = c_reg - alpha[i] if y[i] > 0 else alpha[i]
        s_max_j = alpha[j] if y[j] > 0 else c_reg - alpha[j]
        if s > s_max_i:
            s = s_max_i
        if s > s_max_j:
            s = s_max_j
        alpha[i] += y[i] * s
        alpha[j] -= y[j] * s
        for t in range(n):
            grad[t] += y[t] * s * (K[t, i] - K[t, j])
    # bias from free support vectors, else midpoint of the violating bounds
    b_sum = 0.0
    b_cnt = 0
    for t in range(n):
        if 1e-8 < alpha[t] < c_reg - 1e-8:
            b_sum += -y[t] * grad[t]
            b_cnt += 1
    if b_cnt > 0:
        b = b_sum / b_cnt
    else:
        m_val = -np.inf
        mm_val = np.inf
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < c_reg) or (y[t] < 0 and alpha[t] > 0):
                if v > m_val:
                    m_val = v
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < c_reg):
                if v < mm_val:
                    mm_val = v
        b = 0.5 * (m_val + mm_val)
    return alpha, b, gap, it


def _smo_solve_np(K, y, c_reg, tol, max_iter):
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    gap = np.inf
    it = 0
    pos = y > 0
    for it in range(1, max_iter + 1):
        v = -y * grad
        up = (pos & (alpha < c_reg)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < c_reg))
        if not up.any() or not low.any():
            break
        vu = np.where(up, v, -np.inf)
        vl = np.where(low, v, np.inf)
        i = int(np.argmax(vu))
        j = int(np.argmin(vl))
        gap = vu[i] - vl[j]
        if gap < tol:
            break
        quad = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
        s = gap / quad
        s_max_i = c_reg - alpha[i] if y[i] > 0 else alpha[i]
        s_max_j = alpha[j] if y[j] > 0 else c_reg - alpha[j]
        s = min(s, s_max_i, s_max_j)
        alpha[i] += y[i] * s
        alpha[j] -= y[j] * s
        grad += y * s * (K[:, i] - K[:, j])
    free = (alpha > 1e-8) & (alpha < c_reg - 1e-8)
    if free.any():
        b = float(np.mean((-y * grad)[free]))
    else:
        v = -y * grad
        vu = np.where((pos & (alpha < c_reg)) | (~pos & (alpha > 0)), v, -np.inf)
        vl = np.where((pos & (alpha > 0)) | (~pos & (alpha < c_reg)), v, np.inf)
        b = 0.5 * (float(np.max(vu)) + float(np.min(vl)))
    return alpha, b, gap, it


if NUMBA_ENABLED:
    from numba import njit

    polyphase = njit(cache=True)(_polyphase_loop)
    best_split_gini = njit(cache=True)(_best_split_gini_loop)
    best_split_sse = njit(cache=True)(_best_split_sse_loop)
    cd_epoch = njit(cache=True)(_cd_epoch_loop)
    smo_solve = njit(cache=True)(_smo_solve_loop)
else:
    polyphase = _polyphase_np
    best_split_gini = _best_split_gini_np
    best_split_sse = _best_split_sse_np
    cd_epoch = _cd_epoch_np
    smo_solve = _smo_solve_np
