"""Benchmark the numba-compiled kernels against their numpy twins.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Each kernel is timed on representative workloads; the numba column shows
"n/a" when numba is unavailable or HRTFAUDIT_NO_NUMBA is set.
"""

import time

import numpy as np

from hrtfaudit import _accel
from hrtfaudit.dsp import _design_filter

REPEATS = 5


def _time(fn, *args):
    best = np.inf
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _bench_pair(name, np_fn, nb_fn, args, results):
    t_np = _time(np_fn, *args)
    if nb_fn is not None:
        nb_fn(*args)  # trigger compilation outside the timed region
        t_nb = _time(nb_fn, *args)
    else:
        t_nb = None
    results.append((name, t_np, t_nb))


def main():
    rng = np.random.default_rng(0)
    results = []
    numba_on = _accel.NUMBA_ENABLED

    up, down, h = _design_filter(96000, 44100)
    x = rng.normal(size=4096)
    n_out = len(x) * up // down
    _bench_pair("polyphase 4096 @ 96k->44.1k",
                _accel._polyphase_np,
                _accel.polyphase if numba_on else None,
                (x, h, up, down, n_out), results)

    X = rng.normal(size=(288, 1140))
    y = rng.integers(0, 10, size=288)
    _bench_pair("gini split 288x1140, 10 classes",
                _accel._best_split_gini_np,
                _accel.best_split_gini if numba_on else None,
                (X, y, 10, 1), results)

    r = rng.normal(size=288)
    _bench_pair("sse split 288x1140",
                _accel._best_split_sse_np,
                _accel.best_split_sse if numba_on else None,
                (X, r, 1), results)

    Xs = rng.normal(size=(400, 200))
    ys = np.where(rng.random(400) < 0.5, -1.0, 1.0)
    alpha = np.zeros(400)
    w = np.zeros(200)
    qdiag = np.einsum("ij,ij->i", Xs, Xs) + 1e-12
    order = rng.permutation(400)
    _bench_pair("svm cd epoch 400x200",
                lambda *a: _accel._cd_epoch_np(Xs, ys, alpha.copy(),
                                               w.copy(), qdiag, 1.0, order),
                (lambda *a: _accel.cd_epoch(Xs, ys, alpha.copy(), w.copy(),
                                            qdiag, 1.0, order))
                if numba_on else None,
                (), results)

    G = rng.normal(size=(300, 40))
    K = G @ G.T
    yk = np.where(rng.random(300) < 0.5, -1.0, 1.0)
    _bench_pair("smo solve n=300",
                _accel._smo_solve_np,
                _accel.smo_solve if numba_on else None,
                (K, yk, 1.0, 1e-4, 2000), results)

    print(f"numba enabled: {numba_on}\n")
    print(f"{'kernel':<34} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, t_np, t_nb in results:
        if t_nb is None:
            print(f"{name:<34} {t_np * 1e3:>8.2f}ms {'n/a':>10} {'':>8}")
        else:
            print(f"{name:<34} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
                  f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
