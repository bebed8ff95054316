#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the four hot kernels on detector-shaped workloads plus an end-to-end
fit/score of each detector on simulated data. Usage:

    python benchmarks/bench_kernels.py [--full]

--full bumps the problem sizes to the desk-scale experiment budget
(4000 training samples); the default sizes finish in well under a minute.
"""

import argparse
import time

import numpy as np

from radiotwin import dataset as ds
from radiotwin.detectors import make_detector
from radiotwin.kernels import _python as pyk
from radiotwin.scenario import ScenarioConfig

try:
    from radiotwin.kernels import _native as natk
except ImportError:
    natk = None


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n, d, rows):
    rng = np.random.default_rng(0)
    a = np.ascontiguousarray(rng.normal(size=(n, d)))
    b = np.ascontiguousarray(rng.normal(size=(n // 2, d)))
    gram = np.exp(-0.05 * pyk.pairwise_sq_dists(a[: n // 2], a[: n // 2]))
    gram = np.ascontiguousarray(gram)
    box = 1.0 / (0.5 * len(gram))

    cases = [
        (f"pairwise_sq_dists {n}x{n//2}x{d}",
         lambda impl: impl.pairwise_sq_dists(a, b)),
        (f"knn_brute n={n} k=100",
         lambda impl: impl.knn_brute(a, a, 100, True)),
        (f"min_sq_dist {n//2} refs, {n} queries",
         lambda impl: impl.min_sq_dist(b, a)),
        (f"smo_one_class n={len(gram)} nu=0.5",
         lambda impl: impl.smo_one_class(gram, box, 1e-3, 10_000_000)),
    ]
    for label, call in cases:
        t_py = timeit(lambda: call(pyk))
        if natk is None:
            rows.append((label, t_py, None))
        else:
            rows.append((label, t_py, timeit(lambda: call(natk))))


def bench_detectors(n_train, n_test, rows):
    cfg = ScenarioConfig(sigma_shadow=2.0, master_seed=0)
    data = ds.generate(cfg, n_train, n_test, 0.5).with_sorting(True)
    train, test = data.train_matrix(), data.test_matrix()

    import radiotwin.detectors.ocsvm as ocsvm_mod
    import radiotwin.detectors.dbscan as dbscan_mod
    from radiotwin.detectors import neighbors

    def run_with(impl):
        # route every kernel call of the detectors through one backend
        saved = (
            neighbors.kernels,
            ocsvm_mod.kernels,
            dbscan_mod.kernels,
        )
        neighbors.kernels = ocsvm_mod.kernels = dbscan_mod.kernels = impl
        try:
            for name in ("ocsvm", "lof", "dbscan"):
                det = make_detector(name)
                t0 = time.perf_counter()
                det.fit(train)
                t_fit = time.perf_counter() - t0
                t0 = time.perf_counter()
                det.score_batch(test)
                t_score = time.perf_counter() - t0
                yield name, t_fit + t_score
        finally:
            neighbors.kernels, ocsvm_mod.kernels, dbscan_mod.kernels = saved

    py_times = dict(run_with(pyk))
    nat_times = dict(run_with(natk)) if natk is not None else {}
    for name in ("ocsvm", "lof", "dbscan"):
        rows.append(
            (f"{name} fit+score {n_train}/{n_test}",
             py_times[name], nat_times.get(name))
        )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--full", action="store_true",
                        help="desk-scale sizes (4000 samples)")
    args = parser.parse_args()

    n = 4000 if args.full else 2000
    rows = []
    bench_kernels(n, 25, rows)
    bench_detectors(n, n, rows)

    if natk is None:
        print("compiled kernels not available; timing the numpy fallback only\n")
    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'python':>9}  {'native':>9}  {'speedup':>7}")
    for label, t_py, t_nat in rows:
        if t_nat is None:
            print(f"{label:<{width}}  {t_py * 1e3:8.1f}ms        --       --")
        else:
            print(
                f"{label:<{width}}  {t_py * 1e3:8.1f}ms  {t_nat * 1e3:8.1f}ms  "
                f"{t_py / t_nat:6.2f}x"
            )


if __name__ == "__main__":
    main()
