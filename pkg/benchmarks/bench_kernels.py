#!/usr/bin/env python3
"""Benchmark the compiled histogram/tree kernels against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--rows 40000] [--features 100]
"""

import argparse
import time

import numpy as np

from ambigufair import kernels
from ambigufair.learners import default_config, fit, model_to_dict, predict_proba


def time_call(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_histograms(rows, features, n_bins=32):
    rng = np.random.default_rng(0)
    codes = rng.integers(0, n_bins, size=(rows, features)).astype(np.int32)
    idx = np.arange(rows, dtype=np.int64)
    grad = rng.normal(size=rows)
    hess = rng.random(rows) + 0.1
    out = {}
    for name in kernels.available_backends():
        kernels.set_backend(name)
        out[name] = time_call(lambda: kernels.build_histograms(codes, idx, grad, hess, n_bins))
    return out


def bench_gbdt(rows, features):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(rows, features))
    y = (X[:, 0] + 0.8 * rng.normal(size=rows) > 0).astype(int)
    cfg = default_config("gbdt", n_trees=20)
    out, docs = {}, {}
    for name in kernels.available_backends():
        kernels.set_backend(name)
        t0 = time.perf_counter()
        model = fit(cfg, X, y)
        predict_proba(model, X)
        out[name] = time.perf_counter() - t0
        docs[name] = model_to_dict(model)
    names = list(docs)
    if len(names) == 2 and docs[names[0]] != docs[names[1]]:
        raise SystemExit("backends disagree: benchmark aborted")
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=40000)
    parser.add_argument("--features", type=int, default=100)
    args = parser.parse_args()

    original = kernels.active_backend()
    try:
        print(f"backends available: {', '.join(kernels.available_backends())}")
        hist = bench_histograms(args.rows, args.features)
        print(f"\nhistogram build ({args.rows} x {args.features}, 32 bins):")
        for name, sec in sorted(hist.items()):
            print(f"  {name:<8} {sec * 1e3:8.1f} ms")
        if "cython" in hist:
            print(f"  speedup  {hist['numpy'] / hist['cython']:8.1f} x")

        gbdt = bench_gbdt(args.rows, min(args.features, 20))
        print(f"\nfull boosted fit + predict ({args.rows} rows, 20 trees):")
        for name, sec in sorted(gbdt.items()):
            print(f"  {name:<8} {sec:8.2f} s")
        if "cython" in gbdt:
            print(f"  speedup  {gbdt['numpy'] / gbdt['cython']:8.1f} x")
        print("\nbackends produce identical models: verified")
    finally:
        kernels.set_backend(original)


if __name__ == "__main__":
    main()
