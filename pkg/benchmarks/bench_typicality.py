"""Compiled kernels against the numpy fallback on sizes typical of n = 12 runs.

    python benchmarks/bench_typicality.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from rdeq import kernels


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    n = 12
    # typicality search: 2000 sequences against a 512-word codebook
    a = rng.integers(0, 3, size=(2000, n)).astype(np.int32)
    code = rng.integers(0, 2, size=(512, n)).astype(np.int32)
    members = np.arange(512, dtype=np.int64)
    ptr = np.array([0, 512], dtype=np.int64)
    group = np.zeros(2000, dtype=np.int64)
    pmf = np.full(6, 1 / 6)
    lo = np.floor(n * (pmf - 0.05)).clip(0).astype(np.int32)
    hi = np.floor(n * (pmf + 0.05)).astype(np.int32)
    yield "first_typical", (a, group, ptr, members, code, lo, hi, 2, 1)

    # completion expansion: all 3^10 side-information sequences of length 12 with two fixed symbols
    nb = 3 ** 10
    ydig = np.array(np.unravel_index(np.arange(nb), (3,) * 10)).T
    ydig = np.hstack([ydig, np.zeros((nb, n - 10), dtype=np.int64)]).astype(np.int32)
    ccount = np.array([1, 1, 2], dtype=np.int64)
    ctable = np.array([[0, 0], [1, 0], [0, 1]], dtype=np.int32)
    probs = np.array([[0.375, 0.0, 0.125], [0.0, 0.375, 0.125]])
    counts = ccount[ydig].prod(axis=1).astype(np.int64)
    ys = np.arange(3, dtype=np.int32)
    yield "expand_completions", (ydig, counts, ccount, ctable, ys, probs, 2)

    # per-row distortion
    x = rng.integers(0, 2, size=(200_000, n)).astype(np.int32)
    xhat = rng.integers(0, 2, size=(1024, n)).astype(np.int32)
    row = rng.integers(0, 1024, size=200_000).astype(np.int64)
    table = 1.0 - np.eye(2)
    yield "row_distortion", (x, xhat, row, table)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.compiled_available():
        print("compiled kernels not built; only the numpy backend is timed")
    print(f"{'kernel':<20}{'numpy s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, arg in cases(np.random.default_rng(0)):
        fn = getattr(kernels, name)
        t_np = _time(lambda: fn(*arg, backend="numpy"), args.repeat)
        if kernels.compiled_available():
            t_c = _time(lambda: fn(*arg, backend="compiled"), args.repeat)
            print(f"{name:<20}{t_np:>12.4f}{t_c:>12.4f}{t_np / t_c:>10.1f}")
        else:
            print(f"{name:<20}{t_np:>12.4f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
