"""Compare the compiled kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``; prints one row per case
with the best-of-N wall time of each backend and the speedup.
"""

import argparse
import time

import numpy as np

from torusdimers import _kernels_py
from torusdimers._backend import compiled_kernels


def best_time(func, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - start)
    return best


def cases(samples):
    for shape in [(3, 3), (3, 4), (4, 4)]:
        yield f"enumerate {shape[0]}x{shape[1]}", "enumerate_moves", shape
    rng = np.random.default_rng(0)
    for n, k in [(2, 1), (3, 2), (4, 3)]:
        strings = rng.integers(0, n, size=(samples, n * k), dtype=np.int64)
        times = rng.random((samples, n * k))
        yield f"classify n={n} k={k} S={samples}", "classify_beads", (strings, times, n, k)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if compiled_kernels is None:
        raise SystemExit("compiled extension not built; run pip install -e . first")

    print(f"{'case':32s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s}")
    for label, name, fargs in cases(args.samples):
        py = getattr(_kernels_py, name)
        cy = getattr(compiled_kernels, name)
        assert np.array_equal(py(*fargs), cy(*fargs)), label
        t_py = best_time(lambda: py(*fargs), args.repeat)
        t_cy = best_time(lambda: cy(*fargs), args.repeat)
        print(f"{label:32s} {t_py:12.4f} {t_cy:12.4f} {t_py / t_cy:9.1f}")


if __name__ == "__main__":
    main()
