"""Compare the compiled and numpy iteration kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--size 30] [--repeat 3]

Prints median wall time per backend, the speedup and the largest difference
between the two results.
"""
import argparse
import statistics
import time

import numpy as np

from harmonia import _fallback
from harmonia.weighted_graph import grid_graph

try:
    from harmonia import _speedups
except ImportError:  # extension not built
    _speedups = None


def mean_value_inputs(n):
    g = grid_graph(n, n)
    verts = g.ordered_vertices
    idx = {v: i for i, v in enumerate(verts)}
    interior = {(i, j) for i in range(1, n - 1) for j in range(1, n - 1)}
    indptr, indices, data = [0], [], []
    for v in verts:
        if v in interior:
            for y, w in sorted(g.neighbors(v).items()):
                indices.append(idx[y])
                data.append(w)
        indptr.append(len(indices))
    free = np.array([v in interior for v in verts])
    rng = np.random.default_rng(0)
    u0 = np.where(free, 0.0, rng.uniform(-1, 1, len(verts)))
    return (np.array(indptr, dtype=np.int32), np.array(indices, dtype=np.int32),
            np.array(data), free, u0, 1e-10, 10_000_000)


def alternating_inputs(n):
    rng = np.random.default_rng(1)
    m1, m2 = 12 * n, 12 * n

    def stochastic(rows, cols):
        t = rng.uniform(0, 1, (rows, cols))
        return t / t.sum(axis=1, keepdims=True)

    mask2 = np.zeros(m2, dtype=bool)
    mask2[: 3 * m2 // 4] = True
    mask1 = np.zeros(m1, dtype=bool)
    mask1[: 3 * m1 // 4] = True
    t21 = stochastic(m2, m1) * 0.995
    t12 = stochastic(m1, m2) * 0.995
    fixed2 = np.where(mask2, 0.0, rng.integers(0, 2, m2).astype(float))
    fixed1 = np.where(mask1, 0.0, rng.integers(0, 2, m1).astype(float))
    f1 = fixed1.copy()
    return (t21, mask2, fixed2, t12, mask1, fixed1, f1, 1e-13, 100_000, False)


def timed(fn, args, repeat):
    times, out = [], None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t)
    return statistics.median(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=30)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    cases = [
        ("mean_value_iterate", mean_value_inputs(a.size)),
        ("alternating_iterate", alternating_inputs(a.size)),
    ]
    print(f"{'kernel':22s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, args in cases:
        tp, outp = timed(getattr(_fallback, name), args, a.repeat)
        if _speedups is None:
            print(f"{name:22s} {tp:11.4f} {'n/a':>11s}")
            continue
        tc, outc = timed(getattr(_speedups, name), args, a.repeat)
        diff = float(np.max(np.abs(np.asarray(outp[0]) - np.asarray(outc[0]))))
        print(f"{name:22s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
