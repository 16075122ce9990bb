"""Pure numpy implementations of the iteration kernels.

These define the reference semantics; ``_speedups.pyx`` must produce the
same iterates up to floating-point summation order.
"""
import numpy as np


def mean_value_iterate(indptr, indices, data, free, u0, tol, max_iter):
    """Jacobi sweeps of the mean-value map on the free vertices.

    ``indptr/indices/data`` is the CSR weight matrix of the closure graph,
    ``free`` a boolean mask of vertices to update (fixed ones keep ``u0``).
    Returns ``(u, sweeps, last_increment)``; stops once the sup-norm change
    of one sweep is ``<= tol``.
    """
    n = len(u0)
    u = np.array(u0, dtype=np.float64)
    free = np.asarray(free, dtype=bool)
    row = np.repeat(np.arange(n), np.diff(indptr))
    deg = np.bincount(row, weights=data, minlength=n)
    rows = np.flatnonzero(free)
    inc = np.inf
    sweeps = 0
    while sweeps < max_iter:
        acc = np.bincount(row, weights=data * u[indices], minlength=n)
        new = acc[rows] / deg[rows]
        inc = float(np.max(np.abs(new - u[rows]))) if rows.size else 0.0
        u[rows] = new
        sweeps += 1
        if inc <= tol:
            break
    return u, sweeps, inc


def alternating_iterate(t21, mask2, fixed2, t12, mask1, fixed1, f1, tol, max_iter, trace):
    """Alternating boundary-function recursion between two overlapping domains.

    One iteration computes ``f2 <- t21 @ f1`` on ``mask2`` (``fixed2``
    elsewhere) and then ``f1 <- t12 @ f2`` on ``mask1`` (``fixed1``
    elsewhere).  Returns ``(f1, f2, iterations, delta, min_step, trace)``
    where ``min_step`` is the most negative pointwise change seen and
    ``trace`` is an ``(iterations, 5)`` array of
    ``delta, min f1, max f1, min f2, max f2`` or ``None``.
    """
    f1 = np.array(f1, dtype=np.float64)
    f2 = np.where(mask2, 0.0, fixed2)
    rows1 = np.flatnonzero(mask1)
    rows2 = np.flatnonzero(mask2)
    sub21 = t21[rows2]
    sub12 = t12[rows1]
    min_step = np.inf
    delta = np.inf
    it = 0
    out = [] if trace else None
    while it < max_iter:
        new2 = sub21 @ f1
        d2 = new2 - f2[rows2]
        f2[rows2] = new2
        new1 = sub12 @ f2
        d1 = new1 - f1[rows1]
        f1[rows1] = new1
        steps = np.concatenate((d1, d2))
        if steps.size:
            delta = float(np.max(np.abs(steps)))
            min_step = min(min_step, float(np.min(steps)))
        else:
            delta = 0.0
        it += 1
        if trace:
            out.append((delta, f1.min(initial=np.inf), f1.max(initial=-np.inf),
                        f2.min(initial=np.inf), f2.max(initial=-np.inf)))
        if delta <= tol:
            break
    tr = np.array(out, dtype=np.float64).reshape(-1, 5) if trace else None
    return f1, f2, it, delta, min_step, tr
