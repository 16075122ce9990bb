"""Harmonic measure on a union of two domains by alternating boundary functions.

Given ``A`` in the boundary of ``D1 u D2``, split ``A1 = A n dD1`` and
``A2 = A \\ A1``.  Starting from ``f1 = chi_{A1}`` on ``dD1`` the recursion

    f2(y) = omega^{D1}_y(f1)  on dD2 n closure(D1),   chi_{A2}(y) elsewhere on dD2
    f1(y) = omega^{D2}_y(f2)  on dD1 n D2,            chi_{A1}(y) elsewhere on dD1

is pointwise nondecreasing and bounded by one.  Its limit defines
``omega^{D1 u D2}_x(A)`` as ``omega^{D1}_x(f1)`` on ``D1`` and
``omega^{D2}_x(f2)`` on ``D2``; on the overlap both must agree.

Also here: the exhaustion ``omega^D = lim omega^{D_k}`` along an increasing
chain of subdomains.
"""
from __future__ import annotations

import csv
import io
import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _backend
from .errors import ConsistencyError, InputError, NonConvergenceError
from .graph_dirichlet import harmonic_kernel, solve_dirichlet
from .weighted_graph import Subdomain, WeightedGraph, relative_boundary

log = logging.getLogger(__name__)

# Roundoff allowance for the monotonicity and boundedness assertions.
MONOTONE_SLACK = 1e-13


@dataclass
class UnionIterationState:
    f1: dict
    f2: dict
    iteration: int
    delta: float
    min_step: float
    trace: np.ndarray | None = None

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "delta", "min_f1", "max_f1", "min_f2", "max_f2"])
        if self.trace is not None:
            for i, row in enumerate(self.trace, start=1):
                w.writerow([i] + ["%.17g" % v for v in row])
        return buf.getvalue()


def _check_pair(g: WeightedGraph, d1: Subdomain, d2: Subdomain):
    for d in (d1, d2):
        if not d.interior:
            raise InputError("subdomain interior is empty")
        for v in d.interior:
            g._check(v)


def decompose_boundary(g: WeightedGraph, d1: Subdomain, d2: Subdomain, a) -> tuple[frozenset, frozenset]:
    _check_pair(g, d1, d2)
    a = frozenset(a)
    outer = relative_boundary(g, d1.interior | d2.interior)
    if not a <= outer:
        raise InputError(f"{sorted(a - outer)[:5]!r} not on the boundary of the union")
    a1 = a & d1.boundary
    return frozenset(a1), frozenset(a - a1)


def union_measure(
    g: WeightedGraph,
    d1: Subdomain,
    d2: Subdomain,
    a,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    trace: bool = False,
) -> tuple[dict, UnionIterationState]:
    """Return ``omega^{D1 u D2}_x(a)`` for every interior ``x`` of the union."""
    if tol <= 0:
        raise InputError("tol must be positive")
    a1, a2 = decompose_boundary(g, d1, d2, a)
    k1 = harmonic_kernel(g, d1)
    k2 = harmonic_kernel(g, d2)
    b1, b2 = k1.boundary, k2.boundary
    m1, m2 = len(b1), len(b2)

    t21 = np.zeros((m2, m1))
    mask2 = np.zeros(m2, dtype=bool)
    fixed2 = np.zeros(m2)
    for j, y in enumerate(b2):
        if y in d1.interior:
            t21[j] = k1.row(y)
            mask2[j] = True
        elif y in d1.boundary:
            t21[j, k1.col_index(y)] = 1.0
            mask2[j] = True
        else:
            fixed2[j] = 1.0 if y in a2 else 0.0

    t12 = np.zeros((m1, m2))
    mask1 = np.zeros(m1, dtype=bool)
    fixed1 = np.zeros(m1)
    for i, y in enumerate(b1):
        if y in d2.interior:
            t12[i] = k2.row(y)
            mask1[i] = True
        else:
            fixed1[i] = 1.0 if y in a1 else 0.0

    f1_0 = np.array([1.0 if y in a1 else 0.0 for y in b1])
    f1, f2, it, delta, min_step, tr = _backend.alternating_iterate(
        t21, mask2, fixed2, t12, mask1, fixed1, f1_0, tol, max_iter, trace)
    state = UnionIterationState(
        dict(zip(b1, map(float, f1))), dict(zip(b2, map(float, f2))), int(it), float(delta),
        float(min_step), tr)
    if delta > tol:
        raise NonConvergenceError(f"no convergence after {it} iterations (delta={delta:.3e})", state)
    if min_step < -MONOTONE_SLACK:
        raise ConsistencyError(f"iterates decreased by {-min_step:.3e}")
    top = max(float(np.max(f1, initial=0.0)), float(np.max(f2, initial=0.0)))
    bottom = min(float(np.min(f1, initial=0.0)), float(np.min(f2, initial=0.0)))
    if top > 1.0 + MONOTONE_SLACK or bottom < -MONOTONE_SLACK:
        raise ConsistencyError(f"iterates left [0, 1]: [{bottom!r}, {top!r}]")

    v1 = k1.apply(f1)
    v2 = k2.apply(f2)
    values = {x: float(v) for x, v in zip(k2.interior, v2)}
    values.update({x: float(v) for x, v in zip(k1.interior, v1)})
    for x in d1.interior & d2.interior:
        gap = abs(v1[k1.row_index(x)] - v2[k2.row_index(x)])
        if gap > 10 * tol:
            raise ConsistencyError(f"overlap mismatch {gap:.3e} at {x!r}")
    return values, state


# -- exhaustion -------------------------------------------------------------


@dataclass
class ExhaustionResult:
    values: dict
    increments: list
    defects: list
    stabilized_at: int | None

    @property
    def monotone(self) -> bool:
        inc = self.increments
        return all(inc[i + 1] < inc[i] for i in range(len(inc) - 1))


def _nearest_on(g: WeightedGraph, region: frozenset, targets: frozenset, start) -> object:
    """Graph-nearest vertex of ``targets`` from ``start`` moving inside ``region``; ties by id."""
    seen = {start}
    frontier = [start]
    while frontier:
        hits = sorted(v for v in frontier if v in targets)
        if hits:
            return hits[0]
        nxt = set()
        for v in frontier:
            for y in g.neighbors(v):
                if y in region and y not in seen:
                    seen.add(y)
                    nxt.add(y)
        frontier = sorted(nxt)
    raise InputError(f"{start!r} cannot reach the outer boundary")


def exhaustion_limit(
    g: WeightedGraph,
    chain: Sequence[Subdomain],
    f: Mapping,
    tol: float = 1e-12,
    extend: Callable[[object], float] | None = None,
) -> ExhaustionResult:
    """Solve along ``D_1 <= D_2 <= ... <= D_m`` and track the convergence.

    ``f`` is given on the boundary of ``D_m``.  Boundary vertices of ``D_k``
    that are interior to ``D_m`` receive ``extend(y)``, by default the value
    of ``f`` at the graph-nearest outer boundary vertex.  Increments and
    defects are sup norms over the interior of ``D_1``.
    """
    if not chain:
        raise InputError("empty chain")
    for prev, nxt in zip(chain, chain[1:]):
        if not prev.interior <= nxt.interior:
            raise InputError("chain is not increasing")
    final = chain[-1]
    missing = [q for q in final.boundary if q not in f]
    if missing:
        raise InputError(f"boundary data missing for {sorted(missing)[:5]!r}")
    outer = final.boundary
    region = final.closure
    if extend is None:
        def extend(y):
            return float(f[_nearest_on(g, region, outer, y)])

    solutions = []
    for d in chain:
        data = {y: (float(f[y]) if y in outer else float(extend(y))) for y in d.boundary}
        solutions.append(solve_dirichlet(g, d, data))
    probe = sorted(chain[0].interior)
    increments = [max(abs(b[x] - a[x]) for x in probe) for a, b in zip(solutions, solutions[1:])]
    last = solutions[-1]
    defects = [max(abs(s[x] - last[x]) for x in probe) for s in solutions]
    stabilized = None
    for k, d in enumerate(chain):
        if d.interior == final.interior:
            stabilized = k
            break
    values = {x: last[x] for x in sorted(final.interior)}
    return ExhaustionResult(values, increments, defects, stabilized)
