"""Executable checks of the harmonic-measure axioms and maximum principles.

Every verifier returns a :class:`VerificationReport`; none raises on a failed
check.  Checks that only see a kernel also run a constant probe (``f = 1``
on the whole boundary): the theorems force ``omega_x(1) = 1`` on every
row, which is what makes a perturbed kernel entry visible to each verifier.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .graph_dirichlet import HarmonicKernel, harmonic_kernel, solve_dirichlet
from .weighted_graph import (
    Subdomain,
    SubdivisionSpec,
    WeightedGraph,
    connected_components,
    relative_boundary,
    subdivide_edge,
)

TOL = 1e-10


@dataclass
class VerificationReport:
    check: str
    passed: bool
    tolerance: float
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def fail(self, **witness):
        self.passed = False
        self.witnesses.append(witness)

    def to_dict(self) -> dict:
        return {"check": self.check, "passed": self.passed, "tolerance": self.tolerance,
                "witnesses": self.witnesses, "details": self.details}


def _components(k: HarmonicKernel):
    for c in range(len(k.components)):
        yield c, k.component_rows(c), k.component_columns(c)


def _constant_probe(report: VerificationReport, k: HarmonicKernel, tol: float) -> None:
    vals = k.entries.sum(axis=1)
    bad = np.flatnonzero(np.abs(vals - 1.0) > tol)
    for i in bad[:5]:
        report.fail(probe="f=1", x=k.interior[i], value=float(vals[i]))


# -- definition of pre-harmonic measure -------------------------------------


def verify_preharmonic(k: HarmonicKernel, g: WeightedGraph | None = None, d: Subdomain | None = None,
                       tol: float = TOL) -> VerificationReport:
    """Unit mass on each component boundary; supports equal the component boundary."""
    rep = VerificationReport("preharmonic", True, tol)
    if g is not None and d is not None:
        comps = connected_components(g, d.interior)
        expected = {x: frozenset(relative_boundary(g, c)) for c in comps for x in c}
    else:
        expected = {x: k.component_boundaries[c] for c, block in enumerate(k.components) for x in block}
    lo = float(k.entries.min(initial=0.0))
    hi = float(k.entries.max(initial=0.0))
    rep.details["entry_range"] = [lo, hi]
    if lo < 0.0 or hi > 1.0:
        rep.fail(reason="entry outside [0, 1]", min=lo, max=hi)
    worst = 0.0
    for i, x in enumerate(k.interior):
        row = k.entries[i]
        atoms = expected[x]
        cols = np.array([k.col_index(q) for q in sorted(atoms)], dtype=np.intp)
        mass = float(row[cols].sum())
        worst = max(worst, abs(mass - 1.0))
        if abs(mass - 1.0) > tol:
            rep.fail(reason="mass", x=x, mass=mass)
        support = {k.boundary[j] for j in np.flatnonzero(row > 0.0)}
        if support != atoms:
            extra = sorted(support - atoms)[:3]
            lost = sorted(atoms - support)[:3]
            rep.fail(reason="support", x=x, unexpected=extra, missing=lost)
    rep.details["max_mass_error"] = worst
    return rep


# -- regularity -------------------------------------------------------------


def _fresh_vertex(g: WeightedGraph, tag: int):
    sample = g.ordered_vertices[0]
    if isinstance(sample, str):
        cand = f"~probe{tag}"
        while cand in g:
            cand = "~" + cand
        return cand
    if isinstance(sample, tuple):
        return (sys.maxsize,) + (tag,) + (0,) * max(0, len(sample) - 2)
    return max(g.ordered_vertices) + 1 + tag


def verify_regular(g: WeightedGraph, d: Subdomain, probes: int = 10, seed: int = 0,
                   tol: float = TOL) -> VerificationReport:
    """Approach each boundary vertex along subdivided edges and watch the solution converge.

    For ``lam = 1 - 2**-m`` the edge ``x - y`` (``y`` on the boundary) gets a
    new interior vertex ``x_lam``; the Dirichlet problem is re-solved on the
    subdivided graph and ``|u(x_lam) - f(y)| <= (1 - lam) range(f) + tol``
    is required.
    """
    rep = VerificationReport("regular", True, tol)
    rng = np.random.default_rng(seed)
    boundary = d.ordered_boundary()
    f = {q: float(v) for q, v in zip(boundary, rng.uniform(-1.0, 1.0, len(boundary)))}
    span = max(f.values()) - min(f.values()) if f else 0.0
    worst = 0.0
    count = 0
    for y in boundary:
        for x in sorted(v for v in g.neighbors(y) if v in d.interior):
            prev = np.inf
            for m in range(1, probes + 1):
                lam = 1.0 - 2.0 ** (-m)
                z = _fresh_vertex(g, m)
                g2 = subdivide_edge(g, SubdivisionSpec((x, y), lam, z))
                d2 = g2.subdomain(d.interior | {z})
                u = solve_dirichlet(g2, d2, f)
                gap = abs(u[z] - f[y])
                bound = (1.0 - lam) * span + tol
                worst = max(worst, gap - (1.0 - lam) * span)
                count += 1
                if gap > bound or gap > prev + tol:
                    rep.fail(y=y, x=x, lam=lam, gap=gap, bound=bound)
                prev = gap
    rep.details.update(probes=count, max_excess=worst)
    return rep


# -- maximum principles -----------------------------------------------------


def verify_weak_max(k: HarmonicKernel, f: Mapping, g: WeightedGraph | None = None,
                    probes: int = 10, tol: float = TOL) -> VerificationReport:
    """``min f <= omega_x(f) <= max f`` per component, plus the constant probes."""
    rep = VerificationReport("weak_max", True, tol)
    fv = k.vector(f)
    vals = k.apply(fv)
    for c, rows, cols in _components(k):
        top, bot = fv[cols].max(), fv[cols].min()
        sub = vals[rows]
        i_hi, i_lo = int(np.argmax(sub)), int(np.argmin(sub))
        if sub[i_hi] > top + tol:
            rep.fail(component=c, x=k.interior[rows[i_hi]], value=float(sub[i_hi]), max_f=float(top))
        if sub[i_lo] < bot - tol:
            rep.fail(component=c, x=k.interior[rows[i_lo]], value=float(sub[i_lo]), min_f=float(bot))
        if g is not None:
            # sup is approached at the argmax atom along an edge into it
            q = k.boundary[cols[int(np.argmax(fv[cols]))]]
            lam = 1.0 - 2.0 ** (-probes)
            near = [x for x in g.neighbors(q) if x in k.components[c]]
            if near:
                x = min(near, key=lambda v: (-vals[k.row_index(v)], v))
                approach = (1.0 - lam) * vals[k.row_index(x)] + lam * top
                gap = float(top - approach)
                rep.details.setdefault("approach_gap", {})[str(c)] = gap
                if gap > (1.0 - lam) * (top - bot) + tol:
                    rep.fail(component=c, reason="approach", gap=gap)
    for c_val in (1.0, -1.0):
        cv = k.apply(np.full(len(k.boundary), c_val))
        bad = np.flatnonzero(np.abs(cv - c_val) > tol)
        for i in bad[:5]:
            rep.fail(probe=f"f={c_val:g}", x=k.interior[i], value=float(cv[i]))
    return rep


def verify_strong_max(k: HarmonicKernel, f: Mapping, tol: float = TOL) -> VerificationReport:
    """Per component: constant data gives a constant solution, otherwise the
    interior stays strictly below the maximum (and above the minimum) of ``f``
    over the component's atoms."""
    rep = VerificationReport("strong_max", True, tol)
    fv = k.vector(f)
    vals = k.apply(fv)
    margins = {}
    for c, rows, cols in _components(k):
        fa = fv[cols]
        sub = vals[rows]
        if fa.max() == fa.min():
            spread = float(sub.max() - sub.min())
            margins[str(c)] = {"constant": True, "spread": spread}
            if spread > tol:
                rep.fail(component=c, reason="constant data, nonconstant solution", spread=spread)
        else:
            upper = float(fa.max() - sub.max())
            lower = float(sub.min() - fa.min())
            margins[str(c)] = {"constant": False, "upper_margin": upper, "lower_margin": lower}
            if not (upper > 0.0 and lower > 0.0):
                i = int(np.argmax(sub)) if upper <= 0.0 else int(np.argmin(sub))
                rep.fail(component=c, x=k.interior[rows[i]], upper_margin=upper, lower_margin=lower)
    # f = 1 must reproduce the constant, which also covers one-vertex components
    _constant_probe(rep, k, tol)
    rep.details["margins"] = margins
    return rep


def verify_boundary_strong_max(k: HarmonicKernel, f: Mapping, tol: float = TOL,
                               trigger_tol: float = 1e-12) -> VerificationReport:
    """Attaining the essential sup in the interior forces a constant solution.

    With ``c0`` the max of ``f`` over the component's atoms, the sets
    ``A0 = {f = c0}``, ``A1 = {f > c0}`` (empty) and ``A2 = {f < c0}`` are
    materialized.  The principle triggers iff ``A2`` is empty.
    """
    rep = VerificationReport("boundary_strong_max", True, tol)
    parts = {}
    for label, fv in (("f", k.vector(f)), ("f=1", np.ones(len(k.boundary)))):
        vals = k.apply(fv)
        for c, rows, cols in _components(k):
            fa = fv[cols]
            c0 = float(fa.max())
            a0 = cols[fa == c0]
            a1 = cols[fa > c0]
            a2 = cols[fa < c0]
            sub = vals[rows]
            mass = lambda s: k.entries[np.ix_(rows, s)].sum(axis=1) if len(s) else np.zeros(len(rows))
            m0, m1, m2 = mass(a0), mass(a1), mass(a2)
            triggered = bool(np.any(sub >= c0 - trigger_tol))
            if label == "f":
                parts[str(c)] = {
                    "c0": c0, "triggered": triggered,
                    "A0": [k.boundary[j] for j in a0], "A2": [k.boundary[j] for j in a2],
                    "omega_A0": [float(m0.min()), float(m0.max())],
                    "omega_A1": [float(m1.min(initial=0.0)), float(m1.max(initial=0.0))],
                    "omega_A2": [float(m2.min()), float(m2.max())],
                }
            if np.any(m1 != 0.0):
                rep.fail(probe=label, component=c, reason="omega(A1) > 0")
            if triggered != (len(a2) == 0):
                rep.fail(probe=label, component=c, reason="trigger mismatch", triggered=triggered,
                         atoms_below=len(a2))
            if triggered:
                spread = float(sub.max() - sub.min())
                if spread > tol or abs(float(sub.max()) - c0) > tol:
                    rep.fail(probe=label, component=c, reason="not constant", spread=spread)
    rep.details["components"] = parts
    return rep


def verify_chi_a_max(k: HarmonicKernel, a, tol: float = TOL) -> VerificationReport:
    """``0 < omega_x(A) <= 1``, with value one everywhere or nowhere on a component."""
    rep = VerificationReport("chi_A_max", True, tol)
    a = frozenset(a)
    for label, chosen in (("A", a), ("full", frozenset(k.boundary))):
        ind = np.array([1.0 if q in chosen else 0.0 for q in k.boundary])
        vals = k.apply(ind)
        for c, rows, cols in _components(k):
            sub = vals[rows]
            hit = chosen & k.component_boundaries[c]
            if not hit:
                if np.any(sub != 0.0):
                    rep.fail(probe=label, component=c, reason="mass off the component boundary")
                continue
            if np.any(sub <= 0.0) or np.any(sub > 1.0 + tol):
                i = int(np.argmin(sub)) if np.any(sub <= 0.0) else int(np.argmax(sub))
                rep.fail(probe=label, component=c, x=k.interior[rows[i]], value=float(sub[i]))
            if hit == k.component_boundaries[c]:
                if np.any(np.abs(sub - 1.0) > tol):
                    rep.fail(probe=label, component=c, reason="full boundary must give 1",
                             worst=float(np.max(np.abs(sub - 1.0))))
            elif np.any(sub >= 1.0):
                rep.fail(probe=label, component=c, reason="proper subset reached 1")
    return rep


# -- compatibility ----------------------------------------------------------


def verify_compatibility(g: WeightedGraph, d: Subdomain, d_sub: Subdomain, trials: int = 5,
                         seed: int = 0, kernel: HarmonicKernel | None = None,
                         tol: float = TOL) -> VerificationReport:
    """Tower property ``omega^D_x(f) = omega^{D'}_x(omega^D(f))`` for ``D'`` inside ``D``.

    ``omega^D`` comes from ``kernel`` (computed if absent); ``omega^{D'}`` is
    an independent solve.  Trial zero is the constant ``f = 1``.
    """
    rep = VerificationReport("compatibility", True, tol)
    if not d_sub.interior <= d.interior:
        rep.fail(reason="d_sub is not contained in d")
        return rep
    k = kernel if kernel is not None else harmonic_kernel(g, d)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(trials + 1):
        fv = np.ones(len(k.boundary)) if t == 0 else rng.uniform(-1.0, 1.0, len(k.boundary))
        outer = k.apply(fv)
        value = {x: float(v) for x, v in zip(k.interior, outer)}
        value.update({q: float(v) for q, v in zip(k.boundary, fv)})
        h = {y: value[y] for y in d_sub.boundary}
        inner = solve_dirichlet(g, d_sub, h)
        for x in sorted(d_sub.interior):
            gap = abs(inner[x] - value[x])
            worst = max(worst, gap)
            if gap > tol:
                rep.fail(trial=t, x=x, gap=gap)
                break
    rep.details["max_gap"] = worst
    return rep


# -- helpers ----------------------------------------------------------------


def inject_fault(k: HarmonicKernel, rng: np.random.Generator, eps: float = 1e-3,
                 rows=None) -> tuple[HarmonicKernel, tuple]:
    """Copy of ``k`` with ``eps`` added to one random entry; returns ``(kernel, (x, q))``."""
    e = np.array(k.entries)
    pool = np.arange(e.shape[0]) if rows is None else np.asarray(rows)
    i = int(rng.choice(pool))
    j = int(rng.integers(0, e.shape[1]))
    e[i, j] += eps
    return k.with_entries(e), (k.interior[i], k.boundary[j])


def run_all(g: WeightedGraph, d: Subdomain, k: HarmonicKernel | None = None, seed: int = 0,
            trials: int = 5, probes: int = 6) -> list[VerificationReport]:
    """Every check on one subdomain, with seeded boundary data."""
    k = k if k is not None else harmonic_kernel(g, d)
    rng = np.random.default_rng(seed)
    f = {q: float(v) for q, v in zip(k.boundary, rng.uniform(-1.0, 1.0, len(k.boundary)))}
    inner = _shrink(g, d)
    atom = {k.boundary[0]}
    return [
        verify_preharmonic(k, g, d),
        verify_regular(g, d, probes=probes, seed=seed),
        verify_weak_max(k, f, g=g),
        verify_strong_max(k, f),
        verify_boundary_strong_max(k, f),
        verify_compatibility(g, d, inner, trials=trials, seed=seed, kernel=k),
        verify_chi_a_max(k, atom),
    ]


def _shrink(g: WeightedGraph, d: Subdomain) -> Subdomain:
    """Interior minus the vertices touching the boundary, or ``d`` itself if that is empty."""
    core = {x for x in d.interior if not any(y in d.boundary for y in g.neighbors(x))}
    return g.subdomain(core) if core else d
