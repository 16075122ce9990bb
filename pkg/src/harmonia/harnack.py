"""Harnack indices and Radon-Nikodym ratios of discrete harmonic measures.

On a finite boundary, ``sup_{f >= 0} omega_x(f) / omega_y(f)`` is attained at
the indicator of a single atom, so the Harnack index of a vertex set ``A`` is

    H(A) = max_{x, y in A} max_q K[x, q] / K[y, q].

For each atom ``q`` the inner maximum over ordered pairs is simply
``max_x K[x, q] / min_y K[y, q]``, which keeps the scan linear in ``|A|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .graph_dirichlet import HarmonicKernel, harmonic_kernel, vertex_label
from .weighted_graph import Subdomain, WeightedGraph


@dataclass(frozen=True)
class HarnackReport:
    subset: tuple
    index: float
    witness: tuple  # (x, y, q)
    table: dict | None = field(default=None, repr=False)

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.index))

    def to_dict(self, label=vertex_label) -> dict:
        x, y, q = self.witness
        out = {
            "subset": [label(v) for v in self.subset],
            "index": self.index,
            "witness": {"x": label(x), "y": label(y), "q": label(q)},
        }
        if self.table is not None:
            out["ratios"] = [
                {"x": label(a), "y": label(b), "q": label(c), "ratio": r}
                for (a, b, c), r in sorted(self.table.items(), key=lambda kv: tuple(map(label, kv[0])))
            ]
        return out


def _single_component(k: HarmonicKernel, a) -> tuple[list, int]:
    verts = sorted(set(a))
    if not verts:
        raise InputError("subset is empty")
    comps = {k.component_of(v) for v in verts}
    if len(comps) != 1:
        raise InputError("subset spans several interior components")
    return verts, comps.pop()


def harnack_index(k: HarmonicKernel, a, with_table: bool = False) -> HarnackReport:
    verts, c = _single_component(k, a)
    rows = k.entries[[k.row_index(v) for v in verts]]
    cols = k.component_columns(c)
    sub = rows[:, cols]
    hi = sub.max(axis=0)
    lo = sub.min(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lo > 0.0, hi / lo, np.inf)
    j = int(np.argmax(ratio))
    q = k.boundary[cols[j]]
    x = verts[int(np.argmax(sub[:, j]))]
    y = verts[int(np.argmin(sub[:, j]))]
    index = float(k.row(x)[cols[j]] / k.row(y)[cols[j]]) if lo[j] > 0.0 else float("inf")
    table = None
    if with_table:
        table = {}
        for i, xv in enumerate(verts):
            for l, yv in enumerate(verts):
                for jj, col in enumerate(cols):
                    table[(xv, yv, k.boundary[col])] = float(sub[i, jj] / sub[l, jj])
    return HarnackReport(tuple(verts), index, (x, y, q), table)


def radon_nikodym(k: HarmonicKernel, x, y) -> dict:
    """Density ``d omega_x / d omega_y`` on the boundary atoms of their component."""
    if k.component_of(x) != k.component_of(y):
        raise InputError(f"{x!r} and {y!r} lie in different components")
    cols = k.component_columns(k.component_of(x))
    rx, ry = k.row(x), k.row(y)
    return {k.boundary[j]: float(rx[j] / ry[j]) for j in cols}


@dataclass(frozen=True)
class HarnackBoundCheck:
    passed: bool
    max_ratio: float
    bound: float
    witness: tuple


def check_general_harnack(k: HarmonicKernel, a, bound: float) -> HarnackBoundCheck:
    """Is every density ``d omega_x / d omega_y`` (``x, y`` in ``a``) at most ``bound``?

    When it is, the Harnack index of ``a`` is at most ``bound`` as well; that
    implication is asserted, not assumed.
    """
    verts, _ = _single_component(k, a)
    worst, witness = -np.inf, None
    for x in verts:
        for y in verts:
            for q, r in radon_nikodym(k, x, y).items():
                if r > worst:
                    worst, witness = r, (x, y, q)
    passed = worst <= bound
    if passed:
        idx = harnack_index(k, verts).index
        assert idx <= bound, (idx, bound)
    return HarnackBoundCheck(bool(passed), float(worst), float(bound), witness)


def harnack_monotonicity_check(g: WeightedGraph, a, d1: Subdomain, d2: Subdomain,
                               tol: float = 1e-10) -> tuple[bool, float, float]:
    """Compare ``H(a; d1) <= H(a; d2)`` for ``a`` inside ``d2`` inside ``d1``.

    Returns ``(holds, H(a; d1), H(a; d2))``.
    """
    a = set(a)
    if not (a <= d2.interior <= d1.interior):
        raise InputError("need a <= interior(d2) <= interior(d1)")
    h1 = harnack_index(harmonic_kernel(g, d1), a).index
    h2 = harnack_index(harmonic_kernel(g, d2), a).index
    return bool(h1 <= h2 + tol), h1, h2
