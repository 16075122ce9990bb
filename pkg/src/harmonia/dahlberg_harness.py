"""Carleson norms, strong (p, p) norms and their equivalence on lattice domains.

``M`` is the Carleson constant of a measure ``mu`` on the interior:

    mu(C_{P,r} n D) <= M omega_O(Delta_{P,r}),

``K`` the strong (p, p) constant of ``f -> omega_.(f)`` from ``L^p(omega_O)``
into ``L^p(mu)``, estimated from below over a finite family of boundary data.
Given ``delta = min(1/2, delta_0)`` from the corkscrew lower bound, every
``x`` in ``C_{P, delta R}`` has ``omega_x(Delta_{P,R}) >= delta``, which yields

    delta^p mu(C_{P,r})  <=  sum_{x in C_{P,r}} omega_x(Delta_{P,R})^p mu(x)
                         <=  sum_{x in D} omega_x(Delta_{P,R})^p mu(x)
                         <=  K omega_O(Delta_{P,R})

for ``r = delta R``.  :func:`check_equivalence` checks each link separately.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError
from .graph_dirichlet import HarmonicKernel, vertex_label
from .lattice_domain import LatticeDomain, _Geometry, cylinder, default_radii, estimate_delta

log = logging.getLogger(__name__)

TOL_GEOM = 0.1
P_GRID = (1.5, 2.0, 3.0)
LINK_RTOL = 1e-12


@dataclass(frozen=True)
class TestMeasure:
    weights: Mapping
    label: str = "mu"

    __test__ = False  # not a pytest class

    def __post_init__(self):
        for x, w in self.weights.items():
            if not (math.isfinite(w) and w >= 0.0):
                raise InputError(f"measure weight at {x!r} must be finite and >= 0, got {w!r}")

    def vector(self, k: HarmonicKernel) -> np.ndarray:
        v = np.zeros(len(k.interior))
        for x, w in self.weights.items():
            v[k.row_index(x)] = w
        return v

    def scaled(self, c: float) -> "TestMeasure":
        return TestMeasure({x: c * w for x, w in self.weights.items()}, self.label)

    @property
    def total(self) -> float:
        return math.fsum(self.weights.values())


def area_measure(dom: LatticeDomain) -> TestMeasure:
    return TestMeasure({x: dom.h ** 2 for x in sorted(dom.interior)}, "area")


def corkscrew_mass(dom: LatticeDomain, p_cell, r: float) -> TestMeasure:
    return TestMeasure({cylinder(dom, p_cell, r).corkscrew: 1.0}, "corkscrew")


def default_corkscrew_mass(dom: LatticeDomain, radii) -> TestMeasure:
    """Unit mass at ``T_{P,r}`` for the boundary cell at angle zero and ``r = min(radii) / 2**1.5``.

    On the unit square with ``R = diam / 4`` this is depth 1/8, a grid point
    for every dyadic ``h``, so the measure is the same under refinement.
    """
    from .lattice_domain import probe_cells

    return corkscrew_mass(dom, probe_cells(dom, 1)[0], min(radii) / 2 ** 1.5)


def boundary_layer_measure(dom: LatticeDomain, k: HarmonicKernel) -> TestMeasure:
    """Mass ``omega_O(q)`` moved from each boundary cell ``q`` onto its interior neighbors.

    ``mu(C_{P,r})`` then tracks ``omega_O(Delta_{P,r})`` and the measure is
    Carleson uniformly in ``h``, corners included.
    """
    w: dict = {}
    row = k.row(dom.origin_cell)
    for j, q in enumerate(k.boundary):
        nbs = [x for x in dom.graph.neighbors(q) if x in dom.interior]
        for x in nbs:
            w[x] = w.get(x, 0.0) + row[j] / len(nbs)
    return TestMeasure(dict(sorted(w.items())), "boundary_layer")


def uniform_layer_measure(dom: LatticeDomain) -> TestMeasure:
    """Weight ``h`` on each interior cell with a boundary neighbor.

    Near a convex corner ``omega_O`` decays faster than arc length, so this
    measure is not Carleson in the limit and ``K`` grows like ``1/h`` there.
    """
    w = {}
    for x in sorted(dom.interior):
        if any(y in dom.boundary for y in dom.graph.neighbors(x)):
            w[x] = dom.h
    return TestMeasure(w, "uniform_layer")


def _ball_matrix(geo: _Geometry, centers: Sequence, radii: Sequence[float]) -> tuple[np.ndarray, list]:
    """Indicator columns of ``Delta_{P,r}`` for every center and radius."""
    cols, labels = [], []
    for r in radii:
        for p in centers:
            col = np.zeros(len(geo.bcells))
            col[geo.ball(p, r)] = 1.0
            cols.append(col)
            labels.append((p, float(r)))
    return np.array(cols).T.reshape(len(geo.bcells), len(cols)), labels


# -- Carleson norm ----------------------------------------------------------


@dataclass
class CarlesonReport:
    M: float
    witness: tuple | None
    ratios: list = field(repr=False)
    delta: float | None = None

    def to_dict(self, label=vertex_label) -> dict:
        return {
            "M": self.M,
            "witness": None if self.witness is None else {"P": label(self.witness[0]), "r": self.witness[1]},
            "delta": self.delta,
        }


def carleson_norm(dom: LatticeDomain, k: HarmonicKernel, mu: TestMeasure, radii,
                  centers: Sequence | None = None) -> CarlesonReport:
    radii = [float(r) for r in radii]
    if not radii:
        raise InputError("radii list is empty")
    if any(not (0.0 < r < dom.diameter) for r in radii):
        raise InputError(f"radii must lie in (0, diam) = (0, {dom.diameter!r})")
    geo = _Geometry(dom, k)
    centers = list(k.boundary) if centers is None else list(centers)
    m = mu.vector(k)
    supp = np.flatnonzero(m > 0)
    omega_o = k.row(dom.origin_cell)
    ratios = []
    best = (0.0, None)
    for r in radii:
        for p in centers:
            den = float(omega_o[geo.ball(p, r)].sum())
            mask = np.isin(supp, geo.cyl(p, r), assume_unique=True)
            num = float(m[supp[mask]].sum())
            ratio = num / den
            ratios.append((p, r, num, den, ratio))
            if ratio > best[0] or best[1] is None:
                best = (ratio, (p, r))
    return CarlesonReport(best[0], best[1], ratios)


# -- strong (p, p) norm -----------------------------------------------------


@dataclass
class BoundaryFamily:
    labels: list
    matrix: np.ndarray  # boundary cells x members, kernel column order

    def __len__(self) -> int:
        return self.matrix.shape[1]

    def describe(self) -> dict:
        kinds: dict = {}
        for lab in self.labels:
            kinds[lab[0]] = kinds.get(lab[0], 0) + 1
        return kinds

    def extend(self, other: "BoundaryFamily") -> "BoundaryFamily":
        return BoundaryFamily(self.labels + other.labels, np.hstack([self.matrix, other.matrix]))


def indicator_family(dom: LatticeDomain, k: HarmonicKernel, radii, centers=None) -> BoundaryFamily:
    geo = _Geometry(dom, k)
    centers = list(k.boundary) if centers is None else list(centers)
    mat, labs = _ball_matrix(geo, centers, radii)
    return BoundaryFamily([("ball", p, r) for p, r in labs], mat)


def default_family(dom: LatticeDomain, k: HarmonicKernel, radii=None, size: int = 200,
                   seed: int = 0) -> BoundaryFamily:
    """Single atoms, every surface-ball indicator over ``radii``, and ``size`` seeded random ``f >= 0``."""
    radii = default_radii(dom) if radii is None else radii
    m = len(k.boundary)
    atoms = BoundaryFamily([("atom", q) for q in k.boundary], np.eye(m))
    rng = np.random.default_rng(seed)
    rand = BoundaryFamily([("random", i) for i in range(size)], rng.uniform(0.0, 1.0, (m, size)))
    return atoms.extend(indicator_family(dom, k, radii)).extend(rand)


@dataclass
class StrongPPReport:
    K: float
    p: float
    witness: tuple
    family: dict
    ratios: np.ndarray = field(repr=False)
    skipped: int = 0

    def to_dict(self, label=vertex_label) -> dict:
        return {"K": self.K, "p": self.p, "witness": [label(v) for v in self.witness],
                "family": self.family, "skipped": self.skipped}


def pp_ratios(k: HarmonicKernel, origin_cell, mu: TestMeasure, p: float, family: BoundaryFamily):
    """Per-member ``sum_x |omega_x(f)|^p mu(x) / sum_q |f(q)|^p omega_O(q)`` (nan when undefined)."""
    m = mu.vector(k)
    supp = np.flatnonzero(m > 0)
    F = family.matrix
    den = k.row(origin_cell) @ np.abs(F) ** p
    num = m[supp] @ (np.abs(k.entries[supp] @ F) ** p) if supp.size else np.zeros(F.shape[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0.0, num / den, np.nan), num, den


def strong_pp_norm(dom: LatticeDomain, k: HarmonicKernel, mu: TestMeasure, p: float,
                   family: BoundaryFamily | None = None) -> StrongPPReport:
    if not p > 1.0:
        raise InputError(f"p must exceed 1, got {p!r}")
    family = default_family(dom, k) if family is None else family
    if len(family) == 0:
        raise InputError("test family is empty")
    ratios, _, den = pp_ratios(k, dom.origin_cell, mu, p, family)
    skipped = int(np.sum(~(den > 0.0)))
    if skipped:
        log.warning("skipping %d family members with zero denominator", skipped)
    if skipped == len(family):
        raise InputError("every family member has zero denominator")
    j = int(np.nanargmax(ratios))
    return StrongPPReport(float(ratios[j]), float(p), family.labels[j], family.describe(), ratios, skipped)


# -- equivalence ------------------------------------------------------------


@dataclass
class EquivalenceReport:
    p: float
    delta0: float
    delta: float
    outer_radii: list
    radii: list
    M: float
    K: float
    bound: float
    bound_holds: bool
    chain_holds: bool
    link_margins: dict
    chain_witness: tuple | None
    carleson: CarlesonReport = field(repr=False)
    strong: StrongPPReport = field(repr=False)

    @property
    def ratio(self) -> float:
        return self.K / self.M if self.M > 0 else float("nan")

    @property
    def passed(self) -> bool:
        return self.bound_holds and self.chain_holds

    def to_dict(self, label=vertex_label) -> dict:
        return {
            "p": self.p, "delta0": self.delta0, "delta": self.delta,
            "outer_radii": self.outer_radii, "radii": self.radii,
            "M": self.M, "K": self.K, "bound": self.bound,
            "bound_slack": self.bound * (1 + TOL_GEOM) - self.M,
            "bound_holds": self.bound_holds, "chain_holds": self.chain_holds,
            "link_margins": self.link_margins,
            "K_over_M": self.ratio,
            "carleson": self.carleson.to_dict(label),
            "strong": self.strong.to_dict(label),
        }


def check_equivalence(dom: LatticeDomain, k: HarmonicKernel, mu: TestMeasure, p: float,
                      radii=None, family: BoundaryFamily | None = None,
                      delta: float | None = None) -> EquivalenceReport:
    """Run the chain ``delta^p mu(C) <= ... <= K omega_O(Delta)`` at every ``(P, r)``.

    ``radii`` are the outer radii ``R``; the Carleson radii are ``delta R``.
    The family is always augmented by the indicators of ``Delta_{P,R}``.
    """
    outer = default_radii(dom) if radii is None else [float(r) for r in radii]
    if delta is None:
        delta0 = estimate_delta(dom, k, outer, probes=None).delta
    else:
        delta0 = float(delta)
    dlt = min(0.5, delta0)
    inner = [dlt * r for r in outer]

    geo = _Geometry(dom, k)
    centers = list(k.boundary)
    balls = indicator_family(dom, k, outer, centers)
    family = default_family(dom, k, outer) if family is None else family
    strong = strong_pp_norm(dom, k, mu, p, family.extend(balls))
    carleson = carleson_norm(dom, k, mu, inner, centers)
    carleson.delta = dlt
    K, M = strong.K, carleson.M

    m = mu.vector(k)
    omega_o = k.row(dom.origin_cell)
    W = k.entries @ balls.matrix  # omega_x(Delta_{P,R}) per interior x and (P, R)
    worst = {"link1": math.inf, "link2": math.inf, "link3": math.inf}
    witness = None
    ok = True
    for c, (_, p_cell, R) in enumerate(balls.labels):
        r = dlt * R
        in_c = geo.cyl(p_cell, r)
        mass_c = float(m[in_c].sum())
        a = dlt ** p * mass_c
        b = float(m[in_c] @ W[in_c, c] ** p)
        cc = float(m @ W[:, c] ** p)
        d = K * float(omega_o @ balls.matrix[:, c])
        margins = (b - a, cc - b, d - cc)
        scale = max(abs(a), abs(b), abs(cc), abs(d), 1e-300)
        for name, mg in zip(("link1", "link2", "link3"), margins):
            rel = mg / scale
            if rel < worst[name]:
                worst[name] = rel
                if name == "link1":
                    witness = (p_cell, r)
            if mg < -LINK_RTOL * scale:
                ok = False
    bound = dlt ** (-p) * K
    return EquivalenceReport(float(p), float(delta0), float(dlt), outer, inner, M, K, bound,
                             bool(M <= bound * (1 + TOL_GEOM)), ok, worst, witness, carleson, strong)


# -- maximal function -------------------------------------------------------


def _as_vector(k: HarmonicKernel, f) -> np.ndarray:
    return k.vector(f) if isinstance(f, Mapping) else np.asarray(f, dtype=np.float64)


def maximal_function(dom: LatticeDomain, k: HarmonicKernel, f, q_cell, radii,
                     _geo: _Geometry | None = None) -> float:
    """``f*(Q)``: the largest ``omega_O``-average of ``f`` over ``Delta(Q, r)``, ``r`` in ``radii``."""
    radii = [float(r) for r in radii]
    if not radii:
        raise InputError("radii list is empty")
    fv = _as_vector(k, f)
    geo = _geo if _geo is not None else _Geometry(dom, k)
    w = k.row(dom.origin_cell)
    best = -math.inf
    for r in radii:
        ball = geo.ball(q_cell, r)
        den = float(w[ball].sum())
        if den > 0.0:
            best = max(best, float(w[ball] @ fv[ball]) / den)
    if best == -math.inf:
        raise InputError(f"every ball around {q_cell!r} has zero measure")
    return best


def maximal_all(dom: LatticeDomain, k: HarmonicKernel, f, radii) -> np.ndarray:
    geo = _Geometry(dom, k)
    return np.array([maximal_function(dom, k, f, q, radii, geo) for q in k.boundary])


def power_mean_gap(dom: LatticeDomain, k: HarmonicKernel, f, p: float, radii) -> float:
    """Largest ``f*(Q) - ((f^p)*(Q))^(1/p)`` over boundary cells; nonpositive for ``f >= 0``."""
    fv = _as_vector(k, f)
    a = maximal_all(dom, k, fv, radii)
    b = maximal_all(dom, k, fv ** p, radii) ** (1.0 / p)
    return float(np.max(a - b))


@dataclass
class Weak11Report:
    thresholds: list
    lhs: list
    norm: float
    constants: list
    C: float

    def to_dict(self) -> dict:
        return {"thresholds": self.thresholds, "lhs": self.lhs, "norm": self.norm,
                "constants": self.constants, "C": self.C}


def weak_11_check(dom: LatticeDomain, k: HarmonicKernel, f, radii, thresholds) -> Weak11Report:
    """Empirical weak (1, 1) constant ``max_s s omega_O(f* > s) / ||f||_1``."""
    fv = _as_vector(k, f)
    if np.any(fv < 0):
        raise InputError("f must be nonnegative")
    w = k.row(dom.origin_cell)
    norm = float(w @ fv)
    if not norm > 0.0:
        raise InputError("f vanishes omega_O-almost everywhere")
    fstar = maximal_all(dom, k, fv, radii)
    lhs, consts = [], []
    for s in thresholds:
        val = float(w[fstar > s].sum())
        lhs.append(val)
        consts.append(val * s / norm)
    return Weak11Report([float(s) for s in thresholds], lhs, norm, consts, max(consts, default=0.0))
