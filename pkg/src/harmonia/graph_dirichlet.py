"""Dirichlet problem on weighted graphs and the harmonic kernel.

For a subdomain with interior ``x_1..x_n`` (sorted) and boundary ``B`` the
Dirichlet problem reduces to ``A u = C f`` where

    A[i, i] = k_i + sum_j a_ij,   A[i, j] = -a_ij,   C[i, q] = w(x_i, q),

``a_ij`` the interior-interior weights and ``k_i`` the total weight from
``x_i`` into ``B``.  ``A`` is symmetric positive definite as soon as every
interior component touches ``B``.  The kernel ``K = A^{-1} C`` holds the
harmonic measures: ``K[x, q] = omega_x({q})``.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _backend
from .errors import ConsistencyError, InputError, NoBoundaryError
from .weighted_graph import (
    Subdomain,
    SubdivisionSpec,
    WeightedGraph,
    connected_components,
    relative_boundary,
)

log = logging.getLogger(__name__)

DENSE_LIMIT = 3000
DIRECT_LIMIT = 10_000
CG_RTOL = 1e-12
COLUMN_CHUNK = 64
RESIDUAL_TOL = 1e-10
CLIP_TOL = 1e-12


@dataclass(frozen=True)
class DirichletSystem:
    interior: tuple
    boundary: tuple
    matrix: sp.csr_matrix
    coupling: sp.csr_matrix

    def rhs(self, f) -> np.ndarray:
        """Right-hand side ``y = C f`` for boundary values ``f`` (ordered as ``boundary``)."""
        return self.coupling @ np.asarray(f, dtype=np.float64)


def _check_domain(g: WeightedGraph, d: Subdomain) -> list[frozenset]:
    for v in d.interior:
        g._check(v)
    if not d.interior:
        raise InputError("interior is empty")
    comps = connected_components(g, d.interior)
    for c in comps:
        if not relative_boundary(g, c):
            raise NoBoundaryError(f"component containing {min(c)!r} has no boundary")
    return comps


def _assemble(g: WeightedGraph, interior: list, boundary: list) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    ii = {v: i for i, v in enumerate(interior)}
    bi = {v: j for j, v in enumerate(boundary)}
    rows, cols, vals = [], [], []
    crow, ccol, cval = [], [], []
    for i, x in enumerate(interior):
        nb = g.neighbors(x)
        to_boundary = []
        to_interior = []
        for y in sorted(nb):
            w = nb[y]
            if y in ii:
                to_interior.append(w)
                rows.append(i)
                cols.append(ii[y])
                vals.append(-w)
            else:
                to_boundary.append(w)
                crow.append(i)
                ccol.append(bi[y])
                cval.append(w)
        rows.append(i)
        cols.append(i)
        vals.append(math.fsum(to_boundary) + math.fsum(to_interior))
    n, m = len(interior), len(boundary)
    a = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    c = sp.csr_matrix((cval, (crow, ccol)), shape=(n, m))
    a.sort_indices()
    c.sort_indices()
    return a, c


def assemble_system(g: WeightedGraph, d: Subdomain) -> DirichletSystem:
    _check_domain(g, d)
    interior = d.ordered_interior()
    boundary = d.ordered_boundary()
    a, c = _assemble(g, interior, boundary)
    return DirichletSystem(tuple(interior), tuple(boundary), a, c)


class _Factor:
    """One factorization of an SPD system, reusable across right-hand sides."""

    def __init__(self, a: sp.csr_matrix):
        self.n = a.shape[0]
        self.a = a
        if self.n <= DENSE_LIMIT:
            self.kind = "cholesky"
            self._cho = scipy.linalg.cho_factor(a.toarray(), lower=True, check_finite=False)
        elif self.n <= DIRECT_LIMIT:
            self.kind = "splu"
            self._lu = spla.splu(a.tocsc(), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                                 options={"SymmetricMode": True})
        else:
            self.kind = "cg"
            self._precond = sp.diags(1.0 / a.diagonal())

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if self.kind == "cholesky":
            return scipy.linalg.cho_solve(self._cho, b, check_finite=False)
        if self.kind == "splu":
            return self._lu.solve(b)
        cols = b.reshape(self.n, -1)
        out = np.empty_like(cols)
        for j in range(cols.shape[1]):
            x, info = spla.cg(self.a, cols[:, j], rtol=CG_RTOL, atol=0.0, M=self._precond, maxiter=10 * self.n)
            if info != 0:
                raise ConsistencyError(f"conjugate gradient did not converge (info={info})")
            out[:, j] = x
        return out.reshape(b.shape)


def _solve_columns(factor: _Factor, rhs: np.ndarray, jobs: int) -> np.ndarray:
    # Fixed chunking keeps results independent of ``jobs``.
    m = rhs.shape[1]
    chunks = [(s, min(s + COLUMN_CHUNK, m)) for s in range(0, m, COLUMN_CHUNK)]
    out = np.empty_like(rhs)

    def work(span):
        s, e = span
        out[:, s:e] = factor.solve(np.ascontiguousarray(rhs[:, s:e]))

    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, chunks))
    else:
        for span in chunks:
            work(span)
    return out


def solve_dirichlet(g: WeightedGraph, d: Subdomain, f: Mapping) -> dict:
    """Unique ``u`` on the closure with ``u = f`` on the boundary and ``Lu = 0`` inside."""
    comps = _check_domain(g, d)
    missing = [q for q in d.boundary if q not in f]
    if missing:
        raise InputError(f"boundary data missing for {sorted(missing)[:5]!r}")
    u = {q: float(f[q]) for q in d.boundary}
    scale = 1.0 + max((abs(v) for v in u.values()), default=0.0)
    for comp in comps:
        interior = sorted(comp)
        boundary = sorted(relative_boundary(g, comp))
        a, c = _assemble(g, interior, boundary)
        fvec = np.array([u[q] for q in boundary])
        y = c @ fvec
        x = _Factor(a).solve(y)
        res = float(np.max(np.abs(a @ x - y))) if len(x) else 0.0
        if res > RESIDUAL_TOL * scale:
            raise ConsistencyError(f"Dirichlet residual {res:.3e} exceeds tolerance")
        for v, val in zip(interior, x):
            u[v] = float(val)
    return u


@dataclass(frozen=True, eq=False)
class HarmonicKernel:
    """``entries[i, j] = omega_{interior[i]}({boundary[j]})``.

    ``components`` partitions the interior; ``component_boundaries[c]`` is
    the relative boundary of component ``c`` (its atoms of positive mass).
    """

    interior: tuple
    boundary: tuple
    entries: np.ndarray
    components: tuple
    component_boundaries: tuple

    def __post_init__(self):
        object.__setattr__(self, "_ii", {v: i for i, v in enumerate(self.interior)})
        object.__setattr__(self, "_bi", {v: j for j, v in enumerate(self.boundary)})
        comp_of = {}
        for c, block in enumerate(self.components):
            for v in block:
                comp_of[v] = c
        object.__setattr__(self, "_comp", comp_of)

    def row_index(self, x) -> int:
        try:
            return self._ii[x]
        except KeyError:
            raise InputError(f"{x!r} is not an interior vertex of the kernel") from None

    def col_index(self, q) -> int:
        try:
            return self._bi[q]
        except KeyError:
            raise InputError(f"{q!r} is not a boundary vertex of the kernel") from None

    def row(self, x) -> np.ndarray:
        return self.entries[self.row_index(x)]

    def component_of(self, x) -> int:
        self.row_index(x)
        return self._comp[x]

    def component_columns(self, c: int) -> np.ndarray:
        return np.array(sorted(self._bi[q] for q in self.component_boundaries[c]), dtype=np.intp)

    def component_rows(self, c: int) -> np.ndarray:
        return np.array(sorted(self._ii[x] for x in self.components[c]), dtype=np.intp)

    def vector(self, f: Mapping) -> np.ndarray:
        """Boundary data as a vector in kernel column order."""
        try:
            return np.array([float(f[q]) for q in self.boundary], dtype=np.float64)
        except KeyError as exc:
            raise InputError(f"boundary data missing for {exc.args[0]!r}") from None

    def apply(self, f) -> np.ndarray:
        """``omega_x(f)`` for every interior ``x``; ``f`` a mapping or column-ordered vector."""
        vec = self.vector(f) if isinstance(f, Mapping) else np.asarray(f, dtype=np.float64)
        return self.entries @ vec

    def with_entries(self, entries: np.ndarray) -> "HarmonicKernel":
        return HarmonicKernel(self.interior, self.boundary, np.array(entries, dtype=np.float64),
                              self.components, self.component_boundaries)


def harmonic_kernel(g: WeightedGraph, d: Subdomain, jobs: int = 1) -> HarmonicKernel:
    comps = _check_domain(g, d)
    interior = d.ordered_interior()
    boundary = d.ordered_boundary()
    ii = {v: i for i, v in enumerate(interior)}
    bi = {v: j for j, v in enumerate(boundary)}
    k = np.zeros((len(interior), len(boundary)))
    cbounds = []
    for comp in comps:
        ci = sorted(comp)
        cb = sorted(relative_boundary(g, comp))
        cbounds.append(frozenset(cb))
        a, c = _assemble(g, ci, cb)
        block = _solve_columns(_Factor(a), c.toarray(), jobs)
        rows = np.array([ii[v] for v in ci])
        cols = np.array([bi[q] for q in cb])
        k[np.ix_(rows, cols)] = block
    # Entries are probabilities; only roundoff may push them outside [0, 1].
    excess = max(float(-k.min(initial=0.0)), float(k.max(initial=0.0)) - 1.0)
    if excess > CLIP_TOL:
        raise ConsistencyError(f"kernel entry outside [0, 1] by {excess:.3e}")
    np.clip(k, 0.0, 1.0, out=k)
    k.setflags(write=False)
    return HarmonicKernel(tuple(interior), tuple(boundary), k, tuple(comps), tuple(cbounds))


def evaluate_measure(k: HarmonicKernel, x, f: Mapping) -> float:
    """``omega_x(f)``; for a boundary vertex ``x`` this is ``f(x)``."""
    if x in k._bi and x not in k._ii:
        if x not in f:
            raise InputError(f"boundary data missing for {x!r}")
        return float(f[x])
    row = k.row(x)
    return float(row @ k.vector(f))


def interpolate_on_edge(u: Mapping, spec: SubdivisionSpec) -> float:
    x1, x2 = spec.edge
    if x1 not in u or x2 not in u:
        raise InputError("edge endpoints must be in the domain of u")
    if not (0.0 <= spec.lam <= 1.0):
        raise InputError(f"lambda must lie in [0, 1], got {spec.lam!r}")
    return (1.0 - spec.lam) * u[x1] + spec.lam * u[x2]


def mean_value_solve(g: WeightedGraph, d: Subdomain, f: Mapping, tol: float = 1e-12,
                     max_iter: int = 10_000_000) -> tuple[dict, int, float]:
    """Iterate ``u(x) <- weighted average of u over neighbors`` to a fixed point.

    Independent of the factorization path; used as its oracle.  Returns
    ``(u, sweeps, last_increment)``.
    """
    _check_domain(g, d)
    verts = sorted(d.closure)
    idx = {v: i for i, v in enumerate(verts)}
    indptr = [0]
    indices, data = [], []
    for v in verts:
        if v in d.interior:
            for y, w in sorted(g.neighbors(v).items()):
                indices.append(idx[y])
                data.append(w)
        indptr.append(len(indices))
    free = np.array([v in d.interior for v in verts])
    fmean = float(np.mean([f[q] for q in d.boundary]))
    u0 = np.array([fmean if v in d.interior else float(f[v]) for v in verts])
    u, sweeps, inc = _backend.mean_value_iterate(
        np.array(indptr, dtype=np.int32), np.array(indices, dtype=np.int32),
        np.array(data, dtype=np.float64), free, u0, tol, max_iter)
    return {v: float(u[idx[v]]) for v in verts}, int(sweeps), float(inc)


# -- kernel dumps -----------------------------------------------------------


def vertex_label(v) -> str:
    if isinstance(v, tuple):
        return ":".join(str(c) for c in v)
    return str(v)


def kernel_to_csv(k: HarmonicKernel) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([vertex_label(q) for q in k.boundary])
    for x, row in zip(k.interior, k.entries):
        w.writerow([vertex_label(x)] + ["%.17g" % v for v in row])
    return buf.getvalue()


def load_kernel_csv(path: str | Path, g: WeightedGraph, d: Subdomain) -> HarmonicKernel:
    """Read a kernel dump; component structure is taken from ``(g, d)``."""
    try:
        rows = list(csv.reader(io.StringIO(Path(path).read_text())))
    except OSError as exc:
        raise InputError(f"cannot read kernel file {path}: {exc}") from exc
    if not rows:
        raise InputError("empty kernel file")
    boundary = tuple(rows[0])
    interior = []
    entries = []
    for r in rows[1:]:
        if len(r) != len(boundary) + 1:
            raise InputError(f"kernel row for {r[:1]!r} has wrong length")
        interior.append(r[0])
        try:
            entries.append([float(v) for v in r[1:]])
        except ValueError as exc:
            raise InputError(f"non-numeric kernel entry: {exc}") from exc
    labels_i = {vertex_label(v): v for v in d.interior}
    labels_b = {vertex_label(v): v for v in d.boundary}
    if set(interior) != set(labels_i) or set(boundary) != set(labels_b):
        raise InputError("kernel file does not match the subdomain")
    comps = connected_components(g, d.interior)
    cb = tuple(frozenset(relative_boundary(g, c)) for c in comps)
    arr = np.array(entries, dtype=np.float64).reshape(len(interior), len(boundary))
    return HarmonicKernel(tuple(labels_i[v] for v in interior), tuple(labels_b[q] for q in boundary),
                          arr, tuple(comps), cb)
