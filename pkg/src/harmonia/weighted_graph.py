"""Finite edge-weighted graphs, subdomains and edge subdivision.

A graph is a finite vertex set with a symmetric, nonnegative weight function
that vanishes on the diagonal; ``x ~ y`` iff ``weight(x, y) > 0``.  A
subdomain is an interior vertex set together with its relative boundary,
the vertices outside the interior that have an edge into it.

Vertex identifiers are opaque hashable values.  Graph files use strings;
lattice graphs use integer tuples.  All vertices of one graph must be
mutually orderable so that interior/boundary orderings are reproducible.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Mapping

import numpy as np

from .errors import InputError

Vertex = Hashable


class WeightedGraph:
    """Immutable simple graph with positive edge weights.

    Each unordered edge is stored once in ``_weights`` (keyed by the sorted
    pair) and mirrored into read-only adjacency maps, so ``weight(x, y)``
    and ``weight(y, x)`` cannot drift apart.
    """

    __slots__ = ("_vertices", "_adj", "_order")

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[tuple[Vertex, Vertex, float]]):
        verts = list(vertices)
        vset = set(verts)
        if len(vset) != len(verts):
            raise InputError("duplicate vertex identifier")
        adj: dict[Vertex, dict[Vertex, float]] = {v: {} for v in verts}
        for u, v, w in edges:
            if u not in vset or v not in vset:
                raise InputError(f"edge ({u!r}, {v!r}) references an unknown vertex")
            if u == v:
                raise InputError(f"self-loop at {u!r}")
            w = float(w)
            if not np.isfinite(w) or w <= 0.0:
                raise InputError(f"edge ({u!r}, {v!r}) has non-positive weight {w!r}")
            if v in adj[u]:
                raise InputError(f"duplicate edge ({u!r}, {v!r})")
            adj[u][v] = w
            adj[v][u] = w
        try:
            order = sorted(verts)
        except TypeError as exc:
            raise InputError("vertex identifiers are not mutually orderable") from exc
        self._vertices = frozenset(verts)
        self._adj = adj
        self._order = tuple(order)

    @property
    def vertices(self) -> frozenset:
        return self._vertices

    @property
    def ordered_vertices(self) -> tuple:
        return self._order

    def __len__(self) -> int:
        return len(self._vertices)

    def __contains__(self, v) -> bool:
        return v in self._vertices

    def weight(self, x: Vertex, y: Vertex) -> float:
        self._check(x)
        self._check(y)
        return self._adj[x].get(y, 0.0)

    def neighbors(self, x: Vertex) -> Mapping[Vertex, float]:
        """Neighbors of ``x`` with the corresponding edge weights."""
        self._check(x)
        return self._adj[x]

    def degree(self, x: Vertex) -> float:
        return sum(self.neighbors(x).values())

    def edges(self) -> list[tuple[Vertex, Vertex, float]]:
        """Each undirected edge once, as ``(u, v, w)`` with ``u < v``."""
        out = []
        for u in self._order:
            for v, w in self._adj[u].items():
                if u < v:
                    out.append((u, v, w))
        out.sort(key=lambda e: (e[0], e[1]))
        return out

    def subdomain(self, interior: Iterable[Vertex]) -> "Subdomain":
        return Subdomain.of(self, interior)

    def _check(self, v):
        if v not in self._vertices:
            raise InputError(f"unknown vertex {v!r}")

    def __repr__(self):
        return f"WeightedGraph(|V|={len(self._vertices)}, |E|={len(self.edges())})"


@dataclass(frozen=True)
class Subdomain:
    """Interior vertex set with its (cached) relative boundary."""

    interior: frozenset
    boundary: frozenset

    @classmethod
    def of(cls, g: WeightedGraph, interior: Iterable[Vertex]) -> "Subdomain":
        inner = frozenset(interior)
        return cls(inner, frozenset(relative_boundary(g, inner)))

    @property
    def closure(self) -> frozenset:
        return self.interior | self.boundary

    def ordered_interior(self) -> list:
        return sorted(self.interior)

    def ordered_boundary(self) -> list:
        return sorted(self.boundary)


@dataclass(frozen=True)
class SubdivisionSpec:
    """Insert ``new_vertex`` on edge ``(x1, x2)`` at normalized distance ``lam`` from ``x1``."""

    edge: tuple
    lam: float
    new_vertex: Vertex = field(default=None)

    def validate(self, g: WeightedGraph) -> None:
        x1, x2 = self.edge
        if not (0.0 < self.lam < 1.0):
            raise InputError(f"lambda must lie in (0, 1), got {self.lam!r}")
        if g.weight(x1, x2) <= 0.0:
            raise InputError(f"({x1!r}, {x2!r}) is not an edge")
        if self.new_vertex is None or self.new_vertex in g:
            raise InputError(f"new vertex {self.new_vertex!r} is missing or already present")


def relative_boundary(g: WeightedGraph, interior: Iterable[Vertex]) -> set:
    """Vertices outside ``interior`` adjacent to some interior vertex."""
    inner = set(interior)
    out = set()
    for x in inner:
        for y in g.neighbors(x):
            if y not in inner:
                out.add(y)
    return out


def connected_components(g: WeightedGraph, interior: Iterable[Vertex]) -> list[frozenset]:
    """Partition ``interior`` into blocks connected through interior-interior edges.

    Blocks are returned sorted by their smallest vertex.
    """
    inner = set(interior)
    for v in inner:
        g._check(v)
    seen: set = set()
    blocks = []
    for start in sorted(inner):
        if start in seen:
            continue
        block = {start}
        seen.add(start)
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in g.neighbors(x):
                if y in inner and y not in seen:
                    seen.add(y)
                    block.add(y)
                    queue.append(y)
        blocks.append(frozenset(block))
    return blocks


def laplacian_apply(g: WeightedGraph, d: Subdomain, u: Mapping[Vertex, float], x: Vertex) -> float:
    """Graph Laplacian ``sum_y w(x, y) (u(x) - u(y))`` over neighbors in the closure."""
    if x not in d.interior:
        raise InputError(f"{x!r} is not an interior vertex")
    ux = u[x]
    total = 0.0
    closure = d.closure
    for y, w in g.neighbors(x).items():
        if y in closure:
            total += w * (ux - u[y])
    return total


def subdivision_weights(mu: float, lam: float) -> tuple[float, float]:
    """Weights ``(a, b)`` of the two half-edges ``x1-x_lam`` and ``x_lam-x2``.

    They satisfy ``a / b = (1 - lam) / lam`` and ``1/a + 1/b = 1/mu``.
    """
    return mu / lam, mu / (1.0 - lam)


def subdivide_edge(g: WeightedGraph, spec: SubdivisionSpec) -> WeightedGraph:
    spec.validate(g)
    x1, x2 = spec.edge
    a, b = subdivision_weights(g.weight(x1, x2), spec.lam)
    edges = [(u, v, w) for u, v, w in g.edges() if {u, v} != {x1, x2}]
    edges.append((x1, spec.new_vertex, a))
    edges.append((spec.new_vertex, x2, b))
    return WeightedGraph(list(g.ordered_vertices) + [spec.new_vertex], edges)


# -- construction helpers ---------------------------------------------------


def path_graph(labels: Iterable[Vertex], weights: Iterable[float] | None = None) -> WeightedGraph:
    labels = list(labels)
    if weights is None:
        weights = [1.0] * (len(labels) - 1)
    weights = list(weights)
    if len(weights) != len(labels) - 1:
        raise InputError("path needs one weight per consecutive pair")
    return WeightedGraph(labels, [(labels[i], labels[i + 1], weights[i]) for i in range(len(weights))])


def grid_graph(nx: int, ny: int, weight: float = 1.0) -> WeightedGraph:
    """``nx`` by ``ny`` grid with 4-neighbor edges; vertices are ``(i, j)`` tuples."""
    verts = [(i, j) for i in range(nx) for j in range(ny)]
    edges = []
    for i in range(nx):
        for j in range(ny):
            if i + 1 < nx:
                edges.append(((i, j), (i + 1, j), weight))
            if j + 1 < ny:
                edges.append(((i, j), (i, j + 1), weight))
    return WeightedGraph(verts, edges)


def random_connected_graph(
    n: int,
    rng: np.random.Generator,
    extra_edges: int | None = None,
    weight_range: tuple[float, float] = (0.1, 10.0),
) -> WeightedGraph:
    """Random spanning tree plus ``extra_edges`` chords, log-uniform weights.

    Vertex ids are zero-padded strings so that sorted order is numeric order.
    """
    if n < 2:
        raise InputError("need at least two vertices")
    width = len(str(n - 1))
    ids = [f"v{i:0{width}d}" for i in range(n)]
    lo, hi = np.log(weight_range[0]), np.log(weight_range[1])
    pairs = set()
    perm = rng.permutation(n)
    for k in range(1, n):
        parent = perm[rng.integers(0, k)]
        pairs.add(tuple(sorted((int(perm[k]), int(parent)))))
    if extra_edges is None:
        extra_edges = n
    max_pairs = n * (n - 1) // 2
    target = min(len(pairs) + extra_edges, max_pairs)
    while len(pairs) < target:
        a, b = rng.integers(0, n, size=2)
        if a != b:
            pairs.add((int(min(a, b)), int(max(a, b))))
    edges = [(ids[a], ids[b], float(np.exp(rng.uniform(lo, hi)))) for a, b in sorted(pairs)]
    return WeightedGraph(ids, edges)


# -- file format ------------------------------------------------------------


def graph_from_dict(data: Mapping) -> WeightedGraph:
    try:
        vertices = [str(v) for v in data["vertices"]]
        raw_edges = data["edges"]
    except (KeyError, TypeError) as exc:
        raise InputError("graph object needs 'vertices' and 'edges'") from exc
    edges = []
    seen = set()
    for e in raw_edges:
        try:
            u, v, w = str(e["u"]), str(e["v"]), float(e["w"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed edge record {e!r}") from exc
        key = frozenset((u, v))
        if key in seen:
            raise InputError(f"duplicate edge {u!r}-{v!r}")
        seen.add(key)
        edges.append((u, v, w))
    return WeightedGraph(vertices, edges)


def graph_to_dict(g: WeightedGraph) -> dict:
    return {
        "vertices": [str(v) for v in g.ordered_vertices],
        "edges": [{"u": str(u), "v": str(v), "w": w} for u, v, w in g.edges()],
    }


def load_graph(path: str | Path) -> WeightedGraph:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read graph file {path}: {exc}") from exc
    return graph_from_dict(data)
