import math
import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from harmonia.errors import GeometryError, InputError
from harmonia.lattice_domain import (
    arc_measure,
    boundary_ball,
    cylinder,
    default_radii,
    discretize,
    estimate_delta,
    kernel_ratio,
    lattice_kernel,
    nontangential_bound_check,
    probe_cells,
    unit_square,
    verify_tsci,
)

SQUARE = [[0, 0], [1, 0], [1, 1], [0, 1]]
U_SHAPE = [[0, 0], [3, 0], [3, 3], [2, 3], [2, 1], [1, 1], [1, 3], [0, 3]]


@pytest.fixture(scope="module")
def sq16():
    dom = unit_square(1 / 16)
    return dom, lattice_kernel(dom)


@pytest.mark.parametrize("h, n", [(1 / 2, 1), (1 / 4, 9), (1 / 8, 49), (1 / 16, 225)])
def test_square_cell_counts(h, n):
    dom = unit_square(h)
    assert len(dom.interior) == n
    side = round(1 / h) - 1
    assert len(dom.boundary) == 4 * side


def test_square_geometry():
    dom = unit_square(1 / 8)
    assert dom.lipschitz == pytest.approx(1.0)
    assert dom.s == pytest.approx(2.0)
    assert dom.origin_cell == (0, 0)
    assert dom.diameter == pytest.approx(math.sqrt(2))
    assert (4, 0) in dom.boundary and (4, 0) not in dom.interior
    assert dom.angle((4, 0)) == 0.0
    assert dom.angle((0, 4)) == pytest.approx(math.pi / 2)


def test_rejections():
    with pytest.raises(InputError):
        discretize(U_SHAPE, [0.5, 0.5], 0.25)
    with pytest.raises(GeometryError):
        discretize(SQUARE, [0.5, 0.5], 0.25, anchor=[0.1, 0.0])
    with pytest.raises(InputError):
        discretize(SQUARE, [0.5, 0.5], 0.0)
    with pytest.raises(InputError):
        discretize(SQUARE, [1.5, 0.5], 0.25)
    spike = [[-0.6, -0.6], [0.6, -0.6], [0.6, 0.45], [2.2, 2.0], [2.0, 2.2], [0.45, 0.6], [-0.6, 0.6]]
    with pytest.raises(GeometryError, match="disconnected"):
        discretize(spike, [0, 0], 1.0)


def test_graph_contains_only_touching_edges():
    dom = unit_square(1 / 4)
    for x in dom.graph.ordered_vertices:
        if x in dom.boundary:
            assert all(y in dom.interior for y in dom.graph.neighbors(x))
        else:
            assert len(dom.graph.neighbors(x)) == 4


def test_symmetric_masses():
    dom = unit_square(1 / 4)
    k = lattice_kernel(dom)
    row = k.row(dom.origin_cell)
    for side in (lambda q: q[0] == 2, lambda q: q[0] == -2, lambda q: q[1] == 2, lambda q: q[1] == -2):
        assert sum(row[j] for j, q in enumerate(k.boundary) if side(q)) == pytest.approx(0.25, abs=1e-14)
    one = unit_square(1 / 2)
    k1 = lattice_kernel(one)
    assert k1.row((0, 0)) == pytest.approx([0.25] * 4, abs=1e-15)


def test_arc_refinement_monotone():
    theta = math.atan2(0.5, 0.25)
    vals = []
    for n in (8, 16, 32, 64):
        dom = unit_square(1 / n)
        vals.append(arc_measure(dom, lattice_kernel(dom), 0.0, theta))
    inc = np.diff(vals)
    assert np.all(inc > 0)
    assert np.all(inc[1:] < inc[:-1])


def test_half_arc_is_half():
    dom = unit_square(1 / 8)
    assert arc_measure(dom, lattice_kernel(dom), 0.0, math.pi) == pytest.approx(0.5, abs=1e-14)


def test_tsci(sq16):
    dom, k = sq16
    rep = verify_tsci(dom, shift=(3, 5), scale=2, kernel=k)
    assert rep.passed, rep.to_dict()
    assert rep.details["translation_exact"] and rep.details["matched_scaling_exact"]
    assert rep.details["fixed_spacing_defect"] < rep.details["fixed_spacing_defect_doubled"]


def test_cylinder_and_ball(sq16):
    dom, k = sq16
    p = (8, 0)
    r = 0.25
    ball = boundary_ball(dom, p, r)
    assert ball.cells == tuple((8, j) for j in range(-3, 4))
    cyl = cylinder(dom, p, r)
    assert cyl.corkscrew == (4, 0)
    assert cyl.clearance == pytest.approx(1.0)
    with pytest.raises(InputError):
        cylinder(dom, (0, 0), r)


def test_estimate_delta(sq16):
    dom, k = sq16
    with pytest.raises(InputError):
        estimate_delta(dom, k, [4 * dom.h])
    with pytest.raises(InputError):
        estimate_delta(dom, k, [dom.diameter])
    with pytest.raises(InputError):
        estimate_delta(dom, k, [])
    radii = default_radii(dom)
    assert radii[0] == pytest.approx(dom.diameter / 4)
    full = estimate_delta(dom, k, radii, probes=8)
    cork = estimate_delta(dom, k, radii, probes=8, corkscrew_only=True)
    assert 0 < full.delta < 1 and 0 < cork.delta < 1
    assert cork.evaluated == 8 * len(radii)
    assert full.witness[0] in probe_cells(dom, 8)
    # brute force over the half cylinders, coordinates computed by hand
    row_of = {x: i for i, x in enumerate(k.interior)}
    best = np.inf
    for p in probe_cells(dom, 8):
        a = np.array(p, float) / np.linalg.norm(p)
        n = np.array([-a[1], a[0]])
        for r in radii:
            cols = [j for j, q in enumerate(k.boundary)
                    if abs((np.subtract(q, p) * dom.h) @ n) < r and abs((np.subtract(q, p) * dom.h) @ a) < r]
            for x in k.interior:
                rel = np.subtract(x, p) * dom.h
                if abs(rel @ n) < r / 2 and abs(rel @ a) < r / 2:
                    best = min(best, k.entries[row_of[x], cols].sum())
    assert full.delta == pytest.approx(best, rel=1e-12)


def test_probe_cells(sq16):
    dom, _ = sq16
    four = probe_cells(dom, 4)
    assert four == [(8, 0), (0, 8), (-8, 0), (0, -8)]
    assert probe_cells(dom, None) == sorted(dom.boundary)


def test_kernel_ratio(sq16):
    dom, k = sq16
    o = dom.origin_cell
    q = (8, 3)
    assert kernel_ratio(k, o, q, o) == pytest.approx(1.0)
    assert kernel_ratio(k, (7, 3), q, o) > 1.0
    total = sum(kernel_ratio(k, (2, -1), b, o) * k.row(o)[k.col_index(b)] for b in k.boundary)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_nontangential(sq16):
    dom, k = sq16
    radii = default_radii(dom)
    ones = np.ones(len(k.boundary))
    rep = nontangential_bound_check(dom, k, (8, 2), 0.6, ones, radii)
    assert rep.constant == pytest.approx(1.0, abs=1e-12)
    f = np.array([1.0 if q[0] == 8 and abs(q[1]) <= 2 else 0.0 for q in k.boundary])
    consts = [nontangential_bound_check(dom, k, (8, 0), a, f, radii).constant for a in (1.2, 0.8, 0.4, 0.1)]
    assert all(b <= a + 1e-15 for a, b in zip(consts, consts[1:]))
    assert all(c > 0 for c in consts)


def test_boundary_values_nearest_point():
    dom = unit_square(1 / 4)
    vals = dom.boundary_values(lambda x, y: x + 10 * y)
    assert vals[(2, 0)] == pytest.approx(1.0 + 5.0)
    assert vals[(0, -2)] == pytest.approx(0.5)


def test_build_time():
    t0 = time.perf_counter()
    dom = unit_square(1 / 16)
    lattice_kernel(dom)
    assert time.perf_counter() - t0 < 5.0


@given(n=st.integers(2, 12), dx=st.integers(-3, 3), dy=st.integers(-3, 3))
def test_translation_invariance_property(n, dx, dy):
    h = 1.0 / (2 * n)
    dom = unit_square(h)
    shifted = discretize(np.array(SQUARE) + h * np.array([dx, dy]), [0.5 + h * dx, 0.5 + h * dy], h,
                         anchor=dom.anchor)
    moved = {(i + dx, j + dy) for i, j in dom.interior}
    assert shifted.interior == moved
    k1, k2 = lattice_kernel(dom), lattice_kernel(shifted)
    assert np.array_equal(k1.entries, k2.entries)
