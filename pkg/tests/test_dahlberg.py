import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from harmonia.dahlberg_harness import (
    BoundaryFamily,
    TestMeasure,
    area_measure,
    boundary_layer_measure,
    carleson_norm,
    check_equivalence,
    corkscrew_mass,
    default_corkscrew_mass,
    default_family,
    indicator_family,
    maximal_all,
    maximal_function,
    power_mean_gap,
    pp_ratios,
    strong_pp_norm,
    uniform_layer_measure,
    weak_11_check,
)
from harmonia.errors import InputError
from harmonia.lattice_domain import _Geometry, default_radii, lattice_kernel, unit_square


@pytest.fixture(scope="module")
def sq16():
    dom = unit_square(1 / 16)
    return dom, lattice_kernel(dom)


@pytest.fixture(scope="module")
def sq8():
    dom = unit_square(1 / 8)
    return dom, lattice_kernel(dom)


def test_measure_validation():
    with pytest.raises(InputError):
        TestMeasure({(0, 0): -1.0})
    with pytest.raises(InputError):
        TestMeasure({(0, 0): math.nan})
    mu = TestMeasure({(0, 0): 2.0, (1, 0): 0.5})
    assert mu.total == 2.5
    assert mu.scaled(2.0).total == 5.0


def test_zero_measure(sq8):
    dom, k = sq8
    mu = TestMeasure({})
    radii = default_radii(dom)
    assert carleson_norm(dom, k, mu, radii).M == 0.0
    assert strong_pp_norm(dom, k, mu, 2.0, default_family(dom, k, size=10)).K == 0.0


def test_origin_mass_outside_small_cylinders(sq8):
    dom, k = sq8
    mu = TestMeasure({dom.origin_cell: 1.0})
    # the cylinder C_{P,r} reaches depth r (s = 2) and O sits at depth >= 1/2
    assert carleson_norm(dom, k, mu, [0.2, 0.3]).M == 0.0
    assert carleson_norm(dom, k, mu, [0.6]).M > 0.0


def test_single_cell_closed_form():
    dom = unit_square(1 / 2)
    k = lattice_kernel(dom)
    mu = TestMeasure({(0, 0): 1.0})
    # a ball of radius in (1/2, diam) holds three of the four atoms
    assert carleson_norm(dom, k, mu, [0.6]).M == pytest.approx(4 / 3)
    assert carleson_norm(dom, k, mu, [0.4]).M == 0.0
    for p in (1.5, 2.0, 3.0):
        fam = default_family(dom, k, size=50)
        K = strong_pp_norm(dom, k, mu, p, fam).K
        # Jensen: (mean f)^p <= mean f^p, atoms give 4^(1-p)
        assert 4.0 ** (1 - p) - 1e-15 <= K <= 1.0 + 1e-15
    const = BoundaryFamily([("one",)], np.ones((4, 1)))
    assert strong_pp_norm(dom, k, mu, 2.0, const).K == pytest.approx(1.0)


def test_area_carleson_brute_force(sq16):
    dom, k = sq16
    radii = [dom.diameter / 4, 0.2, 0.1]
    rep = carleson_norm(dom, k, area_measure(dom), radii)
    w = k.row(dom.origin_cell)
    best = 0.0
    for p in k.boundary:
        a = np.array(p, float) / np.linalg.norm(p)
        n = np.array([-a[1], a[0]])
        for r in radii:
            inside = lambda c: abs(dom.h * np.subtract(c, p) @ n) < r and abs(dom.h * np.subtract(c, p) @ a) < r
            num = sum(dom.h ** 2 for x in k.interior if inside(x))
            den = sum(w[j] for j, q in enumerate(k.boundary) if inside(q))
            best = max(best, num / den)
    assert rep.M == pytest.approx(best, rel=1e-12)
    assert max(t[4] for t in rep.ratios) == rep.M


def test_constant_data_gives_total_mass(sq8):
    dom, k = sq8
    mu = area_measure(dom)
    fam = BoundaryFamily([("one",)], np.ones((len(k.boundary), 1)))
    ratios, num, den = pp_ratios(k, dom.origin_cell, mu, 2.5, fam)
    assert den[0] == pytest.approx(1.0)
    assert ratios[0] == pytest.approx(mu.total)


@given(c=st.floats(0.01, 100.0))
def test_homogeneity(c):
    dom = unit_square(1 / 8)
    k = lattice_kernel(dom)
    mu = area_measure(dom)
    radii = default_radii(dom)
    fam = default_family(dom, k, size=20)
    m1, m2 = carleson_norm(dom, k, mu, radii).M, carleson_norm(dom, k, mu.scaled(c), radii).M
    k1, k2 = strong_pp_norm(dom, k, mu, 2.0, fam).K, strong_pp_norm(dom, k, mu.scaled(c), 2.0, fam).K
    assert m2 == pytest.approx(c * m1, rel=1e-12)
    assert k2 == pytest.approx(c * k1, rel=1e-12)


def test_monotone_in_family_and_radii(sq16):
    dom, k = sq16
    mu = area_measure(dom)
    fam = default_family(dom, k, size=60, seed=3)
    sub = BoundaryFamily(fam.labels[::2], fam.matrix[:, ::2])
    assert strong_pp_norm(dom, k, mu, 2.0, sub).K <= strong_pp_norm(dom, k, mu, 2.0, fam).K
    radii = [dom.diameter / 4, 0.2, 0.1]
    assert carleson_norm(dom, k, mu, radii[1:]).M <= carleson_norm(dom, k, mu, radii).M


def test_indicator_family_competitive(sq16):
    dom, k = sq16
    mu = boundary_layer_measure(dom, k)
    radii = default_radii(dom)
    ind = strong_pp_norm(dom, k, mu, 2.0, indicator_family(dom, k, radii)).K
    full = strong_pp_norm(dom, k, mu, 2.0, default_family(dom, k, radii, size=200)).K
    assert full / 2 <= ind <= full


def test_chain_links_hold(sq16):
    dom, k = sq16
    radii = [dom.diameter / 4]
    for mu in (area_measure(dom), boundary_layer_measure(dom, k), default_corkscrew_mass(dom, radii)):
        for p in (1.5, 2.0, 3.0):
            rep = check_equivalence(dom, k, mu, p, radii)
            assert rep.chain_holds, (mu.label, p, rep.link_margins)
            assert 0 < rep.delta <= 0.5
            assert rep.radii == pytest.approx([rep.delta * radii[0]])


def test_point_mass_at_corkscrew_bounded(sq16):
    dom, k = sq16
    R = dom.diameter / 4
    mu = corkscrew_mass(dom, (8, 0), R)
    for p in (2.0, 3.0):
        rep = check_equivalence(dom, k, mu, p, [R])
        assert rep.bound_holds and rep.chain_holds


def test_equivalence_report_dict(sq16):
    dom, k = sq16
    rep = check_equivalence(dom, k, area_measure(dom), 2.0, family=default_family(dom, k, size=10))
    d = rep.to_dict()
    for key in ("M", "K", "delta", "bound", "bound_slack", "link_margins", "carleson", "strong"):
        assert key in d
    assert isinstance(d["carleson"]["witness"]["P"], str)


def test_uniform_layer_grows_at_corners():
    Ks = []
    for n in (16, 32):
        dom = unit_square(1 / n)
        k = lattice_kernel(dom)
        Ks.append(strong_pp_norm(dom, k, uniform_layer_measure(dom), 2.0,
                                 default_family(dom, k, size=20)).K)
    assert Ks[1] > 1.5 * Ks[0]


def test_maximal_function_constant_and_atom(sq16):
    dom, k = sq16
    radii = [dom.diameter / 4, 0.2, 0.1]
    assert np.allclose(maximal_all(dom, k, np.ones(len(k.boundary)), radii), 1.0, atol=1e-14)
    q = (8, 3)
    f = np.array([1.0 if b == q else 0.0 for b in k.boundary])
    w = k.row(dom.origin_cell)
    geo = _Geometry(dom, k)
    smallest = geo.ball(q, min(radii))
    expected = w[k.col_index(q)] / w[smallest].sum()
    assert maximal_function(dom, k, f, q, radii) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(InputError):
        maximal_function(dom, k, f, q, [])


@given(seed=st.integers(0, 1000), p=st.floats(1.1, 4.0))
def test_power_mean_gap_nonpositive(seed, p):
    dom = unit_square(1 / 8)
    k = lattice_kernel(dom)
    f = np.random.default_rng(seed).uniform(0, 1, len(k.boundary))
    assert power_mean_gap(dom, k, f, p, default_radii(dom)) <= 1e-12


def test_weak_11(sq16):
    dom, k = sq16
    radii = default_radii(dom)
    ones = np.ones(len(k.boundary))
    assert weak_11_check(dom, k, ones, radii, [2.0]).C == 0.0
    spike = np.array([1.0 if b == (8, 0) else 0.0 for b in k.boundary])
    rep = weak_11_check(dom, k, spike, radii, [0.01, 0.1, 0.5, 1e6])
    assert math.isfinite(rep.C) and rep.C > 0
    assert rep.constants[-1] == 0.0
    with pytest.raises(InputError):
        weak_11_check(dom, k, -spike, radii, [1.0])
    with pytest.raises(InputError):
        weak_11_check(dom, k, np.zeros(len(k.boundary)), radii, [1.0])


def test_input_errors(sq8):
    dom, k = sq8
    mu = area_measure(dom)
    with pytest.raises(InputError):
        strong_pp_norm(dom, k, mu, 1.0)
    with pytest.raises(InputError):
        carleson_norm(dom, k, mu, [])
    with pytest.raises(InputError):
        carleson_norm(dom, k, mu, [dom.diameter])
    empty = BoundaryFamily([], np.zeros((len(k.boundary), 0)))
    with pytest.raises(InputError):
        strong_pp_norm(dom, k, mu, 2.0, empty)
