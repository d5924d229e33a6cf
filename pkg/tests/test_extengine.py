import json

import numpy as np
import pytest

from artifact.errors import DegreeBeyondABPTable, UnknownName, UnsupportedInput, WindowExceeded
from artifact.extengine import (
    ABP_COMPLEX_CEILING,
    ABP_REAL_CEILING,
    ext_chart,
    groups_from_chart,
    ko_homology,
    ku_homology,
    minimal_resolution,
    parse_twist,
    spin_bordism_low,
)
from artifact.kfree import FiniteAbelianGroup
from artifact.steenrod import direct_sum, make_module, regular_module, standard_module, suspend, trivial_module

ZERO = FiniteAbelianGroup()


def G(*orders, free=0):
    return FiniteAbelianGroup.from_invariants(free, list(orders))


# closed forms used as oracles ---------------------------------------------------


def closed_form_ldeg(l, k):
    j = l // 4
    return 4 * j + k - 1 if l % 4 == 0 else 4 * j + k


def closed_form_ko(l, k, n):
    """ko_n(ME_{l,k}) modulo Whitney summands."""
    i, j = l % 4, l // 4
    if n < closed_form_ldeg(l, k):
        return ZERO
    mt = (n - 4 * j - k) // 8
    r = (n - l - k + 2 * i) % 8
    if r in (1, 2):
        return G(2)
    if r == 3:
        return G(2 ** (4 * mt + 4 - i))
    if r == 7:
        return G(2 ** (4 * mt + 5 - i))
    return ZERO


def closed_form_ku(m, n):
    twice_j = n - m + 1
    if twice_j >= 0 and twice_j % 2 == 0:
        return G(2 ** (twice_j // 2 + 1))
    return ZERO


# spin bordism of a point, through degree 15
SPIN_POINT = [G(free=1), G(2), G(2), ZERO, G(free=1), ZERO, ZERO, ZERO,
              G(free=2), G(2, 2), G(2, 2, 2), ZERO, G(free=3), ZERO, ZERO, ZERO]
SPINC_POINT = [G(free=1), ZERO, G(free=1), ZERO, G(free=2), ZERO, G(free=2), ZERO, G(free=4)]


# Ext of F2 ------------------------------------------------------------------------


def ko_ext_dim(s, n):
    """Dimension of Ext_{A(1)}^{s, s+n}(F2, F2)."""
    a, r = divmod(n, 8)
    if n < 0:
        return 0
    if r == 0:
        return int(s >= 4 * a)
    if r == 1:
        return int(s == 4 * a + 1)
    if r == 2:
        return int(s == 4 * a + 2)
    if r == 4:
        return int(s >= 4 * a + 3)
    return 0


@pytest.fixture(scope="module")
def ko_chart():
    return ext_chart(trivial_module("A1"), 10, 26)


@pytest.fixture(scope="module")
def ku_chart():
    return ext_chart(trivial_module("E1"), 8, 20)


def test_ext_a1_dimensions(ko_chart):
    for s in range(11):
        for n in range(0, 26 - s - 1):
            assert ko_chart.dim(s, n + s) == ko_ext_dim(s, n), (s, n)


def test_ext_a1_relations(ko_chart):
    h0, h1 = ko_chart.product, ko_chart.product
    # h0 h1 = 0 on the generator
    assert not (h1("h1", 1, 1) @ h0("h0", 0, 0) % 2).any()
    # h1^3 = 0 while h1^2 is not
    sq = h1("h1", 1, 2) @ h1("h1", 0, 0) % 2
    assert sq.any()
    assert not (h1("h1", 2, 4) @ sq % 2).any()
    # towers: h0 is injective in columns 0, 4 and 8
    for s, n in [(0, 0), (3, 4), (5, 4), (4, 8), (6, 8)]:
        assert h0("h0", s, s + n).any()
    # w at (4, 12) supports h1 and h1^2 into columns 9 and 10
    w = np.ones((1, 1), dtype=np.uint8)
    step = h1("h1", 4, 12) @ w % 2
    assert step.any() and (h1("h1", 5, 14) @ step % 2).any()


def test_ext_e1_is_polynomial(ku_chart):
    for s in range(9):
        for t in range(21 - 2):
            a = t - s
            want = int(a >= 0 and a % 2 == 0 and a // 2 <= s)
            assert ku_chart.dim(s, t) == want, (s, t)
    for s, t in [(0, 0), (1, 1), (1, 3), (2, 4), (3, 7)]:
        assert ku_chart.product("h0", s, t).any()
        assert ku_chart.product("v1", s, t).any()


def test_free_module_resolves_in_length_zero():
    res = minimal_resolution(regular_module("A1"), 4, 12)
    assert [res.ext_dim(s, t) for s in range(5) for t in range(12)].count(1) == 1
    assert res.ext_dim(0, 0) == 1
    assert res.check_d_squared()


def test_d_squared_vanishes():
    assert minimal_resolution(standard_module("J"), 6, 16).check_d_squared()
    assert minimal_resolution(standard_module("N1", 16), 6, 16).check_d_squared()


def test_zero_module_chart_is_empty():
    zero = make_module("A1", {}, {})
    chart = ext_chart(zero, 4, 10)
    assert chart.is_empty()
    assert groups_from_chart(chart, 3) == ZERO


def test_free_summands_do_not_change_positive_filtration():
    M = standard_module("J")
    a = ext_chart(M, 6, 18)
    b = ext_chart(direct_sum(M, suspend(regular_module("A1"), 3)), 6, 18)
    for s in range(1, 7):
        for t in range(18 - 1):
            assert a.dim(s, t) == b.dim(s, t)
    assert b.dim(0, 3) == a.dim(0, 3) + 1


# reading groups off charts -----------------------------------------------------------


def test_n1_column_two_is_z8():
    chart = ext_chart(standard_module("N1", 30), 12, 30)
    assert [s for s, d in chart.column(2)] == [0, 1, 2]
    assert groups_from_chart(chart, 2) == G(8)


def test_n0_column_four_is_z16():
    # N0 carries a desuspension, so the Thom spectrum's degree 4 is column 3 of N0
    chart = ext_chart(suspend(standard_module("N0", 30), 1), 12, 30)
    assert groups_from_chart(chart, 4) == G(16)
    assert groups_from_chart(ext_chart(standard_module("N0", 30), 12, 30), 3) == G(16)


def test_empty_column_is_zero():
    chart = ext_chart(standard_module("N1", 30), 12, 30)
    assert chart.column(3) == []
    assert groups_from_chart(chart, 3) == ZERO


def test_trivial_module_columns():
    chart = ext_chart(trivial_module("A1"), 12, 30)
    assert groups_from_chart(chart, 0) == G(free=1)
    assert groups_from_chart(chart, 1) == G(2)
    assert groups_from_chart(chart, 3) == ZERO
    assert groups_from_chart(chart, 4) == G(free=1)


def test_chart_json_round_trip(ko_chart):
    data = json.loads(json.dumps(ko_chart.to_json()))
    entries = {(e["s"], e["t"]): e["dim"] for e in data["entries"]}
    assert entries[(4, 12)] == 1 and "h0" in data and "h1" in data


def test_chart_render_is_deterministic(ko_chart):
    text = ko_chart.render(8)
    assert text == ext_chart(trivial_module("A1"), 10, 26).render(8)
    assert text.splitlines()[-1].split() == [str(n) for n in range(9)]


# ko and ku of the ME spectra -----------------------------------------------------------


LK = [(l, k) for l in range(6) for k in range(6) if 1 <= l + k <= 5]


@pytest.mark.parametrize("l,k", LK)
def test_ko_homology_matches_closed_form(l, k):
    for n in range(17):
        assert ko_homology(l, k, n) == closed_form_ko(l, k, n), n


@pytest.mark.parametrize("l,k,n,want", [(1, 0, 2, G(8)), (0, 1, 4, G(16)), (0, 1, 8, G(32)),
                                        (1, 1, 3, G(8)), (1, 1, 7, G(16))])
def test_ko_homology_examples(l, k, n, want):
    assert ko_homology(l, k, n) == want


def test_ko_homology_with_whitney():
    assert ko_homology(1, 0, 2, True) == G(8)
    assert ko_homology(1, 1, 3, True) == G(8)
    # ME_{1,1} has free generators in degrees 0 and 2 below degree 4
    assert ko_homology(1, 1, 0, True) == G(2)
    assert ko_homology(1, 1, 2) == G(2)
    assert ko_homology(1, 1, 2, True) == G(2, 2)


@pytest.mark.parametrize("m", range(1, 6))
def test_ku_homology_matches_closed_form(m):
    for n in range(17):
        assert ku_homology(m, n) == closed_form_ku(m, n), n


def test_ku_homology_examples():
    assert ku_homology(1, 2) == G(4)
    assert ku_homology(1, 1) == ZERO
    assert ku_homology(2, 5, True) == G(8)


def test_window():
    with pytest.raises(WindowExceeded):
        ko_homology(1, 0, 20)
    with pytest.raises(UnsupportedInput):
        ko_homology(0, 0, 3)


# bordism -----------------------------------------------------------------------------


@pytest.mark.parametrize("n", range(16))
def test_spin_bordism_of_a_point(n):
    assert spin_bordism_low("spin:(0,0)", n) == SPIN_POINT[n]


@pytest.mark.parametrize("n", range(9))
def test_spinc_bordism_of_a_point(n):
    assert spin_bordism_low("spinc:0", n) == SPINC_POINT[n]


def test_dpin_bordism():
    want = [G(2), G(2), G(2, 2), G(8), G(2, 2), ZERO, G(2, 2)]
    assert [spin_bordism_low("spin:(1,1)", n) for n in range(7)] == want


def test_spinc_bordism_of_me2():
    want = [G(2), G(2), G(2, 2), G(4), G(2, 2, 2, 2), G(8, 2), G(2, 2, 2, 2, 2, 2)]
    assert [spin_bordism_low("spinc:2", n) for n in range(7)] == want


def test_pin_minus_bordism():
    # ME_{1,0}: Z/2, Z/2, Z/8, 0, 0
    assert [spin_bordism_low("spin:(1,0)", n) for n in range(5)] == [G(2), G(2), G(8), ZERO, ZERO]


def test_pin_plus_bordism():
    # ME_{0,1}: Z/2, 0, Z/2, Z/2, Z/16
    assert [spin_bordism_low("spin:(0,1)", n) for n in range(5)] == [G(2), ZERO, G(2), G(2), G(16)]


def test_q8_degree_four():
    assert spin_bordism_low("q8", 4) == G(free=1)


def test_twisted_groups_are_torsion():
    for spec in ["spin:(1,0)", "spin:(0,1)", "spin:(1,1)", "spinc:1"]:
        for n in range(12):
            assert spin_bordism_low(spec, n).free_rank == 0


def test_beyond_abp_table():
    with pytest.raises(DegreeBeyondABPTable):
        spin_bordism_low("spin:(0,0)", ABP_REAL_CEILING + 1)
    with pytest.raises(DegreeBeyondABPTable):
        spin_bordism_low("spinc:1", ABP_COMPLEX_CEILING + 1)


def test_parse_twist():
    assert parse_twist("spin:(2,1)").n_vars == 3
    assert parse_twist("spinc:3").kind == "complex"
    with pytest.raises(UnknownName):
        parse_twist("pin")
    with pytest.raises(UnsupportedInput):
        parse_twist("spin:(1)")
