import csv
import io
import json

import pytest
from hypothesis import given, strategies as st

from artifact.errors import BothZero, StepNotDefined, UnknownName
from artifact.extengine import ko_homology
from artifact.kfree import FiniteAbelianGroup, free_phase_group
from artifact.groups import make_Elk
from artifact.spiral import (
    anderson_dual,
    az_label,
    f2i_image_complex,
    f2i_image_real,
    generate_spiral,
    initial_state,
    ldeg,
    long_summand,
    parse_class,
    spiral_step,
)

Z = FiniteAbelianGroup(1)
ZERO = FiniteAbelianGroup()
Z2 = FiniteAbelianGroup(0, (2,))

LK5 = [(l, k) for l in range(6) for k in range(6) if 1 <= l + k <= 5]


def largest_cyclic(g):
    return max(g.torsion, default=None)


# closed forms ---------------------------------------------------------------------


@pytest.mark.parametrize("lk,want", [((1, 0), 0), ((4, 0), 3), ((1, 1), 1), ((0, 1), 0), ((5, 2), 6)])
def test_ldeg(lk, want):
    assert ldeg(*lk) == want


def test_ldeg_is_first_nonzero_degree_for_me11():
    assert ko_homology(1, 1, 0) == ZERO
    assert ko_homology(1, 1, 1) != ZERO


def test_both_zero():
    with pytest.raises(BothZero):
        ldeg(0, 0)
    with pytest.raises(BothZero):
        long_summand(0, 0, 3)


@pytest.mark.parametrize("args,want", [((1, 0, 2), 8), ((0, 1, 4), 16), ((0, 1, 0), 2), ((1, 0, 3), None)])
def test_long_summand_examples(args, want):
    assert long_summand(*args) == want


@pytest.mark.parametrize("l,k", LK5)
def test_long_summand_is_largest_cyclic_factor(l, k):
    for n in range(17):
        order = long_summand(l, k, n)
        g = ko_homology(l, k, n)
        if order is None:
            assert largest_cyclic(g) in (None, 2)
        else:
            assert largest_cyclic(g) == order


@pytest.mark.parametrize("args,order", [((1, 0, 1), 8), ((1, 1, 2), 8), ((0, 1, 3), 16)])
def test_f2i_surjections(args, order):
    img = f2i_image_real(*args)
    assert img.kind == "surjection" and img.domain == Z and img.order == order


@pytest.mark.parametrize("d", [d for d in range(0, 40) if d % 8 in (0, 7)])
def test_f2i_z2_isomorphisms(d):
    img = f2i_image_real(1, 0, d)
    assert img.kind == "isomorphism" and img.domain == Z2 and img.image == Z2


@pytest.mark.parametrize("l,k", LK5)
def test_f2i_image_sits_in_ko_homology(l, k):
    for d in range(-1, 16):
        img = f2i_image_real(l, k, d)
        target = ko_homology(l, k, d + 1) if d + 1 >= 0 else ZERO
        if img.kind == "surjection":
            assert img.order == long_summand(l, k, d + 1) == largest_cyclic(target)
        elif img.kind == "isomorphism":
            assert Z2.torsion[0] in target.torsion
        else:
            assert long_summand(l, k, d + 1) is None


@pytest.mark.parametrize("l,k", [(l, k) for l in range(4) for k in range(4) if 1 <= l + k <= 4])
def test_f2i_domain_is_the_free_classification(l, k):
    for d in range(0, 8):
        img = f2i_image_real(l, k, d)
        if img.kind != "zero":
            assert free_phase_group(make_Elk(l, k), d) == img.domain


@pytest.mark.parametrize("d", range(1, 14, 2))
def test_f2i_complex_odd_dimensions(d):
    img = f2i_image_complex(1, d)
    assert img.order == 2 ** (2 + (d - 1) // 2)


def test_f2i_complex_examples():
    assert f2i_image_complex(1, 1).order == 4
    assert f2i_image_complex(1, 3).order == 8
    assert f2i_image_complex(1, 2).kind == "zero"


def test_anderson_dual():
    assert anderson_dual(ZERO, FiniteAbelianGroup(0, (8,))) == FiniteAbelianGroup(0, (8,))
    assert anderson_dual(Z, ZERO) == Z
    assert anderson_dual(ZERO, ZERO) == ZERO


@given(st.lists(st.sampled_from([2, 4, 8, 16]), max_size=4), st.lists(st.sampled_from([2, 4, 8]), max_size=4))
def test_anderson_dual_of_torsion_has_prev_order(a, b):
    out = anderson_dual(FiniteAbelianGroup.from_invariants(0, a), FiniteAbelianGroup.from_invariants(0, b))
    assert out.order == FiniteAbelianGroup.from_invariants(0, b).order


# labels ---------------------------------------------------------------------------------


@pytest.mark.parametrize("lk,label", [((2, 1), "BDI′"), ((0, 4), "C′"), ((2, 2), "D″"), ((1, 0), "BDI"),
                                      ((0, 3), "CII"), ((3, 0), "CI"), ((4, 0), "C′"), ((1, 1), "D′")])
def test_az_label(lk, label):
    assert az_label(*lk) == label


@given(st.integers(0, 6), st.integers(0, 6))
def test_az_label_is_swap_invariant(l, k):
    assert az_label(l, k + 4) == az_label(l + 4, k)


@pytest.mark.parametrize("label", ["BDI′", "D″", "CII", "C′", "AII′", "DIII′", "CI", "AI′"])
def test_parse_class_inverts_az_label(label):
    assert az_label(*parse_class(label)) == label


def test_parse_class_ascii_primes():
    assert parse_class("BDI'") == (2, 1)
    assert parse_class("D''") == (2, 2)
    with pytest.raises(UnknownName):
        parse_class("XYZ")


# steps ----------------------------------------------------------------------------------


def test_phi_step_keeps_order():
    s = spiral_step(initial_state(1, (2, 1)), "phi")
    assert (s.d, s.lk, s.order) == (2, (2, 2), 4)


def test_psi_step_doubles_order():
    s = spiral_step(initial_state(2, (2, 2)), "psi")
    assert (s.d, s.lk, s.order) == (3, (1, 2), 8)


def test_swap_then_psi():
    s = initial_state(6, (0, 4))
    assert s.order == 16
    swapped = spiral_step(s, "swap")
    assert (swapped.d, swapped.lk, swapped.order) == (6, (4, 0), 16)
    s = spiral_step(swapped, "psi")
    assert (s.d, s.lk, s.order, s.label) == (7, (3, 0), 32, "CI")


def test_psi_from_l_zero_is_not_defined():
    with pytest.raises(StepNotDefined):
        spiral_step(initial_state(6, (0, 4)), "psi")


def test_psi_outside_admissible_range():
    with pytest.raises(StepNotDefined):
        spiral_step(initial_state(1, (1, 0)), "psi")


def test_swap_needs_four():
    with pytest.raises(StepNotDefined):
        spiral_step(initial_state(1, (2, 1)), "swap")


# whole spirals -----------------------------------------------------------------------------


BDI_PRIME_ORDERS = [4, 4, 8, 8, 16, 16, 32, 32, 64]
CII_ORDERS = [2, 2, 4, 4, 8, 8, 16, 16, 32]


def test_bdi_prime_spiral():
    t = generate_spiral(1, "BDI′", 8)
    assert t.orders() == BDI_PRIME_ORDERS
    assert t.effects() == ["iso", "x2"] * 4
    labels = [r.state.label for r in t.rows if r.map_kind != "swap"]
    assert labels == ["BDI′", "D″", "DIII′", "AII′", "CII", "C′", "CI", "AI′", "BDI′"]


def test_cii_spiral():
    t = generate_spiral(1, "CII", 8)
    assert t.orders() == CII_ORDERS
    assert [r.state.label for r in t.rows if r.map_kind != "swap"][-1] == "CII"


def test_complex_spiral():
    t = generate_spiral(1, "AIII", 6, kind="complex")
    assert t.orders()[:6] == [4, 4, 8, 8, 16, 16]
    assert [r.state.label for r in t.rows][:3] == ["AIII", "A′", "AIII"]


@pytest.mark.parametrize("d,start", [(1, "BDI′"), (1, "CII"), (3, "DIII′"), (5, "CII")])
def test_orders_match_f2i_at_every_state(d, start):
    for r in generate_spiral(d, start, 8).rows:
        assert r.state.order == f2i_image_real(*r.state.lk, r.state.d).order


def test_sixteenfold_periodicity():
    t = generate_spiral(1, "BDI′", 24)
    orders = t.orders()
    for start in range(0, 17):
        assert orders[start + 8] == 16 * orders[start]


def test_two_steps_double():
    orders = generate_spiral(1, "CII", 12).orders()
    assert all(orders[i + 2] == 2 * orders[i] for i in range(len(orders) - 2))


def test_spiral_needs_a_nonzero_start():
    with pytest.raises(StepNotDefined):
        generate_spiral(0, "BDI′", 2)


def test_csv_and_json():
    t = generate_spiral(1, "BDI′", 3)
    rows = list(csv.DictReader(io.StringIO(t.to_csv())))
    assert [r["map_kind"] for r in rows] == ["start", "phi", "psi", "phi"]
    assert [int(r["order"]) for r in rows] == [4, 4, 8, 8]
    data = json.loads(t.to_json())
    assert data[2]["l"] == 1 and data[2]["k"] == 2 and data[2]["effect"] == "x2"
    assert t.to_csv() == generate_spiral(1, "BDI′", 3).to_csv()


def test_render_lists_every_row():
    t = generate_spiral(1, "CII", 4)
    assert len(t.render().splitlines()) == len(t.rows)
