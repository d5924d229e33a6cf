import itertools

import pytest
from hypothesis import given, settings, strategies as st
from sympy import QQ

from artifact.errors import NotCliffordForm, ScalarMismatch
from artifact.groups import fermionic_product, make_C, make_Elk, make_Q8
from artifact.superalg import (
    AlgebraMap,
    clifford,
    find_superalgebra_isomorphism,
    graded_tensor,
    group_superalgebra,
    morita_class,
    opposite,
    supercenter,
)

LK5 = [(l, k) for l in range(6) for k in range(6) if l + k <= 5]


def square(A, i):
    return A.mul({i: A.K.one}, {i: A.K.one})


def test_pin_plus_algebra():
    A = group_superalgebra(make_Elk(1, 0))
    assert A.dim == 2 and A.graded_dims == (1, 1)
    a = next(i for i in range(2) if A.grading[i])
    assert square(A, a) == {A.unit: QQ.one}


def test_c_algebra_is_complex_numbers():
    A = group_superalgebra(make_C())
    assert A.dim == 2 and A.graded_dims == (2, 0)
    i = 1 - A.unit
    assert square(A, i) == {A.unit: -QQ.one}


def test_point_algebra_is_scalars():
    A = group_superalgebra(make_Elk(0, 0))
    assert A.dim == 1 and A.graded_dims == (1, 0)


@pytest.mark.parametrize("l,k", [(0, 0), (1, 1), (0, 2), (3, 1), (2, 3)])
def test_clifford_is_a_superalgebra(l, k):
    A = clifford(l, k)
    assert A.dim == 2 ** (l + k)
    A.validate()


def test_clifford_generator_relations():
    l, k = 2, 2
    A = clifford(l, k)
    gens = [1 << i for i in range(l + k)]
    for n, g in enumerate(gens):
        want = QQ.one if n < l else -QQ.one
        assert square(A, g) == {A.unit: want}
    for a, b in itertools.combinations(gens, 2):
        ab = A.mul({a: QQ.one}, {b: QQ.one})
        ba = A.mul({b: QQ.one}, {a: QQ.one})
        assert ab == {kk: -v for kk, v in ba.items()}


def test_cl11_graded_dims():
    assert clifford(1, 1).graded_dims == (2, 2)


def test_cl02_even_part_is_complex():
    A = clifford(0, 2)
    even = [i for i in range(A.dim) if not A.grading[i]]
    assert len(even) == 2
    e12 = next(i for i in even if i != A.unit)
    assert square(A, e12) == {A.unit: -QQ.one}


def test_tensor_of_clifford_generators():
    found = find_superalgebra_isomorphism(graded_tensor(clifford(1, 0), clifford(0, 1)), clifford(1, 1))
    assert isinstance(found, AlgebraMap) and found.is_isomorphism()


def test_tensor_with_scalars():
    A = clifford(1, 2)
    assert find_superalgebra_isomorphism(graded_tensor(A, clifford(0, 0)), A) is not None


def test_tensor_scalar_mismatch():
    with pytest.raises(ScalarMismatch):
        graded_tensor(clifford(1, 0), clifford(1, 0, field="QQ_I"))


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
def test_clifford_tensor_law(m1, n1, m2, n2):
    if m1 + n1 + m2 + n2 > 5:
        return
    T = graded_tensor(clifford(m1, n1), clifford(m2, n2))
    if T.dim <= 16:
        T.validate()
    assert find_superalgebra_isomorphism(T, clifford(m1 + m2, n1 + n2)) is not None


@pytest.mark.parametrize("m,n", [(m, n) for m in range(4) for n in range(4) if m + n <= 3])
def test_opposite_swaps_signature(m, n):
    assert find_superalgebra_isomorphism(opposite(clifford(m, n)), clifford(n, m)) is not None


def test_opposite_of_commutative_even_algebra():
    A = group_superalgebra(make_C())
    assert opposite(A).table == A.table


@pytest.mark.parametrize("l,k", [(1, 2), (2, 1), (0, 3)])
def test_opposite_is_an_involution(l, k):
    A = clifford(l, k)
    assert opposite(opposite(A)).table == A.table


@pytest.mark.parametrize("l,k", LK5)
def test_clifford_supercenter_is_one_dimensional(l, k):
    assert len(supercenter(clifford(l, k))) == 1


def test_supercenter_of_commutative_even_algebra():
    A = group_superalgebra(make_C())
    assert len(supercenter(A)) == A.dim


def test_supercenter_of_e11_algebra():
    assert len(supercenter(group_superalgebra(make_Elk(1, 1)))) == 1


@pytest.mark.parametrize("l,k", LK5)
def test_group_algebra_is_clifford(l, k):
    found = find_superalgebra_isomorphism(group_superalgebra(make_Elk(l, k)), clifford(l, k))
    assert found is not None and found.is_isomorphism()


def test_cl40_cl04():
    assert find_superalgebra_isomorphism(clifford(4, 0), clifford(0, 4)) is not None


def test_cl10_cl01_not_isomorphic():
    assert find_superalgebra_isomorphism(clifford(1, 0), clifford(0, 1)) is None


def test_complexifications_agree():
    A = group_superalgebra(make_Elk(1, 0), charged=True)
    B = group_superalgebra(make_Elk(0, 1), charged=True)
    assert find_superalgebra_isomorphism(A, B) is not None


GROUP_PAIRS = [((1, 0), (0, 1)), ((1, 1), (1, 0)), ((2, 0), (0, 2)), ("Q8", (1, 0)), ("C", (0, 1)),
               ("Q8", (0, 1))]


def _group(spec):
    return {"Q8": make_Q8, "C": make_C}[spec]() if isinstance(spec, str) else make_Elk(*spec)


@pytest.mark.parametrize("a,b", GROUP_PAIRS)
def test_group_algebra_is_monoidal(a, b):
    G, H = _group(a), _group(b)
    left = group_superalgebra(fermionic_product(G, H))
    right = graded_tensor(group_superalgebra(G), group_superalgebra(H))
    assert find_superalgebra_isomorphism(left, right) is not None


# Morita classes --------------------------------------------------------------


def test_morita_cl11():
    assert morita_class(clifford(1, 1)) == 0


def test_morita_scalars():
    assert morita_class(clifford(0, 0)) == 0


def test_morita_e30():
    assert morita_class(group_superalgebra(make_Elk(3, 0))) == 3


@pytest.mark.parametrize("l,k", [(l, k) for l in range(7) for k in range(7) if l + k <= 6])
def test_morita_class_of_clifford(l, k):
    assert morita_class(clifford(l, k)) == (l - k) % 8


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([(l, k) for l in range(4) for k in range(4) if l + k <= 3]),
       st.sampled_from([(l, k) for l in range(4) for k in range(4) if l + k <= 3]))
def test_morita_class_is_additive(a, b):
    if sum(a) + sum(b) > 6:
        return
    A, B = clifford(*a), clifford(*b)
    assert morita_class(graded_tensor(A, B)) == (morita_class(A) + morita_class(B)) % 8


def test_morita_rejects_complex_scalars():
    with pytest.raises(NotCliffordForm):
        morita_class(clifford(1, 0, field="QQ_I"))


@pytest.mark.parametrize("A", [clifford(2, 1), group_superalgebra(make_Q8()),
                               graded_tensor(group_superalgebra(make_Elk(1, 0)), group_superalgebra(make_C()))],
                         ids=["Cl21", "Q8", "E10xC"])
def test_every_constructed_algebra_is_valid(A):
    A.validate()


def test_json_shape():
    data = clifford(1, 0).to_json()
    assert data["dim"] == 2 and data["grading"] == [0, 1]
    assert [0, 0, 0, 1, 1] in data["structure"]
