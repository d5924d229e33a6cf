"""Graded Clifford modules, Clifford module quotients and free-fermion K-groups.

Simple graded modules of Cl(l, k) are built as left ideals A·e for even
idempotents e = prod (1 + s_i p_i)/2, where the p_i form a maximal family of
commuting even basis monomials squaring to +1.  Everything is done on bitmask
monomials with integer (signed permutation) actions, so the construction stays
cheap well past the dimensions used elsewhere in the package.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from sympy import Matrix, factorint
from sympy.matrices.normalforms import invariant_factors

from .errors import NotCliffordForm, RangeExceeded, UnsupportedGroup
from .groups import FermionicGroup, _clifford_sign
from .superalg import (
    SuperAlgebra,
    clifford,
    complex_morita_class,
    group_superalgebra,
    has_complex_structure,
    morita_class,
    supercenter,
)

__all__ = [
    "FiniteAbelianGroup",
    "GradedModule",
    "irreducible_graded_modules",
    "cmq",
    "ko_point",
    "ku_point",
    "free_phase_group",
    "MAX_GENERATORS",
]

MAX_GENERATORS = 12


# ---------------------------------------------------------------------------
# finite abelian groups


@dataclass(frozen=True, order=True)
class FiniteAbelianGroup:
    """Z^free_rank plus cyclic torsion, torsion orders stored as sorted prime powers."""

    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    @classmethod
    def from_invariants(cls, free_rank: int, orders) -> "FiniteAbelianGroup":
        parts: list[int] = []
        for n in orders:
            n = abs(int(n))
            if n == 0:
                free_rank += 1
                continue
            parts.extend(p ** e for p, e in factorint(n).items())
        return cls(free_rank, tuple(sorted(parts)))

    @classmethod
    def parse(cls, text: str) -> "FiniteAbelianGroup":
        """Inverse of ``str``: accepts '0', 'Z', 'Z^2', 'Z/2', 'Z + Z/2 + Z/4'."""
        text = text.replace("⊕", "+").replace(" ", "")
        if text in ("", "0"):
            return cls()
        free, orders = 0, []
        for term in text.split("+"):
            if term == "Z":
                free += 1
            elif term.startswith("Z^"):
                free += int(term[2:])
            elif term.startswith("Z/"):
                base = term[2:]
                if "^" in base:
                    b, e = base.split("^")
                    orders.append(int(b) ** int(e))
                else:
                    orders.append(int(base))
            else:
                raise ValueError(f"cannot parse group term {term!r}")
        return cls.from_invariants(free, orders)

    def __add__(self, other: "FiniteAbelianGroup") -> "FiniteAbelianGroup":
        return FiniteAbelianGroup(self.free_rank + other.free_rank,
                                  tuple(sorted(self.torsion + other.torsion)))

    @property
    def order(self) -> int | None:
        """Cardinality, or None when the group is infinite."""
        if self.free_rank:
            return None
        out = 1
        for t in self.torsion:
            out *= t
        return out

    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __str__(self) -> str:
        terms = []
        if self.free_rank == 1:
            terms.append("Z")
        elif self.free_rank > 1:
            terms.append(f"Z^{self.free_rank}")
        terms.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(terms) if terms else "0"

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}


ZERO = FiniteAbelianGroup()
Z = FiniteAbelianGroup(1)
Z2 = FiniteAbelianGroup(0, (2,))

_KO = (Z, Z2, Z2, ZERO, Z, ZERO, ZERO, ZERO)


def ko_point(n: int) -> FiniteAbelianGroup:
    return _KO[n % 8]


def ku_point(n: int) -> FiniteAbelianGroup:
    return Z if n % 2 == 0 else ZERO


# ---------------------------------------------------------------------------
# graded Clifford modules


def _neg_mask(l: int, k: int) -> int:
    return sum(1 << i for i in range(l, l + k))


def _mono(s: int, t: int, neg: int) -> tuple[int, int]:
    return _clifford_sign(s, t, neg), s ^ t


@dataclass(frozen=True)
class GradedModule:
    """A graded Cl(l, k)-module given by integer matrices of the generators.

    Basis vectors are ordered even block first, then odd block.
    """

    l: int
    k: int
    dims: tuple[int, int]
    generators: tuple = field(compare=False)

    @property
    def dim(self) -> int:
        return self.dims[0] + self.dims[1]

    @property
    def algebra(self) -> SuperAlgebra:
        return clifford(self.l, self.k)

    def action(self, mask: int) -> np.ndarray:
        """Matrix of the basis monomial e_S (S given as a bitmask)."""
        # entries stay in {0, 1, -1}, so float products are exact and use BLAS
        out = np.eye(self.dim)
        for i in range(self.l + self.k):
            if mask >> i & 1:
                out = out @ self.generators[i]
        return np.rint(out).astype(np.int64)

    def restrict(self, n_gens: int) -> "GradedModule":
        """Restriction along Cl(l, k') -> Cl(l, k) keeping the first generators."""
        if n_gens < self.l:
            raise ValueError("restriction must keep every positive generator")
        return GradedModule(self.l, n_gens - self.l, self.dims, self.generators[:n_gens])

    def check_relations(self) -> bool:
        """Clifford relations and parity of every generator, in exact integers."""
        n = self.l + self.k
        ident = np.eye(self.dim, dtype=np.int64)
        p = self.dims[0]
        for i, g in enumerate(self.generators):
            if g[:p, :p].any() or g[p:, p:].any():
                return False
            want = ident if i < self.l else -ident
            if not np.array_equal(g @ g, want):
                return False
        for i, j in itertools.combinations(range(n), 2):
            a, b = self.generators[i], self.generators[j]
            if (a @ b + b @ a).any():
                return False
        return True

    def character(self, masks) -> tuple[int, ...]:
        """Traces on the even block of the given even monomials, then dim of the odd block."""
        p = self.dims[0]
        return tuple(int(np.trace(self.action(m)[:p, :p])) for m in masks) + (self.dims[1],)

    def to_json(self) -> dict:
        return {"l": self.l, "k": self.k, "dims": list(self.dims),
                "generators": [g.tolist() for g in self.generators]}


def _involution_family(l: int, k: int) -> list[int]:
    """Greedy maximal family of commuting even monomials with square +1."""
    n = l + k
    neg = _neg_mask(l, k)
    chosen: list[int] = []
    span = {0}
    for m in range(1, 1 << n):
        if bin(m).count("1") % 2 or m in span:
            continue
        if _mono(m, m, neg)[0] != 1:
            continue
        if any(_mono(m, p, neg)[0] != _mono(p, m, neg)[0] for p in chosen):
            continue
        chosen.append(m)
        span |= {s ^ m for s in span}
    return chosen


def _family_group(family: list[int], signs: tuple[int, ...], neg: int) -> dict[int, int]:
    """mask -> c such that e_mask acts on the idempotent as the scalar c."""
    group = {0: 1}
    for p, s in zip(family, signs):
        new = {}
        for q, c in group.items():
            sign, mask = _mono(q, p, neg)
            # e_q e_p = sign e_mask, and e_q e_p acts as c * s
            new[mask] = c * s * sign
        group.update(new)
    return group


def _ideal_module(l: int, k: int, family: list[int], signs: tuple[int, ...]) -> GradedModule:
    n = l + k
    neg = _neg_mask(l, k)
    chi = _family_group(family, signs, neg)
    rep_of: dict[int, tuple[int, int]] = {}
    reps: list[int] = []
    for w in range(1 << n):
        if w in rep_of:
            continue
        reps.append(w)
        for q, c in chi.items():
            sign, mask = _mono(w, q, neg)
            # e_mask e = sign * e_w e_q e = sign * c * (e_w e)
            rep_of[mask] = (w, sign * c)
    reps.sort(key=lambda r: (bin(r).count("1") % 2, r))
    pos = {r: i for i, r in enumerate(reps)}
    d = len(reps)
    gens = []
    for i in range(n):
        mat = np.zeros((d, d), dtype=np.int64)
        for r in reps:
            sign, w = _mono(1 << i, r, neg)
            rep, c = rep_of[w]
            mat[pos[rep], pos[r]] = sign * c
        gens.append(mat)
    even = sum(1 for r in reps if bin(r).count("1") % 2 == 0)
    return GradedModule(l, k, (even, d - even), tuple(gens))


def _swap_parity(M: GradedModule) -> GradedModule:
    p, q = M.dims
    perm = list(range(p, p + q)) + list(range(p))
    gens = tuple(g[np.ix_(perm, perm)] for g in M.generators)
    return GradedModule(M.l, M.k, (q, p), gens)


def _sign_orbit_reps(l: int, k: int, family: list[int]) -> list[tuple[int, ...]]:
    """One sign vector per isomorphism class of the ideals A_0 e.

    Conjugating e by an even monomial m flips the signs of the p_i that
    anticommute with m, and two such ideals are isomorphic exactly when their
    sign vectors differ by one of these flips.
    """
    neg = _neg_mask(l, k)
    basis: dict[int, int] = {}  # pivot bit -> reduced vector

    def reduce(v: int) -> int:
        for pivot in sorted(basis, reverse=True):
            if v >> pivot & 1:
                v ^= basis[pivot]
        return v

    for m in range(1 << (l + k)):
        if bin(m).count("1") % 2:
            continue
        flip = sum(1 << i for i, p in enumerate(family) if _mono(m, p, neg)[0] != _mono(p, m, neg)[0])
        flip = reduce(flip)
        if flip:
            basis[flip.bit_length() - 1] = flip
    seen: set[int] = set()
    reps = []
    for v in range(1 << len(family)):
        key = reduce(v)
        if key not in seen:
            seen.add(key)
            reps.append(tuple(-1 if v >> i & 1 else 1 for i in range(len(family))))
    return reps


@lru_cache(maxsize=None)
def _simples(l: int, k: int) -> tuple[tuple[GradedModule, ...], tuple[int, ...]]:
    n = l + k
    if n == 0:
        base = GradedModule(0, 0, (1, 0), ())
        return (base, _swap_parity(base)), (0,)
    family = _involution_family(l, k)
    masks = tuple(sorted(_family_group(family, (1,) * len(family), _neg_mask(l, k))))
    found = [_ideal_module(l, k, family, signs) for signs in _sign_orbit_reps(l, k, family)]
    return tuple(found), masks


def irreducible_graded_modules(l: int, k: int, max_generators: int = MAX_GENERATORS) -> list[GradedModule]:
    """Pairwise non-isomorphic simple graded Cl(l, k)-modules."""
    if l < 0 or k < 0:
        raise ValueError("l and k must be nonnegative")
    if l + k > max_generators:
        raise RangeExceeded(f"l + k = {l + k} exceeds {max_generators}")
    return list(_simples(l, k)[0])


def _decompose(M: GradedModule) -> tuple[int, ...]:
    """Multiplicities of the simples of Cl(M.l, M.k) in M."""
    simples, masks = _simples(M.l, M.k)
    C = np.array([S.character(masks) for S in simples], dtype=np.int64)
    v = np.array(M.character(masks), dtype=np.int64)
    x, *_ = np.linalg.lstsq(C.T.astype(float), v.astype(float), rcond=None)
    mult = np.rint(x).astype(np.int64)
    if not np.array_equal(mult @ C, v) or (mult < 0).any():
        raise ArithmeticError("character decomposition failed")
    return tuple(int(m) for m in mult)


def cmq(l: int, k: int, n: int, max_generators: int = MAX_GENERATORS) -> FiniteAbelianGroup:
    """CMQ_n(Cl(l, k)): simples of Cl(l, k+n) modulo restrictions from Cl(l, k+n+1)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if l + k + n + 1 > max_generators:
        raise RangeExceeded(f"needs {l + k + n + 1} generators, limit {max_generators}")
    small = irreducible_graded_modules(l, k + n, max_generators)
    big = irreducible_graded_modules(l, k + n + 1, max_generators)
    rows = [_decompose(T.restrict(l + k + n)) for T in big]
    rel = Matrix(rows)
    rank = rel.rank()
    factors = [f for f in invariant_factors(rel) if f != 0] if rank else []
    return FiniteAbelianGroup.from_invariants(len(small) - rank, [f for f in factors if abs(f) != 1])


# ---------------------------------------------------------------------------
# free phases


def free_phase_group(G: FermionicGroup, d: int, charged: bool = False) -> FiniteAbelianGroup:
    """K_{2-d} of the (complex, when charged) fermionic group algebra of G."""
    A = group_superalgebra(G, charged)
    center = supercenter(A)
    try:
        if charged:
            if len(center) != 1:
                raise NotCliffordForm("complexified algebra is not simple")
            return ku_point(2 - d - complex_morita_class(A))
        if has_complex_structure(A):
            if len(center) != 2:
                raise NotCliffordForm("algebra with complex structure is not simple")
            return ku_point(2 - d - complex_morita_class(A))
        if len(center) != 1:
            raise NotCliffordForm("algebra is not central simple")
        return ko_point(2 - d - morita_class(A))
    except NotCliffordForm as exc:
        raise UnsupportedGroup(str(exc)) from exc
