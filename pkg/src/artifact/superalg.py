"""Finite-dimensional superalgebras with exact structure constants.

Scalars live in sympy's exact domains ``QQ`` (rationals) or ``QQ_I`` (Gaussian
rationals).  Every algebra built here has a distinguished basis in which the
product of two basis elements is a scalar multiple of a third; such algebras
are called *monomial* below.  The isomorphism search and the Morita peeling
both work inside that basis.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from .errors import DimensionMismatch, NotCliffordForm, ScalarMismatch
from .groups import FermionicGroup, _canonical, _clifford_sign, make_Q8

__all__ = [
    "SuperAlgebra",
    "AlgebraMap",
    "group_superalgebra",
    "clifford",
    "graded_tensor",
    "opposite",
    "supercenter",
    "find_superalgebra_isomorphism",
    "morita_class",
    "complex_morita_class",
    "has_complex_structure",
]

FIELDS = {"QQ": QQ, "QQ_I": QQ_I}


def _field(tag: str):
    return FIELDS[tag]


@dataclass(frozen=True)
class SuperAlgebra:
    """Structure constants: ``table[i][j]`` is a tuple of (k, coefficient)."""

    dim: int
    field: str
    table: tuple
    grading: tuple[int, ...]
    unit: int = 0
    labels: tuple[str, ...] = ()

    @property
    def K(self):
        return _field(self.field)

    def product(self, i: int, j: int) -> dict:
        return dict(self.table[i][j])

    def mul(self, x: dict, y: dict) -> dict:
        """Multiply two sparse vectors {basis index: coefficient}."""
        out: dict = {}
        for i, a in x.items():
            for j, b in y.items():
                for k, c in self.table[i][j]:
                    out[k] = out.get(k, self.K.zero) + a * b * c
        return {k: v for k, v in out.items() if v != self.K.zero}

    def basis_vector(self, i: int, coeff=None) -> dict:
        return {i: self.K.one if coeff is None else coeff}

    @property
    def graded_dims(self) -> tuple[int, int]:
        odd = sum(self.grading)
        return (self.dim - odd, odd)

    def is_monomial(self) -> bool:
        return all(len(self.table[i][j]) == 1 for i in range(self.dim) for j in range(self.dim))

    def mono(self, i: int, j: int):
        """(k, c) with e_i e_j = c e_k, for monomial algebras."""
        (k, c), = self.table[i][j]
        return k, c

    def validate(self) -> None:
        """Exhaustive check of associativity, unit laws and grading additivity."""
        K = self.K
        for i in range(self.dim):
            if self.product(self.unit, i) != {i: K.one} or self.product(i, self.unit) != {i: K.one}:
                raise ValueError("unit law fails")
            for j in range(self.dim):
                for k, _ in self.table[i][j]:
                    if self.grading[k] != self.grading[i] ^ self.grading[j]:
                        raise ValueError("product is not grading-additive")
        for i, j, k in itertools.product(range(self.dim), repeat=3):
            left = self.mul(self.mul({i: K.one}, {j: K.one}), {k: K.one})
            right = self.mul({i: K.one}, self.mul({j: K.one}, {k: K.one}))
            if left != right:
                raise ValueError(f"associativity fails on {(i, j, k)}")

    def to_json(self) -> dict:
        triples = []
        for i in range(self.dim):
            for j in range(self.dim):
                for k, c in self.table[i][j]:
                    triples.append([i, j, k, *_to_fraction_pair(self.K, c)])
        return {"dim": self.dim, "field": self.field, "structure": triples,
                "grading": list(self.grading), "unit": self.unit}


def _to_fraction_pair(K, c) -> list:
    if K is QQ:
        q = K.to_sympy(c)
        return [int(q.p), int(q.q)]
    z = K.to_sympy(c)
    return [str(z)]


def _build(dim, field, products, grading, unit=0, labels=()) -> SuperAlgebra:
    """``products(i, j)`` returns a dict {k: coefficient in the field}."""
    table = tuple(
        tuple(tuple(sorted(products(i, j).items())) for j in range(dim)) for i in range(dim)
    )
    return SuperAlgebra(dim, field, table, tuple(grading), unit, tuple(labels))


@dataclass(frozen=True)
class AlgebraMap:
    source: SuperAlgebra
    target: SuperAlgebra
    images: tuple  # images[i] = sparse vector in the target

    def __call__(self, x: dict) -> dict:
        out: dict = {}
        K = self.target.K
        for i, a in x.items():
            for k, c in self.images[i].items():
                out[k] = out.get(k, K.zero) + a * c
        return {k: v for k, v in out.items() if v != K.zero}

    def is_isomorphism(self) -> bool:
        A, B = self.source, self.target
        K = A.K
        if A.dim != B.dim or self.images[A.unit] != {B.unit: B.K.one}:
            return False
        for i in range(A.dim):
            if any(B.grading[k] != A.grading[i] for k in self.images[i]):
                return False
        for i in range(A.dim):
            for j in range(A.dim):
                if self(A.mul({i: K.one}, {j: K.one})) != B.mul(self.images[i], self.images[j]):
                    return False
        rows = [[self.images[i].get(k, B.K.zero) for k in range(B.dim)] for i in range(A.dim)]
        return DomainMatrix(rows, (A.dim, B.dim), B.K).rank() == A.dim


# ---------------------------------------------------------------------------
# constructions


def group_superalgebra(G: FermionicGroup, charged: bool = False) -> SuperAlgebra:
    """Twisted group algebra: basis G_b, e_g e_h = (-1)^omega(g,h) e_{gh}."""
    G = _canonical(G)
    K = QQ_I if charged else QQ
    reps = G.coset_reps()
    pos = {}
    for i, r in enumerate(reps):
        pos[r] = i
        pos[G.mult[G.parity][r]] = i

    def products(i, j):
        prod = G.mult[reps[i]][reps[j]]
        k = pos[prod]
        return {k: K.one if prod == reps[k] else -K.one}

    labels = [G.labels[r] for r in reps] if G.labels else [str(r) for r in reps]
    return _build(len(reps), "QQ_I" if charged else "QQ", products,
                  [G.grading[r] for r in reps], 0, labels)


def clifford(l: int, k: int, field: str = "QQ") -> SuperAlgebra:
    """Cl(l, k): odd generators, l squaring to +1 and k squaring to -1."""
    n = l + k
    K = _field(field)
    neg = sum(1 << i for i in range(l, n))

    def products(s, t):
        return {s ^ t: K.one if _clifford_sign(s, t, neg) > 0 else -K.one}

    labels = ["".join(f"e{i + 1}" for i in range(n) if s >> i & 1) or "1" for s in range(1 << n)]
    return _build(1 << n, field, products, [bin(s).count("1") & 1 for s in range(1 << n)], 0, labels)


def graded_tensor(A: SuperAlgebra, B: SuperAlgebra) -> SuperAlgebra:
    """(a1 x b1)(a2 x b2) = (-1)^{|b1||a2|} a1 a2 x b1 b2."""
    if A.field != B.field:
        raise ScalarMismatch(f"{A.field} vs {B.field}")
    K = A.K
    nb = B.dim

    def products(p, q):
        a1, b1 = divmod(p, nb)
        a2, b2 = divmod(q, nb)
        sign = -K.one if B.grading[b1] and A.grading[a2] else K.one
        out: dict = {}
        for ka, ca in A.table[a1][a2]:
            for kb, cb in B.table[b1][b2]:
                idx = ka * nb + kb
                out[idx] = out.get(idx, K.zero) + sign * ca * cb
        return {k: v for k, v in out.items() if v != K.zero}

    grading = [A.grading[a] ^ B.grading[b] for a in range(A.dim) for b in range(nb)]
    labels = []
    if A.labels and B.labels:
        labels = [f"{A.labels[a]}(x){B.labels[b]}" for a in range(A.dim) for b in range(nb)]
    return _build(A.dim * nb, A.field, products, grading, A.unit * nb + B.unit, labels)


def opposite(A: SuperAlgebra) -> SuperAlgebra:
    """a^op b^op = (-1)^{|a||b|} (b a)^op."""
    K = A.K

    def products(i, j):
        sign = -K.one if A.grading[i] and A.grading[j] else K.one
        return {k: sign * c for k, c in A.table[j][i]}

    return _build(A.dim, A.field, products, A.grading, A.unit, A.labels)


def _solve_nullspace(rows: list[list], ncols: int, K) -> list[list]:
    if not rows:
        return [[K.one if c == r else K.zero for c in range(ncols)] for r in range(ncols)]
    M = DomainMatrix(rows, (len(rows), ncols), K)
    ns = M.nullspace().to_Matrix()
    return [[K.from_sympy(ns[r, c]) for c in range(ncols)] for r in range(ns.rows)]


def supercenter(A: SuperAlgebra) -> list[dict]:
    """Basis of {z homogeneous : a z = (-1)^{|a||z|} z a for all a}."""
    K = A.K
    basis: list[dict] = []
    for parity in (0, 1):
        idx = [i for i in range(A.dim) if A.grading[i] == parity]
        rows = []
        for a in range(A.dim):
            sign = -K.one if (A.grading[a] and parity) else K.one
            # coefficient of e_t in a z - sign z a, as linear forms in z
            block = [[K.zero] * len(idx) for _ in range(A.dim)]
            for col, z in enumerate(idx):
                for t, c in A.table[a][z]:
                    block[t][col] += c
                for t, c in A.table[z][a]:
                    block[t][col] -= sign * c
            rows.extend(r for r in block if any(x != K.zero for x in r))
        for vec in _solve_nullspace(rows, len(idx), K):
            basis.append({idx[c]: v for c, v in enumerate(vec) if v != K.zero})
    return basis


# ---------------------------------------------------------------------------
# isomorphism search inside the monomial basis


def _units(K):
    if K is QQ_I:
        return [K.one, -K.one, K(0, 1), -K(0, 1)]
    return [K.one, -K.one]


def _generators(A: SuperAlgebra) -> list[int]:
    """Greedy generating set of basis elements in index order."""
    span = {A.unit}
    gens: list[int] = []
    for i in range(A.dim):
        if i in span:
            continue
        gens.append(i)
        frontier = deque(span)
        span = set(span)
        while frontier:
            x = frontier.popleft()
            for g in gens:
                for k, _ in A.table[x][g] + A.table[g][x]:
                    if k not in span:
                        span.add(k)
                        frontier.append(k)
        if len(span) == A.dim:
            break
    return gens


def _extend(A, B, mp: dict, new: int, image) -> dict | None:
    """Close a partial monomial map {i: (j, unit)} under multiplication."""
    mp = dict(mp)
    if new in mp:
        return mp if mp[new] == image else None
    mp[new] = image
    used = {v[0] for v in mp.values()}
    if len(used) != len(mp):
        return None
    queue = deque([new])
    while queue:
        a = queue.popleft()
        for b in list(mp):
            for x, y in ((a, b), (b, a)):
                z, c = A.mono(x, y)
                (bx, ux), (by, uy) = mp[x], mp[y]
                w, d = B.mono(bx, by)
                img = (w, ux * uy * d / c)
                if z in mp:
                    if mp[z] != img:
                        return None
                else:
                    if w in used:
                        return None
                    mp[z] = img
                    used.add(w)
                    queue.append(z)
    return mp


def find_superalgebra_isomorphism(A: SuperAlgebra, B: SuperAlgebra) -> AlgebraMap | None:
    """Search for an isomorphism sending basis monomials to unit multiples of monomials.

    A ``None`` result means no isomorphism exists inside that search space.
    """
    if A.field != B.field:
        raise ScalarMismatch(f"{A.field} vs {B.field}")
    if A.dim != B.dim or A.graded_dims != B.graded_dims:
        raise DimensionMismatch(f"{A.graded_dims} vs {B.graded_dims}")
    if not (A.is_monomial() and B.is_monomial()):
        return None
    K = A.K
    units = _units(K)
    start = _extend(A, B, {}, A.unit, (B.unit, K.one))
    gens = _generators(A)

    def search(i: int, mp: dict):
        if i == len(gens):
            return mp if len(mp) == A.dim else None
        g = gens[i]
        if g in mp:
            return search(i + 1, mp)
        for j in range(B.dim):
            if B.grading[j] != A.grading[g]:
                continue
            for u in units:
                ext = _extend(A, B, mp, g, (j, u))
                if ext is not None:
                    found = search(i + 1, ext)
                    if found is not None:
                        return found
        return None

    found = search(0, start)
    if found is None:
        return None
    images = tuple({found[i][0]: found[i][1]} for i in range(A.dim))
    hom = AlgebraMap(A, B, images)
    assert hom.is_isomorphism()
    return hom


# ---------------------------------------------------------------------------
# Morita class by peeling off copies of Cl(1,1)


def _square_sign(A: SuperAlgebra, i: int):
    k, c = A.mono(i, i)
    if k != A.unit:
        return None
    return c


def _supercommutes(A: SuperAlgebra, m: int, u: int) -> bool:
    k1, c1 = A.mono(m, u)
    k2, c2 = A.mono(u, m)
    sign = -1 if A.grading[m] and A.grading[u] else 1
    return k1 == k2 and c1 == sign * c2


def _subalgebra(A: SuperAlgebra, idx: list[int]) -> SuperAlgebra:
    pos = {i: n for n, i in enumerate(idx)}

    def products(p, q):
        return {pos[k]: c for k, c in A.table[idx[p]][idx[q]]}

    return _build(len(idx), A.field, products, [A.grading[i] for i in idx],
                  pos[A.unit], [A.labels[i] for i in idx] if A.labels else ())


def _peel_pair(A: SuperAlgebra):
    K = A.K
    odd = [i for i in range(A.dim) if A.grading[i]]
    for u in odd:
        if _square_sign(A, u) != K.one:
            continue
        for v in odd:
            if _square_sign(A, v) != -K.one:
                continue
            k1, c1 = A.mono(u, v)
            k2, c2 = A.mono(v, u)
            if k1 == k2 and c1 == -c2:
                return u, v
    return None


@lru_cache(maxsize=None)
def _terminal_candidates() -> tuple:
    quaternions = group_superalgebra(make_Q8())
    out = [(clifford(0, 0), 0)]
    for s in range(1, 5):
        out += [(clifford(s, 0), s), (clifford(0, s), -s)]
    out.append((quaternions, 4))
    for s in range(1, 3):
        out += [(graded_tensor(quaternions, clifford(s, 0)), 4 + s),
                (graded_tensor(quaternions, clifford(0, s)), 4 - s)]
    return tuple(out)


def morita_class(A: SuperAlgebra) -> int:
    """(l - k) mod 8 for a real superalgebra isomorphic to some Cl(l, k).

    Odd pairs u, v with u^2 = 1, v^2 = -1, uv = -vu span a copy of Cl(1,1);
    the algebra is the graded tensor product of that copy with the
    supercommutant of u and v, so the class does not change.  Peeling stops on
    a small algebra which is matched against a fixed list of known classes.
    """
    if A.field != "QQ":
        raise NotCliffordForm("morita_class expects rational scalars")
    if not A.is_monomial():
        raise NotCliffordForm("algebra is not presented in a monomial basis")
    cur = A
    while True:
        pair = _peel_pair(cur)
        if pair is None:
            break
        u, v = pair
        keep = [m for m in range(cur.dim) if _supercommutes(cur, m, u) and _supercommutes(cur, m, v)]
        cur = _subalgebra(cur, keep)
    for cand, cls in _terminal_candidates():
        if cand.dim == cur.dim and cand.graded_dims == cur.graded_dims:
            if find_superalgebra_isomorphism(cur, cand) is not None:
                return cls % 8
    raise NotCliffordForm(f"unrecognized terminal algebra of graded dimension {cur.graded_dims}")


def has_complex_structure(A: SuperAlgebra) -> bool:
    """True when an even central basis element squares to -1."""
    for j in range(A.dim):
        if A.grading[j] or j == A.unit or _square_sign(A, j) != -A.K.one:
            continue
        if all(A.table[j][i] == A.table[i][j] for i in range(A.dim)):
            return True
    return False


def complex_morita_class(A: SuperAlgebra) -> int:
    """Class mod 2 of a complex Clifford-type algebra: 1 iff an odd basis element is central."""
    for j in range(A.dim):
        if A.grading[j] and all(A.table[j][i] == A.table[i][j] for i in range(A.dim)):
            return 1
    return 0
