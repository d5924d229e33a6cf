"""Finite fermionic groups given by multiplication tables.

A fermionic group is a finite group together with a central element of order
two (the fermion parity) and a homomorphism ``theta`` to Z/2.  Elements are
0-based indices.  Groups built by this module are canonical: the identity is
index 0 and the parity is index 1.

Twists are recorded in two forms: as a unital 2-cocycle on the bosonic quotient
and, whenever that quotient is elementary abelian, as polynomials in
F2[x_1..x_n] of degree at most two.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .errors import BadGrading, BadParity, NotAGroup

__all__ = [
    "FermionicGroup",
    "GroupHom",
    "TwistData",
    "make_group",
    "fermionic_product",
    "make_Elk",
    "make_Q8",
    "make_C",
    "twist_data",
    "find_isomorphism",
    "primed",
    "cep_internal_twist",
    "product_twist",
    "substitute",
    "Poly",
]

# A quadratic polynomial over F2 is a frozenset of monomials; a monomial is a
# sorted tuple of variable indices of length 1 or 2.
Poly = frozenset


@dataclass(frozen=True)
class FermionicGroup:
    order: int
    mult: tuple[tuple[int, ...], ...]
    parity: int
    grading: tuple[int, ...]
    gens: tuple[int, ...] = ()
    labels: tuple[str, ...] = field(default=(), compare=False)

    def mul(self, a: int, b: int) -> int:
        return self.mult[a][b]

    @property
    def identity(self) -> int:
        return _identity(self.mult)

    def inverse(self, a: int) -> int:
        e = self.identity
        return next(b for b in range(self.order) if self.mult[a][b] == e)

    def element_order(self, a: int) -> int:
        e, x, n = self.identity, a, 1
        while x != e:
            x, n = self.mult[x][a], n + 1
        return n

    def power(self, a: int, n: int) -> int:
        x = self.identity
        for _ in range(n):
            x = self.mult[x][a]
        return x

    def is_central(self, a: int) -> bool:
        return all(self.mult[a][b] == self.mult[b][a] for b in range(self.order))

    def center(self) -> list[int]:
        return [a for a in range(self.order) if self.is_central(a)]

    def conjugacy_class(self, a: int) -> frozenset[int]:
        return frozenset(
            self.mult[self.mult[g][a]][self.inverse(g)] for g in range(self.order)
        )

    # bosonic quotient -------------------------------------------------------
    def coset_reps(self) -> list[int]:
        """Section of G_f -> G_b: the smallest index in each parity coset."""
        seen: set[int] = set()
        reps = []
        for a in range(self.order):
            if a not in seen:
                partner = self.mult[self.parity][a]
                seen.update((a, partner))
                reps.append(min(a, partner))
        return reps

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "mult": [x for row in self.mult for x in row],
            "parity": self.parity,
            "grading": list(self.grading),
        }

    @classmethod
    def from_json(cls, data: dict) -> "FermionicGroup":
        n = data["order"]
        flat = data["mult"]
        table = [flat[i * n:(i + 1) * n] for i in range(n)]
        return make_group(table, data["parity"], data["grading"])


@dataclass(frozen=True)
class GroupHom:
    source: FermionicGroup
    target: FermionicGroup
    map: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.map[a]

    def is_morphism(self) -> bool:
        s, t, f = self.source, self.target, self.map
        if f[s.parity] != t.parity:
            return False
        if any(s.grading[a] != t.grading[f[a]] for a in range(s.order)):
            return False
        return all(
            f[s.mult[a][b]] == t.mult[f[a]][f[b]]
            for a in range(s.order)
            for b in range(s.order)
        )

    def is_isomorphism(self) -> bool:
        return (
            self.source.order == self.target.order
            and len(set(self.map)) == self.source.order
            and self.is_morphism()
        )


# ---------------------------------------------------------------------------
# construction and validation


def _identity(mult) -> int:
    n = len(mult)
    for e in range(n):
        if all(mult[e][a] == a and mult[a][e] == a for a in range(n)):
            return e
    raise NotAGroup("no two-sided identity")


def make_group(table, parity: int, grading, gens: Sequence[int] = (), labels=()) -> FermionicGroup:
    """Validate a multiplication table and wrap it as a fermionic group."""
    n = len(table)
    if n == 0 or any(len(row) != n for row in table):
        raise NotAGroup("table must be square and nonempty")
    mult = tuple(tuple(int(x) for x in row) for row in table)
    if any(not 0 <= x < n for row in mult for x in row):
        raise NotAGroup("table entries out of range")
    e = _identity(mult)
    for a in range(n):
        if not any(mult[a][b] == e for b in range(n)):
            raise NotAGroup(f"element {a} has no inverse")
    for a, b, c in itertools.product(range(n), repeat=3):
        if mult[mult[a][b]][c] != mult[a][mult[b][c]]:
            raise NotAGroup(f"associativity fails on ({a}, {b}, {c})")
    if not 0 <= parity < n or parity == e or mult[parity][parity] != e:
        raise BadParity("parity must have order exactly 2")
    if any(mult[parity][a] != mult[a][parity] for a in range(n)):
        raise BadParity("parity must be central")
    grading = tuple(int(g) & 1 for g in grading)
    if len(grading) != n:
        raise BadGrading("grading must assign a bit to every element")
    if grading[parity]:
        raise BadParity("parity must be even")
    for a in range(n):
        for b in range(n):
            if grading[mult[a][b]] != grading[a] ^ grading[b]:
                raise BadGrading("grading is not a homomorphism")
    return FermionicGroup(n, mult, parity, grading, tuple(gens), tuple(labels))


def _from_elements(elements: list, multiply, grade_of, gens_elems, label_of=str) -> FermionicGroup:
    """Close a set of hashable elements into a canonical fermionic group.

    ``elements`` must start with the identity followed by the parity.
    """
    index = {x: i for i, x in enumerate(elements)}
    table = [[index[multiply(a, b)] for b in elements] for a in elements]
    return make_group(
        table,
        1,
        [grade_of(x) for x in elements],
        gens=[index[g] for g in gens_elems],
        labels=[label_of(x) for x in elements],
    )


def _clifford_sign(s: int, t: int, negative_mask: int) -> int:
    """Sign of e_S e_T = sign * e_{S xor T} for anticommuting generators."""
    swaps = 0
    for j in range(t.bit_length()):
        if t >> j & 1:
            swaps += bin(s >> (j + 1)).count("1")
    swaps += bin(s & t & negative_mask).count("1")
    return -1 if swaps & 1 else 1


def make_Elk(l: int, k: int) -> FermionicGroup:
    """Signed monomials +-e_S in the Clifford algebra with l squares +1, k squares -1."""
    if l < 0 or k < 0:
        raise ValueError("l and k must be nonnegative")
    n = l + k
    neg = sum(1 << i for i in range(l, n))
    # element (S, s) stands for s * e_S with s in {0: +, 1: -}
    elements = [(S, s) for S in range(1 << n) for s in (0, 1)]

    def multiply(a, b):
        sign = _clifford_sign(a[0], b[0], neg)
        return (a[0] ^ b[0], a[1] ^ b[1] ^ (sign < 0))

    def label(x):
        S, s = x
        word = "".join(f"e{i + 1}" for i in range(n) if S >> i & 1) or "1"
        return ("-" if s else "") + word

    gens = [(1 << i, 0) for i in range(n)]
    return _from_elements(
        elements, multiply, lambda x: bin(x[0]).count("1") & 1, gens, label
    )


_QUAT = {
    ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
    ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
    ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
    ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
}


def make_Q8() -> FermionicGroup:
    """Quaternion group {+-1, +-i, +-j, +-k}, parity -1, purely even."""
    elements = [(u, s) for u in "1ijk" for s in (0, 1)]

    def multiply(a, b):
        sign, u = _QUAT[(a[0], b[0])]
        return (u, a[1] ^ b[1] ^ (sign < 0))

    return _from_elements(
        elements, multiply, lambda x: 0, [("i", 0), ("j", 0)],
        lambda x: ("-" if x[1] else "") + x[0],
    )


def make_C() -> FermionicGroup:
    """Z/4 = {+-1, +-i} with parity -1, purely even."""
    elements = [0, 2, 1, 3]  # exponents of i: 1, -1, i, -i

    return _from_elements(
        elements,
        lambda a, b: (a + b) % 4,
        lambda x: 0,
        [1],
        lambda x: ["1", "i", "-1", "-i"][x],
    )


def _canonical(G: FermionicGroup) -> FermionicGroup:
    """Reorder so that the identity is 0 and the parity is 1."""
    e = G.identity
    if e == 0 and G.parity == 1:
        return G
    order = [e, G.parity] + [a for a in range(G.order) if a not in (e, G.parity)]
    pos = {a: i for i, a in enumerate(order)}
    table = [[pos[G.mult[a][b]] for b in order] for a in order]
    return FermionicGroup(
        G.order,
        tuple(tuple(r) for r in table),
        1,
        tuple(G.grading[a] for a in order),
        tuple(pos[g] for g in G.gens),
        tuple(G.labels[a] for a in order) if G.labels else (),
    )


def fermionic_product(G: FermionicGroup, H: FermionicGroup) -> FermionicGroup:
    """G x H modulo the antidiagonal parity, with the Koszul sign on odd pairs."""
    G, H = _canonical(G), _canonical(H)
    h_reps = H.coset_reps()
    rep_of = {}
    for h in range(H.order):
        r = min(h, H.mult[H.parity][h])
        rep_of[h] = (r, h != r)  # h = r or h = parity * r
    # canonical representatives (g, h) with h a coset rep of H_b
    elements = [(g, h) for h in h_reps for g in range(G.order)]

    def normalize(g, h):
        r, flipped = rep_of[h]
        return (G.mult[G.parity][g] if flipped else g, r)

    def multiply(a, b):
        g1, h1 = a
        g2, h2 = b
        g = G.mult[g1][g2]
        if H.grading[h1] and G.grading[g2]:
            g = G.mult[G.parity][g]
        return normalize(g, H.mult[h1][h2])

    gens = [(g, 0) for g in G.gens] + [normalize(0, h) for h in H.gens]

    def label(x):
        if not (G.labels and H.labels):
            return str(x)
        return f"{G.labels[x[0]]}(x){H.labels[x[1]]}"

    return _from_elements(
        elements, multiply,
        lambda x: G.grading[x[0]] ^ H.grading[x[1]], gens, label,
    )


def primed(G: FermionicGroup) -> FermionicGroup:
    return fermionic_product(G, make_Elk(1, 1))


# ---------------------------------------------------------------------------
# twists


@dataclass(frozen=True)
class TwistData:
    """Twist (theta, omega) of a fermionic group.

    ``theta`` and ``omega`` are polynomials in ``n_vars`` variables when the
    bosonic group is elementary abelian with a chosen basis, and ``None``
    otherwise.  ``omega_class`` is the coboundary-reduced cocycle table, which
    is canonical for the group's element ordering.
    """

    n_vars: int
    theta: Poly | None
    omega: Poly | None
    theta_values: tuple[int, ...] = ()
    omega_cocycle: tuple[tuple[int, ...], ...] = ()
    omega_class: tuple[tuple[int, ...], ...] = ()

    def same_polys(self, other: "TwistData") -> bool:
        return self.theta == other.theta and self.omega == other.omega

    def to_json(self) -> dict:
        def fmt(p):
            return None if p is None else sorted(list(m) for m in p)

        return {"n_vars": self.n_vars, "theta": fmt(self.theta), "omega": fmt(self.omega)}


def _poly(*monomials: Iterable[int]) -> Poly:
    """Build a polynomial, cancelling repeated monomials mod 2."""
    out: set[tuple[int, ...]] = set()
    for m in monomials:
        key = tuple(sorted(m))
        out ^= {key}
    return frozenset(out)


def poly_add(*ps: Poly) -> Poly:
    out: set = set()
    for p in ps:
        out ^= set(p)
    return frozenset(out)


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: set = set()
    for a in p:
        for b in q:
            out ^= {tuple(sorted(a + b))}
    return frozenset(out)


def substitute(p: Poly, images: dict[int, Poly]) -> Poly:
    """Apply the linear substitution x_i -> images[i] (identity elsewhere)."""
    out: Poly = frozenset()
    for mono in p:
        term: Poly = frozenset({()})
        for v in mono:
            term = poly_mul(term, images.get(v, frozenset({(v,)})))
        out = poly_add(out, term)
    return out


def product_twist(tG: TwistData, tH: TwistData) -> TwistData:
    """(theta_G + theta_H, omega_G + theta_G theta_H + omega_H) on disjoint variables."""
    shift = tG.n_vars

    def moved(p):
        return frozenset(tuple(v + shift for v in m) for m in p)

    thH, omH = moved(tH.theta), moved(tH.omega)
    return TwistData(
        tG.n_vars + tH.n_vars,
        poly_add(tG.theta, thH),
        poly_add(tG.omega, poly_mul(tG.theta, thH), omH),
    )


def _bosonic(G: FermionicGroup):
    reps = G.coset_reps()
    pos = {}
    for i, r in enumerate(reps):
        pos[r] = i
        pos[G.mult[G.parity][r]] = i
    return reps, pos


def _coboundary_echelon(G: FermionicGroup):
    reps, pos = _bosonic(G)
    m = len(reps)
    ech = gf2.Echelon(m * m)
    for f in range(1, m):  # indicator of a non-identity element
        v = np.zeros(m * m, dtype=np.uint8)
        for a in range(m):
            for b in range(m):
                c = pos[G.mult[reps[a]][reps[b]]]
                v[a * m + b] = (a == f) ^ (b == f) ^ (c == f)
        ech.add(v)
    return ech


def _cocycle(G: FermionicGroup):
    reps, pos = _bosonic(G)
    m = len(reps)
    table = [[0] * m for _ in range(m)]
    for a in range(m):
        for b in range(m):
            prod = G.mult[reps[a]][reps[b]]
            table[a][b] = 0 if prod == reps[pos[prod]] else 1
    return reps, pos, table


def _bosonic_basis(G: FermionicGroup, reps, pos) -> list[int] | None:
    """Coordinates on G_b if it is elementary abelian and G.gens is a basis."""
    m = len(reps)
    n = (m - 1).bit_length()
    if 1 << n != m:
        return None
    for a in reps:
        if pos[G.mult[a][a]] != 0:
            return None
        for b in reps:
            if pos[G.mult[a][b]] != pos[G.mult[b][a]]:
                return None
    gens = [pos[g] for g in G.gens]
    if len(gens) != n:
        return None
    coords = {0: 0}
    frontier = deque([0])
    while frontier:
        a = frontier.popleft()
        for i, g in enumerate(gens):
            b = pos[G.mult[reps[a]][reps[g]]]
            c = coords[a] ^ (1 << i)
            if b in coords:
                if coords[b] != c:
                    return None
            else:
                coords[b] = c
                frontier.append(b)
    if len(coords) != m:
        return None
    return [coords[a] for a in range(m)]


def twist_data(G: FermionicGroup) -> TwistData:
    G = _canonical(G)
    reps, pos, table = _cocycle(G)
    m = len(reps)
    theta_values = tuple(G.grading[r] for r in reps)
    ech = _coboundary_echelon(G)
    flat = np.array([x for row in table for x in row], dtype=np.uint8)
    reduced = ech.reduce(flat)
    omega_class = tuple(tuple(int(x) for x in reduced[a * m:(a + 1) * m]) for a in range(m))
    coords = _bosonic_basis(G, reps, pos)
    theta = omega = None
    n = 0
    if coords is not None:
        n = len(G.gens)
        theta = _poly(*[(i,) for i in range(n) if theta_values[coords.index(1 << i)]])
        omega = _omega_poly(n, coords, flat, ech)
    return TwistData(
        n, theta, omega, theta_values, tuple(tuple(r) for r in table), omega_class
    )


def _bilinear_cocycle(n: int, coords, i: int, j: int) -> np.ndarray:
    m = len(coords)
    v = np.zeros(m * m, dtype=np.uint8)
    for a in range(m):
        for b in range(m):
            v[a * m + b] = (coords[a] >> i & 1) & (coords[b] >> j & 1)
    return v


def _omega_poly(n: int, coords, flat: np.ndarray, ech: gf2.Echelon) -> Poly:
    monomials = [(i, j) for i in range(n) for j in range(i, n)]
    columns = [ech.reduce(_bilinear_cocycle(n, coords, i, j)) for i, j in monomials]
    target = ech.reduce(flat)
    if not columns:
        return frozenset()
    sol = gf2.solve(np.array(columns).T, target)
    if sol is None:  # pragma: no cover - H^2 of (Z/2)^n is spanned by these
        raise ArithmeticError("cocycle is not a quadratic class")
    return _poly(*[monomials[t] for t in range(len(monomials)) if sol[t]])


def cep_internal_twist(G: FermionicGroup, reflections: int = 1) -> TwistData:
    """Twist of G^int on G_b x (Z/2)^2 for one reflection.

    With w1 = x1 and w2 = x2^2 pulled back along the reflection data, the
    twist is (theta + x1, omega + x1 (theta + x1) + x2^2); the new variables
    are appended after those of G.
    """
    if reflections != 1:
        raise NotImplementedError("only a single reflection is supported")
    t = twist_data(G)
    if t.theta is None:
        raise ValueError("bosonic group must be elementary abelian")
    x1, x2 = t.n_vars, t.n_vars + 1
    theta = poly_add(t.theta, _poly((x1,)))
    omega = poly_add(t.omega, poly_mul(_poly((x1,)), theta), _poly((x2, x2)))
    return TwistData(t.n_vars + 2, theta, omega)


# ---------------------------------------------------------------------------
# isomorphism search


def _fingerprint(G: FermionicGroup, a: int) -> tuple:
    return (
        G.element_order(a),
        G.grading[a],
        len(G.conjugacy_class(a)),
        G.mult[a][a] == G.parity,
        G.is_central(a),
    )


def _closure_extend(G, H, mapping: dict[int, int], new: int, image: int) -> dict[int, int] | None:
    """Extend a partial homomorphism by new -> image and close under products."""
    mp = dict(mapping)
    if new in mp:
        return mp if mp[new] == image else None
    mp[new] = image
    queue = deque([new])
    while queue:
        a = queue.popleft()
        for b in list(mp):
            for x, y in ((a, b), (b, a)):
                prod, img = G.mult[x][y], H.mult[mp[x]][mp[y]]
                if prod in mp:
                    if mp[prod] != img:
                        return None
                else:
                    mp[prod] = img
                    queue.append(prod)
    if len(set(mp.values())) != len(mp):
        return None
    return mp


def _generating_set(G: FermionicGroup) -> list[int]:
    """Greedy generating set; elements of rarest fingerprint come first."""
    counts: dict[tuple, int] = {}
    fps = [_fingerprint(G, a) for a in range(G.order)]
    for f in fps:
        counts[f] = counts.get(f, 0) + 1
    candidates = sorted(range(G.order), key=lambda a: (counts[fps[a]], a))
    span = {G.identity}
    gens = []
    for a in candidates:
        if a in span:
            continue
        gens.append(a)
        frontier = deque(span)
        span = set(span)
        while frontier:
            x = frontier.popleft()
            for g in gens:
                for y in (G.mult[x][g], G.mult[g][x]):
                    if y not in span:
                        span.add(y)
                        frontier.append(y)
        if len(span) == G.order:
            break
    return gens


def find_isomorphism(G: FermionicGroup, H: FermionicGroup) -> GroupHom | None:
    """Backtracking search for a fermionic-group isomorphism G -> H."""
    if G.order != H.order:
        return None
    fg = [_fingerprint(G, a) for a in range(G.order)]
    fh = [_fingerprint(H, b) for b in range(H.order)]
    if sorted(fg) != sorted(fh):
        return None
    if _fingerprint(G, G.parity) != _fingerprint(H, H.parity):
        return None
    by_print: dict[tuple, list[int]] = {}
    for b in range(H.order):
        by_print.setdefault(fh[b], []).append(b)
    start = _closure_extend(G, H, {G.identity: H.identity}, G.parity, H.parity)
    if start is None:
        return None
    gens = _generating_set(G)

    def search(i: int, mp: dict[int, int]):
        if i == len(gens):
            return mp if len(mp) == G.order else None
        g = gens[i]
        if g in mp:
            return search(i + 1, mp)
        for b in by_print.get(fg[g], []):
            ext = _closure_extend(G, H, mp, g, b)
            if ext is None:
                continue
            if any(G.grading[x] != H.grading[y] for x, y in ext.items()):
                continue
            found = search(i + 1, ext)
            if found is not None:
                return found
        return None

    found = search(0, start)
    if found is None:
        return None
    hom = GroupHom(G, H, tuple(found[a] for a in range(G.order)))
    assert hom.is_isomorphism()
    return hom
