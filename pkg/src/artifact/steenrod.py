"""Truncated modules over A(1) = <Sq1, Sq2> and E(1) = <Q0, Q1>.

A module is stored degree by degree: ``dims[t]`` is the dimension in degree
``t`` and ``ops[name][t]`` is the F2 matrix of the operation ``name`` from
degree ``t`` to degree ``t + |name|`` (columns are source basis vectors).
A module with ``trunc = D`` is only known through degree ``D``; degrees above
``D`` are simply absent, and every construction below propagates the range in
which its output is still correct.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from . import gf2
from .errors import FlavorMismatch, RangeExceeded, UnknownName

__all__ = [
    "SteenrodModule",
    "ModuleMap",
    "SplitResult",
    "OPS",
    "ALGEBRA_WORDS",
    "make_module",
    "regular_module",
    "cyclic_module",
    "trivial_module",
    "suspend",
    "tensor",
    "tensor_power",
    "dual",
    "truncate",
    "direct_sum",
    "restrict_to_E1",
    "margolis_homology",
    "split_free",
    "thom_module",
    "me_module",
    "reduced_me_module",
    "identity_map",
    "standard_module",
    "STANDARD_NAMES",
    "hom_space",
    "stable_iso",
    "phi_cohomology",
    "psi_cohomology",
    "diagonal_cohomology",
    "poincare_series",
]

OPS = {"A1": (("sq1", 1), ("sq2", 2)), "E1": (("q0", 1), ("q1", 3))}
OP_DEGREE = {"sq1": 1, "sq2": 2, "q0": 1, "q1": 3}

# Basis of each algebra as words; a word (o1, ..., ok) acts as o1 o2 ... ok.
ALGEBRA_WORDS = {
    "A1": ((), ("sq1",), ("sq2",), ("sq1", "sq2"), ("sq2", "sq1"),
           ("sq1", "sq2", "sq1"), ("sq2", "sq1", "sq2"), ("sq1", "sq2", "sq1", "sq2")),
    "E1": ((), ("q0",), ("q1",), ("q0", "q1")),
}
WORD_LABELS = {
    "A1": ("1", "a", "b", "ab", "ba", "aba", "bab", "abab"),
    "E1": ("1", "Q0", "Q1", "Q0Q1"),
}
TOP_DEGREE = {"A1": 6, "E1": 4}
_MARGOLIS_DEGREE = {0: 1, 1: 3}


def word_degree(word) -> int:
    return sum(OP_DEGREE[o] for o in word)


# ---------------------------------------------------------------------------
# the module type


@dataclass(eq=False)
class SteenrodModule:
    flavor: str
    dims: dict[int, int]
    ops: dict[str, dict[int, np.ndarray]]
    trunc: int | None = None
    labels: dict[int, tuple[str, ...]] = field(default_factory=dict)

    # -- basic accessors -------------------------------------------------
    def dim(self, t: int) -> int:
        return self.dims.get(t, 0)

    @property
    def degrees(self) -> list[int]:
        return sorted(self.dims)

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    @property
    def bottom(self) -> int | None:
        return min(self.dims) if self.dims else None

    @property
    def top(self) -> int | None:
        return max(self.dims) if self.dims else None

    def is_zero(self) -> bool:
        return not self.dims

    def op_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in OPS[self.flavor])

    def block(self, name: str, t: int) -> np.ndarray:
        r = OP_DEGREE[name]
        mat = self.ops[name].get(t)
        if mat is None:
            return gf2.zeros(self.dim(t + r), self.dim(t))
        return mat

    def word(self, word, t: int) -> np.ndarray:
        """Matrix of an algebra word from degree t."""
        mat = gf2.identity(self.dim(t))
        cur = t
        for o in reversed(word):
            mat = gf2.matmul(self.block(o, cur), mat)
            cur += OP_DEGREE[o]
        return mat

    def margolis_block(self, which: int, t: int) -> np.ndarray:
        if self.flavor == "E1":
            return self.block("q0" if which == 0 else "q1", t)
        if which == 0:
            return self.block("sq1", t)
        return self.word(("sq1", "sq2"), t) ^ self.word(("sq2", "sq1"), t)

    def label(self, t: int, i: int) -> str:
        labs = self.labels.get(t)
        return labs[i] if labs and i < len(labs) else f"g{t}_{i}"

    def valid_through(self) -> float:
        return float("inf") if self.trunc is None else self.trunc

    # -- checks ------------------------------------------------------------
    def relations(self) -> list[tuple]:
        if self.flavor == "A1":
            return [((("sq1", "sq1"),), 2), ((("sq2", "sq2"), ("sq1", "sq2", "sq1")), 4),
                    ((("sq1", "sq2", "sq1", "sq2"), ("sq2", "sq1", "sq2", "sq1")), 6)]
        return [((("q0", "q0"),), 2), ((("q1", "q1"),), 6), ((("q0", "q1"), ("q1", "q0")), 4)]

    def validate(self) -> None:
        """Raise ValueError if a defining relation fails inside the valid range."""
        for words, deg in self.relations():
            for t in self.degrees:
                if t + deg > self.valid_through():
                    continue
                total = gf2.zeros(self.dim(t + deg), self.dim(t))
                for w in words:
                    total ^= self.word(w, t)
                if total.any():
                    raise ValueError(f"relation {words} fails in degree {t}")
        for name, blocks in self.ops.items():
            for t, mat in blocks.items():
                if mat.shape != (self.dim(t + OP_DEGREE[name]), self.dim(t)):
                    raise ValueError(f"{name} block in degree {t} has shape {mat.shape}")

    # -- output ------------------------------------------------------------
    def to_json(self) -> dict:
        basis = [{"deg": t, "label": self.label(t, i)} for t in self.degrees for i in range(self.dim(t))]
        index = {}
        n = 0
        for t in self.degrees:
            for i in range(self.dim(t)):
                index[(t, i)] = n
                n += 1
        out = {"flavor": self.flavor, "D": self.trunc, "basis": basis}
        for name in self.op_names():
            entries = []
            for t in self.degrees:
                mat = self.block(name, t)
                for row, col in zip(*np.nonzero(mat)):
                    entries.append([index[(t, int(col))], index[(t + OP_DEGREE[name], int(row))]])
            out[name] = entries
        return out

    def render(self) -> str:
        """Cell diagram: one line per degree, then the nonzero operations."""
        lines = [f"{self.flavor}-module, valid through degree {self.trunc if self.trunc is not None else 'all'}"]
        for t in self.degrees:
            labs = ", ".join(self.label(t, i) for i in range(self.dim(t)))
            lines.append(f"  {t:>3}: {labs}")
        for name in self.op_names():
            arrows = []
            r = OP_DEGREE[name]
            for t in self.degrees:
                mat = self.block(name, t)
                for col in range(mat.shape[1]):
                    targets = [self.label(t + r, int(row)) for row in np.flatnonzero(mat[:, col])]
                    if targets:
                        arrows.append(f"{self.label(t, col)} -> {' + '.join(targets)}")
            if arrows:
                lines.append(f"  {name}: " + "; ".join(arrows))
        return "\n".join(lines)


def make_module(flavor, dims, ops, trunc=None, labels=None) -> SteenrodModule:
    """Normalize: drop empty degrees and blocks, coerce matrices to uint8."""
    if flavor not in OPS:
        raise FlavorMismatch(f"unknown flavor {flavor!r}")
    dims = {int(t): int(d) for t, d in dims.items() if d > 0}
    if trunc is not None:
        dims = {t: d for t, d in dims.items() if t <= trunc}
    clean = {}
    for name, _ in OPS[flavor]:
        r = OP_DEGREE[name]
        blocks = {}
        for t, mat in (ops.get(name) or {}).items():
            if t in dims and t + r in dims:
                mat = gf2.as_gf2(mat).reshape(dims[t + r], dims[t])
                if mat.any():
                    blocks[t] = mat
        clean[name] = blocks
    labels = {t: tuple(labels[t]) for t in dims if labels and t in labels}
    return SteenrodModule(flavor, dict(sorted(dims.items())), clean, trunc, labels)


def trivial_module(flavor: str = "A1", degree: int = 0) -> SteenrodModule:
    return make_module(flavor, {degree: 1}, {}, None, {degree: ("1",)})


def regular_module(flavor: str = "A1") -> SteenrodModule:
    """The algebra acting on itself from the left, basis = ALGEBRA_WORDS."""
    words = ALGEBRA_WORDS[flavor]
    index = {w: i for i, w in enumerate(words)}
    degs = [word_degree(w) for w in words]
    if flavor == "A1":
        # left multiplication tables, written out from the relations
        # Sq1Sq1 = 0 and Sq2Sq2 = Sq1Sq2Sq1
        a, b = "sq1", "sq2"
        table = {
            a: {(): (a,), (b,): (a, b), (b, a): (a, b, a), (b, a, b): (a, b, a, b)},
            b: {(): (b,), (a,): (b, a), (b,): (a, b, a), (a, b): (b, a, b),
                (a, b, a): (a, b, a, b)},
        }
    else:
        q0, q1 = "q0", "q1"
        table = {q0: {(): (q0,), (q1,): (q0, q1)}, q1: {(): (q1,), (q0,): (q0, q1)}}
    dims: dict[int, int] = {}
    pos = {}
    for w, d in zip(words, degs):
        pos[w] = (d, dims.get(d, 0))
        dims[d] = dims.get(d, 0) + 1
    ops: dict[str, dict[int, np.ndarray]] = {}
    for name, r in OPS[flavor]:
        blocks = {t: gf2.zeros(dims.get(t + r, 0), dims[t]) for t in dims}
        for src, dst in table[name].items():
            t, i = pos[src]
            _, j = pos[dst]
            blocks[t][j, i] = 1
        ops[name] = blocks
    labels: dict[int, list[str]] = {}
    for w, lab in zip(words, WORD_LABELS[flavor]):
        labels.setdefault(word_degree(w), []).append(lab)
    del index
    return make_module(flavor, dims, ops, None, labels)


# ---------------------------------------------------------------------------
# sub- and quotient modules


def _restrict(M: SteenrodModule, basis: dict[int, np.ndarray], labels=None) -> SteenrodModule:
    """Submodule spanned per degree by the rows of ``basis[t]``."""
    dims = {t: b.shape[0] for t, b in basis.items() if b.shape[0]}
    ops = {}
    for name, r in OPS[M.flavor]:
        blocks = {}
        for t in dims:
            if t + r not in dims:
                if t + r <= M.valid_through() and M.dim(t + r) and \
                        gf2.matmul(M.block(name, t), basis[t].T).any():
                    raise ValueError("rows do not span a submodule")
                continue
            image = gf2.matmul(M.block(name, t), basis[t].T)
            coords = gf2.solve(basis[t + r].T, image)
            if coords is None:
                raise ValueError("rows do not span a submodule")
            blocks[t] = coords
        ops[name] = blocks
    return make_module(M.flavor, dims, ops, M.trunc, labels)


def _closure(M: SteenrodModule, gens: dict[int, list[np.ndarray]]) -> dict[int, np.ndarray]:
    """Per-degree row bases of the submodule generated by ``gens``."""
    ech: dict[int, gf2.Echelon] = {}
    pending = [(t, v) for t, vs in gens.items() for v in vs]
    while pending:
        pending.sort(key=lambda p: p[0])
        t, v = pending.pop(0)
        if t not in M.dims:
            continue
        e = ech.setdefault(t, gf2.Echelon(M.dim(t)))
        if not e.add(v):
            continue
        for name, r in OPS[M.flavor]:
            if M.dim(t + r):
                w = gf2.matmul(M.block(name, t), v.reshape(-1, 1))[:, 0]
                if w.any():
                    pending.append((t + r, w))
    return {t: np.array(e.rows, dtype=np.uint8) for t, e in ech.items() if len(e)}


def _quotient(M: SteenrodModule, sub: dict[int, np.ndarray]) -> SteenrodModule:
    comp: dict[int, np.ndarray] = {}
    inv: dict[int, np.ndarray] = {}
    for t in M.degrees:
        s = sub.get(t, gf2.zeros(0, M.dim(t)))
        c = gf2.complement_basis(s, gf2.identity(M.dim(t)))
        comp[t] = c
        full = np.vstack([c, s]) if s.shape[0] else c
        inv[t] = gf2.solve(full.T, gf2.identity(M.dim(t)))  # coords of standard vectors
    dims = {t: c.shape[0] for t, c in comp.items()}
    ops = {}
    for name, r in OPS[M.flavor]:
        blocks = {}
        for t in M.degrees:
            if not dims.get(t) or not dims.get(t + r):
                continue
            image = gf2.matmul(M.block(name, t), comp[t].T)
            coords = gf2.matmul(inv[t + r], image)[: dims[t + r]]
            blocks[t] = coords
        ops[name] = blocks
    labels = {}
    for t, c in comp.items():
        if t in M.labels and c.shape[0]:
            labels[t] = [M.label(t, int(np.flatnonzero(row)[0])) for row in c]
    return make_module(M.flavor, dims, ops, M.trunc, labels)


def cyclic_module(flavor: str, relations) -> SteenrodModule:
    """algebra / (left ideal generated by the given words)."""
    R = regular_module(flavor)
    words = ALGEBRA_WORDS[flavor]
    gens: dict[int, list[np.ndarray]] = {}
    for rel in relations:
        # a relation is a word or a tuple of words to be summed
        terms = rel if rel and isinstance(rel[0], tuple) else (rel,)
        t = word_degree(terms[0])
        v = gf2.zeros(1, R.dim(t))[0]
        for w in terms:
            same = [u for u in words if word_degree(u) == t]
            v[same.index(tuple(w))] ^= 1
        gens.setdefault(t, []).append(v)
    return _quotient(R, _closure(R, gens))


# ---------------------------------------------------------------------------
# constructions


def suspend(M: SteenrodModule, shift: int) -> SteenrodModule:
    dims = {t + shift: d for t, d in M.dims.items()}
    ops = {name: {t + shift: m for t, m in blocks.items()} for name, blocks in M.ops.items()}
    labels = {t + shift: lab for t, lab in M.labels.items()}
    trunc = None if M.trunc is None else M.trunc + shift
    return SteenrodModule(M.flavor, dims, ops, trunc, labels)


def truncate(M: SteenrodModule, D: int) -> SteenrodModule:
    """Forget everything above degree D (a quotient module)."""
    trunc = D if M.trunc is None else min(D, M.trunc)
    return make_module(M.flavor, M.dims, M.ops, trunc, M.labels)


def direct_sum(M: SteenrodModule, N: SteenrodModule) -> SteenrodModule:
    if M.flavor != N.flavor:
        raise FlavorMismatch(f"{M.flavor} vs {N.flavor}")
    dims = {t: M.dim(t) + N.dim(t) for t in set(M.dims) | set(N.dims)}
    ops = {}
    for name, r in OPS[M.flavor]:
        blocks = {}
        for t in dims:
            if dims.get(t + r):
                top = np.hstack([M.block(name, t), gf2.zeros(M.dim(t + r), N.dim(t))])
                bot = np.hstack([gf2.zeros(N.dim(t + r), M.dim(t)), N.block(name, t)])
                blocks[t] = np.vstack([top, bot])
        ops[name] = blocks
    truncs = [x.trunc for x in (M, N) if x.trunc is not None]
    labels = {t: [M.label(t, i) for i in range(M.dim(t))] + [N.label(t, i) for i in range(N.dim(t))]
              for t in dims}
    return make_module(M.flavor, dims, ops, min(truncs) if truncs else None, labels)


def tensor(M: SteenrodModule, N: SteenrodModule, max_labels: int = 4000) -> SteenrodModule:
    """Tensor product with the diagonal (Cartan formula) action."""
    if M.flavor != N.flavor:
        raise FlavorMismatch(f"{M.flavor} vs {N.flavor}")
    if M.is_zero() or N.is_zero():
        return make_module(M.flavor, {}, {}, None)
    limits = []
    if M.trunc is not None:
        limits.append(M.trunc + N.bottom)
    if N.trunc is not None:
        limits.append(N.trunc + M.bottom)
    trunc = min(limits) if limits else None
    # offsets[t] = list of (p, q, offset)
    layout: dict[int, list[tuple[int, int, int]]] = {}
    dims: dict[int, int] = {}
    for p in M.degrees:
        for q in N.degrees:
            t = p + q
            if trunc is not None and t > trunc:
                continue
            layout.setdefault(t, []).append((p, q, dims.get(t, 0)))
            dims[t] = dims.get(t, 0) + M.dim(p) * N.dim(q)
    offset = {(p, q): off for t, parts in layout.items() for p, q, off in parts}

    def place(blocks, p, q, dp, dq, mat):
        t = p + q
        tgt = (p + dp, q + dq)
        if tgt not in offset:
            return
        r = dp + dq
        big = blocks.setdefault(t, gf2.zeros(dims[t + r], dims[t]))
        o_src = offset[(p, q)]
        o_tgt = offset[tgt]
        big[o_tgt:o_tgt + mat.shape[0], o_src:o_src + mat.shape[1]] ^= mat

    ops: dict[str, dict[int, np.ndarray]] = {}
    if M.flavor == "A1":
        s1, s2 = {}, {}
        for (p, q) in offset:
            Ip, Iq = gf2.identity(M.dim(p)), gf2.identity(N.dim(q))
            if M.dim(p + 1):
                place(s1, p, q, 1, 0, np.kron(M.block("sq1", p), Iq))
                place(s2, p, q, 1, 1, np.kron(M.block("sq1", p), N.block("sq1", q))) if N.dim(q + 1) else None
            if N.dim(q + 1):
                place(s1, p, q, 0, 1, np.kron(Ip, N.block("sq1", q)))
            if M.dim(p + 2):
                place(s2, p, q, 2, 0, np.kron(M.block("sq2", p), Iq))
            if N.dim(q + 2):
                place(s2, p, q, 0, 2, np.kron(Ip, N.block("sq2", q)))
        ops = {"sq1": s1, "sq2": s2}
    else:
        for name, r in OPS["E1"]:
            blocks = {}
            for (p, q) in offset:
                if M.dim(p + r):
                    place(blocks, p, q, r, 0, np.kron(M.block(name, p), gf2.identity(N.dim(q))))
                if N.dim(q + r):
                    place(blocks, p, q, 0, r, np.kron(gf2.identity(M.dim(p)), N.block(name, q)))
            ops[name] = blocks
    labels = {}
    if sum(dims.values()) <= max_labels:
        for t, parts in layout.items():
            labs = []
            for p, q, _ in parts:
                labs += [f"{M.label(p, i)}*{N.label(q, j)}" for i in range(M.dim(p)) for j in range(N.dim(q))]
            labels[t] = labs
    return make_module(M.flavor, dims, ops, trunc, labels)


def tensor_power(M: SteenrodModule, n: int) -> SteenrodModule:
    out = trivial_module(M.flavor)
    for _ in range(n):
        out = tensor(out, M)
    return out


def dual(M: SteenrodModule) -> SteenrodModule:
    """Linear dual; both A(1) generators and both Q_i are fixed by the conjugation."""
    if M.trunc is not None:
        raise RangeExceeded("the dual of a truncated module is not determined")
    dims = {-t: d for t, d in M.dims.items()}
    ops = {}
    for name, r in OPS[M.flavor]:
        ops[name] = {-(t + r): mat.T.copy() for t, mat in M.ops[name].items()}
    labels = {-t: tuple(f"{lab}^" for lab in labs) for t, labs in M.labels.items()}
    return make_module(M.flavor, dims, ops, None, labels)


def restrict_to_E1(M: SteenrodModule) -> SteenrodModule:
    if M.flavor == "E1":
        return M
    ops = {"q0": {t: M.margolis_block(0, t) for t in M.degrees},
           "q1": {t: M.margolis_block(1, t) for t in M.degrees}}
    return make_module("E1", M.dims, ops, M.trunc, M.labels)


def poincare_series(M: SteenrodModule, lo: int, hi: int) -> list[int]:
    return [M.dim(t) for t in range(lo, hi + 1)]


# ---------------------------------------------------------------------------
# Margolis homology


def margolis_homology(M: SteenrodModule, which: int) -> dict[int, tuple[int, np.ndarray]]:
    """Q_which homology: degree -> (dimension, representative rows).

    Only degrees whose answer is determined by the truncation are reported.
    """
    r = _MARGOLIS_DEGREE[which]
    out = {}
    for t in M.degrees:
        if t + r > M.valid_through():
            continue
        Q = M.margolis_block(which, t)
        ker = gf2.nullspace(Q) if M.dim(t + r) else gf2.identity(M.dim(t))
        if M.dim(t - r):
            img = gf2.matmul(M.margolis_block(which, t - r), gf2.identity(M.dim(t - r))).T
        else:
            img = gf2.zeros(0, M.dim(t))
        reps = gf2.complement_basis(img, ker) if ker.shape[0] else gf2.zeros(0, M.dim(t))
        out[t] = (reps.shape[0], reps)
    return out


# ---------------------------------------------------------------------------
# module maps


@dataclass(eq=False)
class ModuleMap:
    """Degree-``shift`` map: ``blocks[t]`` sends source degree t to target degree t + shift."""

    source: SteenrodModule
    target: SteenrodModule
    blocks: dict[int, np.ndarray]
    shift: int = 0

    def block(self, t: int) -> np.ndarray:
        mat = self.blocks.get(t)
        if mat is None:
            return gf2.zeros(self.target.dim(t + self.shift), self.source.dim(t))
        return mat

    def valid_through(self) -> float:
        return min(self.source.valid_through(), self.target.valid_through() - self.shift)

    def commutes(self) -> bool:
        """Check f(op x) = op f(x) wherever both sides are inside the valid range."""
        for name, r in OPS[self.source.flavor]:
            for t in self.source.degrees:
                if t + r > self.valid_through():
                    continue
                left = gf2.matmul(self.block(t + r), self.source.block(name, t))
                right = gf2.matmul(self.target.block(name, t + self.shift), self.block(t))
                if not np.array_equal(left, right):
                    return False
        return True

    def is_injective(self, through: int | None = None) -> bool:
        lim = self.valid_through() if through is None else through
        return all(gf2.rank(self.block(t)) == self.source.dim(t)
                   for t in self.source.degrees if t <= lim)

    def is_isomorphism(self, through: int | None = None) -> bool:
        lim = self.valid_through() if through is None else through
        degs = set(self.source.degrees) | {t - self.shift for t in self.target.degrees}
        for t in degs:
            if t > lim:
                continue
            if self.source.dim(t) != self.target.dim(t + self.shift):
                return False
            if gf2.rank(self.block(t)) != self.source.dim(t):
                return False
        return True

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """self o other."""
        blocks = {t: gf2.matmul(self.block(t + other.shift), other.block(t)) for t in other.source.degrees}
        return ModuleMap(other.source, self.target, blocks, self.shift + other.shift)

    def on_margolis(self, which: int) -> dict[int, int]:
        """Rank of the induced map on Q_which homology, per source degree."""
        r = _MARGOLIS_DEGREE[which]
        hs = margolis_homology(self.source, which)
        ranks = {}
        for t, (d, reps) in hs.items():
            u = t + self.shift
            if u + r > self.target.valid_through():
                continue
            if d == 0:
                ranks[t] = 0
                continue
            images = gf2.matmul(self.block(t), reps.T).T
            if self.target.dim(u - r):
                bnd = gf2.matmul(self.target.margolis_block(which, u - r), gf2.identity(self.target.dim(u - r))).T
            else:
                bnd = gf2.zeros(0, self.target.dim(u))
            ranks[t] = gf2.rank(np.vstack([bnd, images])) - gf2.rank(bnd)
        return ranks

    def margolis_isomorphism(self, which: int) -> bool:
        hs = margolis_homology(self.source, which)
        ht = margolis_homology(self.target, which)
        ranks = self.on_margolis(which)
        for t, rank in ranks.items():
            u = t + self.shift
            if u not in ht and self.target.dim(u):
                continue
            if rank != hs[t][0] or rank != ht.get(u, (0,))[0]:
                return False
        for u, (d, _) in ht.items():
            t = u - self.shift
            if d and t not in ranks and t + _MARGOLIS_DEGREE[which] <= self.source.valid_through():
                return False
        return True


def identity_map(M: SteenrodModule) -> ModuleMap:
    return ModuleMap(M, M, {t: gf2.identity(M.dim(t)) for t in M.degrees})


# ---------------------------------------------------------------------------
# splitting off free summands


@dataclass(eq=False)
class SplitResult:
    free_degrees: list[int]
    reduced: SteenrodModule
    inclusion: ModuleMap           # reduced -> M
    projection: ModuleMap          # M -> reduced
    free_generators: list[tuple[int, np.ndarray]]  # (degree, vector in M)


@lru_cache(maxsize=None)
def _pairing_inverses(flavor: str) -> dict[int, tuple[tuple, tuple, np.ndarray]]:
    """For each degree d: (words of degree d, words of degree top-d, P^{-1}).

    P[a][b] is the coefficient of the top class in a*b; the algebra is
    Frobenius, so P is invertible in every degree.
    """
    R = regular_module(flavor)
    words = ALGEBRA_WORDS[flavor]
    top = TOP_DEGREE[flavor]
    out = {}
    for d in range(top + 1):
        bs = tuple(w for w in words if word_degree(w) == d)
        as_ = tuple(w for w in words if word_degree(w) == top - d)
        if not bs:
            continue
        P = gf2.zeros(len(as_), len(bs))
        for j, b in enumerate(bs):
            e_b = gf2.zeros(R.dim(d), 1)
            e_b[bs.index(b), 0] = 1
            for i, a in enumerate(as_):
                P[i, j] = gf2.matmul(R.word(a, d), e_b)[0, 0]
        Pinv = gf2.solve(P, gf2.identity(len(as_)))
        out[d] = (bs, as_, Pinv)
    return out


def split_free(M: SteenrodModule) -> SplitResult:
    """Split M as (free module) + (module with no free summands) in the valid range.

    Works upward through the degrees: a class x in degree g spans a free
    summand iff top*x != 0, and a dual functional on the top degree gives an
    explicit module retraction onto it.
    """
    flavor = M.flavor
    top = TOP_DEGREE[flavor]
    top_word = ALGEBRA_WORDS[flavor][-1]
    pair = _pairing_inverses(flavor)
    cur = M
    emb = {t: gf2.identity(M.dim(t)) for t in M.degrees}    # columns: current basis in M coordinates
    proj = {t: gf2.identity(M.dim(t)) for t in M.degrees}   # M coordinates -> current coordinates
    free: list[tuple[int, np.ndarray]] = []
    limit = M.top - top if M.trunc is None else M.trunc - top
    for g in range(M.bottom if M.dims else 0, (limit if M.dims else -1) + 1):
        if not cur.dim(g) or not cur.dim(g + top):
            continue
        T = cur.word(top_word, g)
        r = gf2.rank(T)
        if r == 0:
            continue
        ech = gf2.Echelon(cur.dim(g + top))
        picks = [j for j in range(cur.dim(g)) if ech.add(T[:, j])][:r]
        X = gf2.zeros(cur.dim(g), r)
        for i, j in enumerate(picks):
            X[j, i] = 1
        Y = gf2.matmul(T, X)
        Lam = gf2.solve(Y.T, gf2.identity(r)).T          # Lam @ Y = I
        for i in range(r):
            free.append((g, gf2.matmul(emb[g], X[:, [i]])[:, 0]))
        new_basis = {t: gf2.identity(cur.dim(t)) for t in cur.degrees}
        retract = {}
        for e in range(g, g + top + 1):
            if not cur.dim(e) or (e - g) not in pair:
                continue
            bs, as_, Pinv = pair[e - g]
            rows, proj_e = [], gf2.zeros(cur.dim(e), cur.dim(e))
            for i in range(r):
                mu = np.vstack([gf2.matmul(Lam[[i]], cur.word(a, e)) for a in as_])
                beta = gf2.matmul(Pinv, mu)                  # one row per b
                rows.append(beta)
                for bi, b in enumerate(bs):
                    bx = gf2.matmul(cur.word(b, g), X[:, [i]])
                    proj_e ^= gf2.matmul(bx, beta[[bi]])
            K = gf2.nullspace(np.vstack(rows))
            new_basis[e] = K
            retract[e] = gf2.identity(cur.dim(e)) ^ proj_e
        reduced = _restrict(cur, new_basis)
        for e, K in new_basis.items():
            if e in retract:
                coords = gf2.solve(K.T, retract[e]) if K.shape[0] else gf2.zeros(0, cur.dim(e))
                proj[e] = gf2.matmul(coords, proj[e])
                emb[e] = gf2.matmul(emb[e], K.T)
        cur = reduced
    valid = None if M.trunc is None else M.trunc - top - 1
    if valid is not None:
        cur = truncate(cur, valid)
    inc = ModuleMap(cur, M, {t: emb[t] for t in cur.degrees})
    prj = ModuleMap(M, cur, {t: proj[t] for t in M.degrees if t in cur.dims})
    degrees = sorted(g for g, _ in free if valid is None or g <= valid)
    return SplitResult(degrees, cur, inc, prj, free)


# ---------------------------------------------------------------------------
# Thom modules over products of BZ/2


def _monomials(n: int, t: int) -> list[tuple[int, ...]]:
    out = []
    for combo in itertools.combinations_with_replacement(range(n), t):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def _poly_mul(p: set, q: set) -> set:
    out: set = set()
    for a in p:
        for b in q:
            out ^= {tuple(x + y for x, y in zip(a, b))}
    return out


def _sq1_mono(e: tuple[int, ...]) -> set:
    out: set = set()
    for i, ei in enumerate(e):
        if ei % 2:
            out ^= {e[:i] + (ei + 1,) + e[i + 1:]}
    return out


def _sq2_mono(e: tuple[int, ...]) -> set:
    out: set = set()
    n = len(e)
    for i in range(n):
        if comb(e[i], 2) % 2:
            out ^= {e[:i] + (e[i] + 2,) + e[i + 1:]}
    for i, j in itertools.combinations(range(n), 2):
        if e[i] % 2 and e[j] % 2:
            f = list(e)
            f[i] += 1
            f[j] += 1
            out ^= {tuple(f)}
    return out


def _stiefel_whitney(n: int, twist) -> tuple[set, set]:
    """(w1, w2) of the virtual bundle sum m * L_lambda, as polynomials."""
    w1: set = set()
    w2: set = set()
    lin = []
    for cls, m in twist:
        cls = tuple(int(c) & 1 for c in cls)
        if len(cls) != n or not any(cls):
            raise ValueError("linear classes must be nonzero vectors of length n_vars")
        lam = {tuple(1 if j == i else 0 for j in range(n)) for i in range(n) if cls[i]}
        lin.append((lam, m))
    for lam, m in lin:
        if m % 2:
            w1 ^= lam
        if comb_signed(m, 2) % 2:
            w2 ^= _poly_mul(lam, lam)
    for (l1, m1), (l2, m2) in itertools.combinations(lin, 2):
        if (m1 * m2) % 2:
            w2 ^= _poly_mul(l1, l2)
    return w1, w2


def comb_signed(m: int, k: int) -> int:
    """Binomial coefficient m choose k for any integer m (formal power series sense)."""
    num = 1
    for i in range(k):
        num *= m - i
    den = 1
    for i in range(1, k + 1):
        den *= i
    return num // den


def thom_module(n_vars: int, twist, D: int, flavor: str = "A1",
                var_names: tuple[str, ...] | None = None) -> SteenrodModule:
    """Cohomology of the Thom spectrum of a rank-zero virtual bundle over (BZ/2)^n.

    ``twist`` lists (linear class, multiplicity) pairs; the class is a bit
    vector over the variables and the bundle is sum m * (L - 1).  Basis:
    U times monomials, through degree D.
    """
    names = var_names or tuple(f"x{i + 1}" for i in range(n_vars))
    w1, w2 = _stiefel_whitney(n_vars, twist)
    dims, index, labels = {}, {}, {}
    for t in range(D + 1):
        monos = _monomials(n_vars, t) if n_vars else ([()] if t == 0 else [])
        if not monos:
            continue
        dims[t] = len(monos)
        for i, e in enumerate(monos):
            index[e] = (t, i)
        labels[t] = ["U" + "".join(
            (names[v] if ev == 1 else f"{names[v]}^{ev}") for v, ev in enumerate(e) if ev) for e in monos]
    s1: dict[int, np.ndarray] = {}
    s2: dict[int, np.ndarray] = {}
    for e, (t, i) in index.items():
        img1 = _poly_mul(w1, {e}) ^ _sq1_mono(e)
        sq1e = _sq1_mono(e)
        img2 = _poly_mul(w2, {e}) ^ _poly_mul(w1, sq1e) ^ _sq2_mono(e)
        for blocks, img, r in ((s1, img1, 1), (s2, img2, 2)):
            if t + r not in dims:
                continue
            mat = blocks.setdefault(t, gf2.zeros(dims[t + r], dims[t]))
            for f in img:
                mat[index[f][1], i] ^= 1
    M = make_module("A1", dims, {"sq1": s1, "sq2": s2}, D, labels)
    return restrict_to_E1(M) if flavor == "E1" else M


def me_module(l: int, k: int, D: int, flavor: str = "A1") -> SteenrodModule:
    """H^* of the Thom spectrum of l (sigma - 1) and k (1 - sigma) over (BZ/2)^(l+k)."""
    n = l + k
    twist = [(tuple(1 if j == i else 0 for j in range(n)), 1 if i < l else -1) for i in range(n)]
    return thom_module(n, twist, D, flavor)


def reduced_me_module(l: int, k: int, D: int, flavor: str = "A1") -> tuple[SteenrodModule, list[int]]:
    """Non-free part of H^*(ME_{l,k}) through degree D, and the free generator degrees.

    The Thom module is a tensor product of one-variable pieces; free summands
    stay free after tensoring, so they are split off after each factor to keep
    the intermediate modules small.  Free generators are recovered by dividing
    the Poincare series of the whole module by that of the algebra.
    """
    n = l + k
    if n == 0:
        return trivial_module(flavor), []
    loss = TOP_DEGREE[flavor] + 1
    top = D + loss * (n - 1)
    factors = [thom_module(1, [((1,), 1 if i < l else -1)], top, flavor, var_names=(f"x{i + 1}",))
               for i in range(n)]
    cur = factors[0]
    for f in factors[1:]:
        cur = split_free(tensor(cur, f, max_labels=0)).reduced
    cur = truncate(cur, D)
    full = [comb(t + n - 1, n - 1) for t in range(D + 1)]
    alg = [0] * (D + 1)
    for w in ALGEBRA_WORDS[flavor]:
        if word_degree(w) <= D:
            alg[word_degree(w)] += 1
    free = []
    counts = [0] * (D + 1)
    for t in range(D + 1):
        c = full[t] - cur.dim(t) - sum(alg[s] * counts[t - s] for s in range(1, min(t, len(alg) - 1) + 1))
        if c < 0:
            raise ValueError("negative free count; the reduction is inconsistent")
        counts[t] = c
        free += [t] * c
    return cur, free


# ---------------------------------------------------------------------------
# named modules


def _extension_cocycle(base: SteenrodModule, fiber: SteenrodModule) -> SteenrodModule:
    """First nonsplit extension 0 -> fiber -> E -> base -> 0 in a deterministic order.

    E has underlying space base + fiber and operations
    op(x, y) = (op x, op y + c_op(x)); the relations are linear in c, and c is
    taken modulo coboundaries c_op = op h + h op.
    """
    flavor = base.flavor
    unknowns = []  # (op name, t, row, col)
    for name, r in OPS[flavor]:
        for t in base.degrees:
            for row in range(fiber.dim(t + r)):
                for col in range(base.dim(t)):
                    unknowns.append((name, t, row, col))

    def build(vec) -> SteenrodModule:
        dims = {t: base.dim(t) + fiber.dim(t) for t in set(base.dims) | set(fiber.dims)}
        ops = {}
        for name, r in OPS[flavor]:
            blocks = {}
            for t in dims:
                if not dims.get(t + r):
                    continue
                c = gf2.zeros(fiber.dim(t + r), base.dim(t))
                top = np.hstack([base.block(name, t), gf2.zeros(base.dim(t + r), fiber.dim(t))])
                bot = np.hstack([c, fiber.block(name, t)])
                blocks[t] = np.vstack([top, bot])
            ops[name] = blocks
        for u, on in zip(unknowns, vec):
            if on:
                name, t, row, col = u
                ops[name][t][base.dim(t + OP_DEGREE[name]) + row, col] ^= 1
        labels = {t: [base.label(t, i) for i in range(base.dim(t))] +
                  [fiber.label(t, i) for i in range(fiber.dim(t))] for t in dims}
        return make_module(flavor, dims, ops, None, labels)

    def defect(vec) -> np.ndarray:
        E = build(vec)
        parts = []
        for words, deg in E.relations():
            for t in base.degrees:
                total = gf2.zeros(E.dim(t + deg), E.dim(t))
                for w in words:
                    total ^= E.word(w, t)
                parts.append(total[base.dim(t + deg):, : base.dim(t)].ravel())
        return np.concatenate(parts) if parts else gf2.zeros(1, 0)[0]

    n = len(unknowns)
    basis_vecs = gf2.identity(n)
    relation_matrix = np.array([defect(v) for v in basis_vecs], dtype=np.uint8).T
    cocycles = gf2.nullspace(relation_matrix)
    # coboundaries: degree-preserving h: base_t -> fiber_t
    cob = []
    for t in base.degrees:
        for row in range(fiber.dim(t)):
            for col in range(base.dim(t)):
                h = gf2.zeros(fiber.dim(t), base.dim(t))
                h[row, col] = 1
                vec = gf2.zeros(1, n)[0]
                for name, r in OPS[flavor]:
                    # c_op restricted to source degree t - r and t
                    c_a = gf2.matmul(fiber.block(name, t), h)                 # base_t -> fiber_{t+r}
                    c_b = gf2.matmul(h, base.block(name, t - r)) if base.dim(t - r) else None
                    for idx, (nm, tt, rr, cc) in enumerate(unknowns):
                        if nm != name:
                            continue
                        if tt == t and c_a[rr, cc]:
                            vec[idx] ^= 1
                        if c_b is not None and tt == t - r and c_b[rr, cc]:
                            vec[idx] ^= 1
                cob.append(vec)
    cob = np.array(cob, dtype=np.uint8) if cob else gf2.zeros(0, n)
    classes = gf2.complement_basis(cob, cocycles)
    if classes.shape[0] == 0:
        raise ValueError("every extension splits")
    return build(classes[0])


def _upsilon(D: int) -> SteenrodModule:
    """Quotient of the degree >= 0 part of Sigma^-3 H~*(RP^inf) by its degree-1 class."""
    powers = [n for n in range(3, D + 4) if n != 4]
    dims = {n - 3: 1 for n in powers}
    s1, s2 = {}, {}
    for n in powers:
        t = n - 3
        if n % 2 and (n + 1) in powers:
            s1[t] = np.ones((1, 1), dtype=np.uint8)
        if comb(n, 2) % 2 and (n + 2) in powers:
            s2[t] = np.ones((1, 1), dtype=np.uint8)
    labels = {n - 3: (f"x^{n}",) for n in powers}
    return make_module("A1", dims, {"sq1": s1, "sq2": s2}, D, labels)


STANDARD_NAMES = ("F2", "A1", "E1", "N0", "N1", "N2", "N3", "J", "R2", "Qbar",
                  "F_0", "F_1", "F_2", "F_3", "Upsilon")


@lru_cache(maxsize=None)
def _standard(name: str, D: int) -> SteenrodModule:
    top = TOP_DEGREE["A1"] + 1
    if name == "F2":
        return trivial_module("A1")
    if name == "A1":
        return regular_module("A1")
    if name == "N1":
        return thom_module(1, [((1,), 1)], D, var_names=("x",))
    if name == "N0":
        return suspend(thom_module(1, [((1,), -1)], D + 1, var_names=("x",)), -1)
    if name == "N2":
        n1 = _standard("N1", D + top)
        return split_free(tensor(n1, n1)).reduced
    if name == "N3":
        n1 = _standard("N1", D + 2 * top)
        n2 = split_free(tensor(n1, n1)).reduced
        return split_free(tensor(n2, n1)).reduced
    if name == "J":
        return cyclic_module("A1", [("sq1", "sq2")])
    if name == "Qbar":
        return cyclic_module("A1", [("sq1",), ("sq2", "sq1", "sq2")])
    if name == "R2":
        A = regular_module("A1")
        basis = {t: gf2.identity(A.dim(t)) for t in A.degrees if t > 0}
        return suspend(_restrict(A, basis, {t: A.labels[t] for t in basis}), -1)
    if name == "F_0":
        return make_module("A1", {0: 1, 1: 1}, {"sq1": {0: [[1]]}}, None, {0: ("y0",), 1: ("y1",)})
    if name == "F_3":
        return suspend(cyclic_module("A1", [("sq2", "sq1", "sq2")]), 1)
    if name == "F_1":
        return suspend(dual(_standard("F_3", D)), 5)
    if name == "F_2":
        J = _standard("J", D)
        return _extension_cocycle(J, suspend(J, 1))
    if name == "Upsilon":
        return _upsilon(D)
    raise UnknownName(name)


def standard_module(name: str, D: int = 24, flavor: str = "A1") -> SteenrodModule:
    """A named module; infinite ones are truncated at degree D."""
    if name == "E1":
        return regular_module("E1")
    if name not in STANDARD_NAMES:
        raise UnknownName(f"unknown module {name!r}; choose from {', '.join(STANDARD_NAMES)}")
    M = _standard(name, D)
    return restrict_to_E1(M) if flavor == "E1" else M


# ---------------------------------------------------------------------------
# Hom spaces and stable isomorphism


def hom_space(M: SteenrodModule, N: SteenrodModule, through: float | None = None) -> list[dict[int, np.ndarray]]:
    """Basis of degree-preserving module maps M -> N, checked through a degree."""
    if M.flavor != N.flavor:
        raise FlavorMismatch(f"{M.flavor} vs {N.flavor}")
    lim = min(M.valid_through(), N.valid_through()) if through is None else through
    slots = {}
    n = 0
    for t in M.degrees:
        if N.dim(t) and t <= lim:
            slots[t] = (n, N.dim(t), M.dim(t))
            n += N.dim(t) * M.dim(t)
    eqs = []
    for name, r in OPS[M.flavor]:
        for t in M.degrees:
            if t + r > lim or not N.dim(t + r):
                continue
            rows = N.dim(t + r) * M.dim(t)
            block = gf2.zeros(rows, n)
            A = M.block(name, t)      # M_t -> M_{t+r}
            B = N.block(name, t)      # N_t -> N_{t+r}
            if t + r in slots:
                off, m_, k_ = slots[t + r]
                # vec(F_{t+r} A), F row-major of shape (m_, k_)
                block[:, off:off + m_ * k_] ^= np.kron(gf2.identity(m_), A.T) & 1
            if t in slots:
                off, m_, k_ = slots[t]
                block[:, off:off + m_ * k_] ^= np.kron(B, gf2.identity(k_)) & 1
            eqs.append(block)
    system = np.vstack(eqs) if eqs else gf2.zeros(0, n)
    sols = gf2.nullspace(system) if n else gf2.zeros(0, 0)
    out = []
    for v in sols:
        f = {}
        for t, (off, m_, k_) in slots.items():
            f[t] = v[off:off + m_ * k_].reshape(m_, k_).copy()
        out.append(f)
    return out


def stable_iso(M: SteenrodModule, N: SteenrodModule, max_candidates: int = 1 << 14,
               seed: int = 0) -> tuple[int, ModuleMap] | None:
    """Look for shift s and an isomorphism reduced(M) -> Sigma^s reduced(N) in range.

    ``None`` means no witness was found inside the searched candidates.
    """
    if M.flavor != N.flavor:
        raise FlavorMismatch(f"{M.flavor} vs {N.flavor}")
    rm = split_free(M).reduced
    rn = split_free(N).reduced
    if rm.is_zero() or rn.is_zero():
        if rm.is_zero() and rn.is_zero():
            return 0, ModuleMap(rm, rn, {})
        return None
    shift = rm.bottom - rn.bottom
    rn = suspend(rn, shift)
    lim = min(rm.valid_through(), rn.valid_through())
    degs = {t for t in set(rm.degrees) | set(rn.degrees) if t <= lim}
    if any(rm.dim(t) != rn.dim(t) for t in degs):
        return None
    basis = hom_space(rm, rn, lim)
    if not basis:
        return None

    def combo(bits) -> dict[int, np.ndarray]:
        f = {t: gf2.zeros(rn.dim(t), rm.dim(t)) for t in degs}
        for b, on in zip(basis, bits):
            if on:
                for t, mat in b.items():
                    f[t] = f[t] ^ mat
        return f

    def invertible(f) -> bool:
        return all(gf2.rank(f[t]) == rm.dim(t) for t in degs)

    h = len(basis)
    if (1 << h) <= max_candidates:
        candidates = (tuple((i >> j) & 1 for j in range(h)) for i in range(1, 1 << h))
    else:
        rng = random.Random(seed)
        candidates = (tuple(rng.getrandbits(1) for _ in range(h)) for _ in range(max_candidates))
    for bits in candidates:
        f = combo(bits)
        if invertible(f):
            return shift, ModuleMap(rm, rn, f)
    return None


# ---------------------------------------------------------------------------
# the spiral maps on cohomology


def _monomial_map(source: SteenrodModule, n_src: int, target: SteenrodModule, n_tgt: int,
                  shift: int, rule) -> ModuleMap:
    """Map between Thom modules given by a rule on exponent tuples."""
    blocks = {}
    for t in source.degrees:
        u = t + shift
        if not target.dim(u):
            continue
        where = {e: i for i, e in enumerate(_monomials(n_tgt, u))}
        mat = gf2.zeros(target.dim(u), source.dim(t))
        for i, e in enumerate(_monomials(n_src, t)):
            img = rule(e)
            if img in where:
                mat[where[img], i] ^= 1
        blocks[t] = mat
    return ModuleMap(source, target, blocks, shift)


def phi_cohomology(l: int, k: int, D: int) -> ModuleMap:
    """phi^*: Sigma H^*(ME_{l,k-1}) -> H^*(ME_{l,k}), multiplication by the last Euler class."""
    if k < 1:
        raise RangeExceeded("phi needs k >= 1")
    src = me_module(l, k - 1, D - 1)
    tgt = me_module(l, k, D)
    return _monomial_map(src, l + k - 1, tgt, l + k, 1, lambda e: e + (1,))


def psi_cohomology(l: int, k: int, D: int) -> ModuleMap:
    """psi^*: Sigma H^*(ME_{l+1,k}) -> H^*(ME_{l,k}).

    The last positive variable a and the last negative variable b of the
    source are pulled back along the diagonal and multiplied by the Euler
    class: U x^alpha a^i b^j maps to U x^alpha x_last^(i+j+1).
    """
    if k < 1:
        raise RangeExceeded("psi needs k >= 1")
    src = me_module(l + 1, k, D - 1)
    tgt = me_module(l, k, D)

    def rule(e):
        a, b = e[l], e[l + k]
        rest_pos = e[:l]
        rest_neg = e[l + 1:l + k]
        return rest_pos + rest_neg + (a + b + 1,)

    return _monomial_map(src, l + k + 1, tgt, l + k, 1, rule)


def diagonal_cohomology(D: int, l: int = 0, k: int = 0) -> ModuleMap:
    """(id ^ Delta)^*: H^*(ME_{l+1,k+1}) -> H^*(ME_{l,k}) (x) H~^*(BZ/2).

    The last positive variable a and the last negative variable b both pull
    back to x, so U y^alpha a^i b^j maps to U y^alpha x^(i+j); monomials with
    i = j = 0 land in the basepoint and map to zero.
    """
    n = l + k
    src = me_module(l + 1, k + 1, D)
    twist = [(tuple(1 if j == i else 0 for j in range(n + 1)), 1 if i < l else -1) for i in range(n)]
    names = tuple(f"x{i + 1}" for i in range(n)) + ("x",)
    full = thom_module(n + 1, twist, D, var_names=names)
    kept = {t: [e for e in _monomials(n + 1, t) if e[-1] >= 1] for t in full.degrees}
    basis = {}
    for t, monos in kept.items():
        if not monos:
            continue
        rows = gf2.zeros(len(monos), full.dim(t))
        where = {e: i for i, e in enumerate(_monomials(n + 1, t))}
        for r, e in enumerate(monos):
            rows[r, where[e]] = 1
        basis[t] = rows
    tgt = _restrict(full, basis, {t: [full.labels[t][_monomials(n + 1, t).index(e)] for e in kept[t]]
                                  for t in basis})

    def rule(e):
        a, b = e[l], e[l + 1 + k]
        return e[:l] + e[l + 1:l + 1 + k] + (a + b,)

    blocks = {}
    for t in src.degrees:
        if not tgt.dim(t):
            continue
        where = {e: i for i, e in enumerate(kept[t])}
        mat = gf2.zeros(tgt.dim(t), src.dim(t))
        for i, e in enumerate(_monomials(n + 2, t)):
            img = rule(e)
            if img in where:
                mat[where[img], i] ^= 1
        blocks[t] = mat
    return ModuleMap(src, tgt, blocks)