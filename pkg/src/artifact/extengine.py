"""Minimal resolutions, Ext charts and homotopy groups read off from them.

Everything here is at the level of E2 pages: charts are Ext over A(1) or E(1)
of a truncated module, and groups are read from h0-towers under the standing
assumption that the Adams spectral sequences in question collapse with no
exotic extensions beyond multiplication by 2 = h0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from . import gf2
from .errors import (
    DegreeBeyondABPTable,
    TruncationTooSmall,
    UnknownName,
    UnsupportedInput,
    WindowExceeded,
)
from .kfree import FiniteAbelianGroup, ZERO
from .steenrod import (
    ALGEBRA_WORDS,
    OPS,
    SteenrodModule,
    margolis_homology,
    reduced_me_module,
    regular_module,
    split_free,
    standard_module,
    suspend,
    tensor,
    thom_module,
    word_degree,
)

__all__ = [
    "Resolution",
    "ExtChart",
    "minimal_resolution",
    "ext_chart",
    "groups_from_chart",
    "ko_homology",
    "ku_homology",
    "spin_bordism_low",
    "parse_twist",
    "ABP_REAL",
    "ABP_COMPLEX",
    "ABP_REAL_CEILING",
    "ABP_COMPLEX_CEILING",
]

# Product generators read off a minimal resolution: name -> (flavor, word).
PRODUCTS = {
    "A1": {"h0": ("sq1",), "h1": ("sq2",)},
    "E1": {"h0": ("q0",), "v1": ("q1",)},
}


@lru_cache(maxsize=None)
def _mult_table(flavor: str) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """table[w][u] = word indices appearing in the product w*u."""
    R = regular_module(flavor)
    words = ALGEBRA_WORDS[flavor]
    by_degree: dict[int, list[int]] = {}
    for i, w in enumerate(words):
        by_degree.setdefault(word_degree(w), []).append(i)
    out = []
    for w in words:
        row = []
        for u in words:
            du = word_degree(u)
            dv = du + word_degree(w)
            e = gf2.zeros(R.dim(du), 1)
            e[by_degree[du].index(words.index(u)), 0] = 1
            prod = gf2.matmul(R.word(w, du), e)[:, 0] if R.dim(dv) else []
            row.append(tuple(by_degree[dv][j] for j in np.flatnonzero(prod)))
        out.append(tuple(row))
    return tuple(out)


class _FreeModule:
    """Free module on generators of the given degrees; basis (generator, word)."""

    def __init__(self, flavor: str, gens: list[int]):
        self.flavor = flavor
        self.gens = list(gens)
        self.words = ALGEBRA_WORDS[flavor]
        self.wdeg = [word_degree(w) for w in self.words]
        self._basis: dict[int, list[tuple[int, int]]] = {}
        self._index: dict[int, dict[tuple[int, int], int]] = {}
        self._wmat: dict[tuple[int, int], np.ndarray] = {}

    def basis(self, t: int) -> list[tuple[int, int]]:
        if t not in self._basis:
            b = [(i, w) for i, d in enumerate(self.gens) for w in range(len(self.words))
                 if d + self.wdeg[w] == t]
            self._basis[t] = b
            self._index[t] = {x: j for j, x in enumerate(b)}
        return self._basis[t]

    def dim(self, t: int) -> int:
        return len(self.basis(t))

    def index(self, t: int) -> dict[tuple[int, int], int]:
        self.basis(t)
        return self._index[t]

    def word_matrix(self, w: int, t: int) -> np.ndarray:
        key = (w, t)
        if key not in self._wmat:
            table = _mult_table(self.flavor)
            u = t + self.wdeg[w]
            tgt = self.index(u)
            mat = gf2.zeros(self.dim(u), self.dim(t))
            for col, (i, v) in enumerate(self.basis(t)):
                for p in table[w][v]:
                    mat[tgt[(i, p)], col] ^= 1
            self._wmat[key] = mat
        return self._wmat[key]


@dataclass(eq=False)
class Resolution:
    module: SteenrodModule
    flavor: str
    s_max: int
    t_max: int
    generators: list[list[int]]            # stage -> generator degrees
    images: list[list[np.ndarray]]         # stage -> image of each generator (target coordinates)
    free: list[_FreeModule] = field(repr=False, default_factory=list)
    minimal: bool = True

    def ext_dim(self, s: int, t: int) -> int:
        return sum(1 for d in self.generators[s] if d == t) if s < len(self.generators) else 0

    def check_d_squared(self) -> bool:
        """d o d = 0 on every generator."""
        for s in range(1, len(self.generators)):
            lower = self.free[s - 1]
            target_act = self._target_action(s - 1)
            for d, y in zip(self.generators[s], self.images[s]):
                # d(y) = sum over basis (i, w) of y coefficient * w * d(g_i)
                acc = None
                for j, (i, w) in enumerate(lower.basis(d)):
                    if y[j]:
                        v = target_act(i, w)
                        acc = v if acc is None else acc ^ v
                if acc is not None and acc.any():
                    return False
        return True

    def _target_action(self, s: int):
        gens, imgs = self.generators[s], self.images[s]
        if s == 0:
            M = self.module
            return lambda i, w: gf2.matmul(M.word(ALGEBRA_WORDS[self.flavor][w], gens[i]),
                                           imgs[i].reshape(-1, 1))[:, 0]
        tgt = self.free[s - 1]
        return lambda i, w: gf2.matmul(tgt.word_matrix(w, gens[i]), imgs[i].reshape(-1, 1))[:, 0]


def minimal_resolution(M: SteenrodModule, s_max: int, t_max: int) -> Resolution:
    """Minimal free resolution of M through homological degree s_max and internal degree t_max."""
    if M.trunc is not None and t_max > M.trunc:
        raise TruncationTooSmall(f"module valid through {M.trunc}, requested t_max = {t_max}")
    flavor = M.flavor
    words = ALGEBRA_WORDS[flavor]
    nwords = len(words)
    wdeg = [word_degree(w) for w in words]
    bottom = M.bottom if M.dims else 0
    generators: list[list[int]] = []
    images: list[list[np.ndarray]] = []
    frees: list[_FreeModule] = []
    # "to cover" subspaces: stage 0 covers all of M
    tdim = M.dim
    cover = {t: gf2.identity(M.dim(t)) for t in range(bottom, t_max + 1)}

    def act_on_target(stage: int, w: int, t: int, y: np.ndarray) -> np.ndarray:
        if stage == 0:
            return gf2.matmul(M.word(words[w], t), y.reshape(-1, 1))[:, 0]
        return gf2.matmul(frees[stage - 1].word_matrix(w, t), y.reshape(-1, 1))[:, 0]

    for s in range(s_max + 1):
        gens: list[int] = []
        imgs: list[np.ndarray] = []
        word_imgs: list[list[np.ndarray | None]] = []
        kernel: dict[int, np.ndarray] = {}
        target_dim = tdim if s == 0 else frees[s - 1].dim
        for t in range(bottom + s, t_max + 1):
            cols = []
            for i, d in enumerate(gens):
                w_deg = t - d
                for w in range(nwords):
                    if wdeg[w] == w_deg:
                        v = word_imgs[i][w]
                        if v is None:
                            v = act_on_target(s, w, d, imgs[i]) if target_dim(t) else gf2.zeros(1, 0)[0]
                            word_imgs[i][w] = v
                        cols.append(v)
            need = cover.get(t)
            if need is not None and need.shape[0]:
                ech = gf2.Echelon(target_dim(t))
                for c in cols:
                    ech.add(c)
                for row in need:
                    if ech.add(row):
                        gens.append(t)
                        imgs.append(row.copy())
                        word_imgs.append([None] * nwords)
                        word_imgs[-1][0] = row.copy()
                        cols.append(row.copy())
            if cols and target_dim(t):
                D = np.array(cols, dtype=np.uint8).T
                kernel[t] = gf2.nullspace(D)
            else:
                kernel[t] = gf2.identity(len(cols))
        generators.append(gens)
        images.append(imgs)
        F = _FreeModule(flavor, gens)
        frees.append(F)
        # kernel rows are in the column order used above, which is F.basis(t) order
        cover = {t: k for t, k in kernel.items() if k.shape[0]}
        tdim = F.dim
    return Resolution(M, flavor, s_max, t_max, generators, images, frees)


# ---------------------------------------------------------------------------
# charts


@dataclass(eq=False)
class ExtChart:
    flavor: str
    entries: dict[tuple[int, int], int]                       # (s, t) -> dim
    products: dict[str, dict[tuple[int, int], np.ndarray]]    # name -> (s, t) -> matrix
    s_max: int
    t_valid: int
    z_columns: dict[int, int] = field(default_factory=dict)   # column -> expected rank of Z
    bottom: int = 0

    def dim(self, s: int, t: int) -> int:
        return self.entries.get((s, t), 0)

    def column(self, n: int) -> list[tuple[int, int]]:
        return [(s, self.dim(s, n + s)) for s in range(self.s_max + 1) if self.dim(s, n + s)]

    def product(self, name: str, s: int, t: int) -> np.ndarray:
        r = {"h0": 1, "h1": 2, "v1": 3}[name]
        mat = self.products.get(name, {}).get((s, t))
        if mat is None:
            return gf2.zeros(self.dim(s + 1, t + r), self.dim(s, t))
        return mat

    def is_empty(self) -> bool:
        return not any(self.entries.values())

    def to_json(self) -> dict:
        out = {"flavor": self.flavor, "s_max": self.s_max, "t_valid": self.t_valid,
               "entries": [{"s": s, "t": t, "dim": d} for (s, t), d in sorted(self.entries.items()) if d]}
        for name, blocks in self.products.items():
            out[name] = [{"s": s, "t": t, "matrix": mat.tolist()}
                         for (s, t), mat in sorted(blocks.items()) if mat.any()]
        return out

    def render(self, n_max: int | None = None) -> str:
        """Text chart: columns are t - s, rows are s (top row = s_max)."""
        hi = self.t_valid - self.s_max if n_max is None else n_max
        lo = min(self.bottom, 0)
        width = 3
        lines = []
        for s in range(self.s_max, -1, -1):
            cells = []
            for n in range(lo, hi + 1):
                d = self.dim(s, n + s)
                cells.append(("." if d == 0 else ("o" if d == 1 else str(d))).rjust(width))
            lines.append(f"{s:>3} |" + "".join(cells))
        lines.append("    +" + "-" * (width * (hi - lo + 1)))
        lines.append("     " + "".join(str(n).rjust(width) for n in range(lo, hi + 1)))
        return "\n".join(lines)


def _z_columns(M: SteenrodModule, n_max: int) -> dict[int, int]:
    """Rank of the rational part in each column, from Q0-Margolis homology.

    Inverting h0 leaves Q0-homology tensored with h0-inverted Ext of F2, which
    has towers every 4 (A(1)) or every 2 (E(1)) stems.
    """
    period = 4 if M.flavor == "A1" else 2
    h = margolis_homology(M, 0)
    out: dict[int, int] = {}
    for d, (dim, _) in h.items():
        if not dim:
            continue
        n = d
        while n <= n_max:
            out[n] = out.get(n, 0) + dim
            n += period
    return out


def ext_chart(M: SteenrodModule, s_max: int, t_max: int | None = None) -> ExtChart:
    """Ext^{s,t} of M with h0 and h1 (A(1)) or h0 and v1 (E(1)) products."""
    if t_max is None:
        if M.trunc is None:
            t_max = (M.top if M.dims else 0) + 2 * s_max + 8
        else:
            t_max = M.trunc
    res = minimal_resolution(M, s_max, t_max)
    return chart_from_resolution(res)


def chart_from_resolution(res: Resolution) -> ExtChart:
    flavor = res.flavor
    words = ALGEBRA_WORDS[flavor]
    entries: dict[tuple[int, int], int] = {}
    pos: list[dict[int, list[int]]] = []
    for s, gens in enumerate(res.generators):
        by_t: dict[int, list[int]] = {}
        for i, d in enumerate(gens):
            by_t.setdefault(d, []).append(i)
        pos.append(by_t)
        for t, idx in by_t.items():
            entries[(s, t)] = len(idx)
    products: dict[str, dict[tuple[int, int], np.ndarray]] = {}
    for name, word in PRODUCTS[flavor].items():
        w = words.index(word)
        r = word_degree(word)
        blocks = {}
        for s in range(len(res.generators) - 1):
            lower = res.free[s]
            for t, idx in pos[s].items():
                upper = pos[s + 1].get(t + r, [])
                if not upper:
                    continue
                mat = gf2.zeros(len(upper), len(idx))
                where = lower.index(t + r)
                for a, g2 in enumerate(upper):
                    y = res.images[s + 1][g2]
                    for b, g in enumerate(idx):
                        mat[a, b] = y[where[(g, w)]]
                blocks[(s, t)] = mat
        products[name] = blocks
    M = res.module
    bottom = M.bottom if M.dims else 0
    return ExtChart(flavor, entries, products, res.s_max, res.t_max,
                    _z_columns(M, res.t_max - res.s_max) if M.dims else {}, bottom)


def _intervals(chart: ExtChart, n: int) -> list[tuple[int, int]]:
    """Decompose column n into h0-strings; returns (start, end) filtrations."""
    top = chart.s_max
    dims = [chart.dim(s, n + s) for s in range(top + 1)]

    def h0_power(a: int, b: int) -> np.ndarray:
        mat = gf2.identity(dims[a])
        for s in range(a, b):
            mat = gf2.matmul(chart.product("h0", s, n + s), mat)
        return mat

    cache: dict[tuple[int, int], int] = {}

    def rho(a: int, b: int) -> int:
        if a < 0 or b > top or a > b:
            return 0
        if (a, b) not in cache:
            cache[(a, b)] = dims[a] if a == b else gf2.rank(h0_power(a, b))
        return cache[(a, b)]

    out = []
    for a in range(top + 1):
        for b in range(a, top + 1):
            c = rho(a, b) - rho(a - 1, b) - rho(a, b + 1) + rho(a - 1, b + 1)
            out += [(a, b)] * c
    return out


def groups_from_chart(chart: ExtChart, n: int, z_rank: int | None = None) -> FiniteAbelianGroup:
    """Homotopy group in stem n, assuming collapse and 2 = h0 on towers.

    Strings that reach the top filtration are infinite towers; they are
    accepted as copies of Z only when their number matches the expected rank.
    """
    if n + chart.s_max > chart.t_valid:
        raise WindowExceeded(f"stem {n} needs t up to {n + chart.s_max}, chart valid to {chart.t_valid}")
    expected = chart.z_columns.get(n, 0) if z_rank is None else z_rank
    orders = []
    open_strings = 0
    for a, b in _intervals(chart, n):
        if b == chart.s_max:
            open_strings += 1
        else:
            orders.append(2 ** (b - a + 1))
    if open_strings != expected:
        raise WindowExceeded(
            f"stem {n}: {open_strings} towers reach s = {chart.s_max}, expected {expected} copies of Z")
    return FiniteAbelianGroup.from_invariants(open_strings, orders)


# ---------------------------------------------------------------------------
# ko and ku of the ME spectra


S_MAX = 20
N_MAX = 19


@lru_cache(maxsize=None)
def _me_chart(l: int, k: int, flavor: str) -> tuple[ExtChart, tuple[int, ...]]:
    D = N_MAX + S_MAX
    reduced, free = reduced_me_module(l, k, D, flavor)
    return ext_chart(reduced, S_MAX, D), tuple(free)


def _whitney(free: tuple[int, ...], n: int) -> FiniteAbelianGroup:
    return FiniteAbelianGroup.from_invariants(0, [2] * sum(1 for g in free if g == n))


def _check_range(n: int) -> None:
    if n > N_MAX:
        raise WindowExceeded(f"degree {n} is above the supported window {N_MAX}")


def ko_homology(l: int, k: int, n: int, include_whitney: bool = False) -> FiniteAbelianGroup:
    """ko_n(ME_{l,k}) from the Ext chart of the non-free part of its cohomology."""
    if (l, k) == (0, 0):
        raise UnsupportedInput("ME_{0,0} is the sphere; use spin_bordism_low for a point")
    if l < 0 or k < 0:
        raise UnsupportedInput("l and k must be nonnegative")
    _check_range(n)
    chart, free = _me_chart(l, k, "A1")
    if n < chart.bottom - 1:
        return ZERO
    g = groups_from_chart(chart, n) if n >= 0 else ZERO
    return g + _whitney(free, n) if include_whitney else g


def ku_homology(m: int, n: int, include_whitney: bool = False) -> FiniteAbelianGroup:
    """ku_n(ME_m) through the E(1) pipeline."""
    if m < 1:
        raise UnsupportedInput("m must be positive")
    _check_range(n)
    chart, free = _me_chart(m, 0, "E1")
    g = groups_from_chart(chart, n) if n >= 0 else ZERO
    return g + _whitney(free, n) if include_whitney else g


# ---------------------------------------------------------------------------
# low-degree bordism through the ABP splittings

# Shifts as printed; the lists continue but only the entries below are used.
ABP_REAL = {
    "ko": (0, 8, 16, 16, 24, 24, 24, 24),
    "tau2ko": (8, 16, 16, 24, 24, 24, 24),
    "HF2": (20, 22, 24, 26, 26),
}
ABP_COMPLEX = {
    "ku": (0, 4, 8, 8, 12, 12, 12, 16, 16, 16, 16, 16),
    "HF2": (10, 14, 18, 18, 18, 20, 22, 22, 22, 22, 22),
}
ABP_REAL_CEILING = 19
ABP_COMPLEX_CEILING = 17


@dataclass(frozen=True)
class Twist:
    """A twist for bordism: a Thom spectrum over a product of BZ/2's."""

    kind: str             # "real" or "complex"
    n_vars: int
    classes: tuple        # ((linear class, multiplicity), ...)
    name: str

    def module(self, D: int, flavor: str) -> SteenrodModule:
        return thom_module(self.n_vars, list(self.classes), D, flavor)

    def cohomology_dim(self, d: int) -> int:
        if d < 0:
            return 0
        if self.n_vars == 0:
            return 1 if d == 0 else 0
        return comb(d + self.n_vars - 1, self.n_vars - 1)


def parse_twist(spec: str) -> Twist:
    """Parse 'spin:(l,k)', 'spinc:m' or 'q8'."""
    text = spec.strip().lower().replace(" ", "")
    if text == "q8":
        return Twist("real", 2, (((1, 0), 1), ((0, 1), 1), ((1, 1), 1)), "q8")
    if text.startswith("spin:"):
        body = text[5:].strip("()")
        try:
            l, k = (int(x) for x in body.split(","))
        except ValueError:
            raise UnsupportedInput(f"cannot parse twist {spec!r}") from None
        if l < 0 or k < 0:
            raise UnsupportedInput("l and k must be nonnegative")
        n = l + k
        classes = tuple((tuple(1 if j == i else 0 for j in range(n)), 1 if i < l else -1) for i in range(n))
        return Twist("real", n, classes, f"spin:({l},{k})")
    if text.startswith("spinc:"):
        try:
            m = int(text[6:].strip("()"))
        except ValueError:
            raise UnsupportedInput(f"cannot parse twist {spec!r}") from None
        if m < 0:
            raise UnsupportedInput("m must be nonnegative")
        classes = tuple((tuple(1 if j == i else 0 for j in range(m)), 1) for i in range(m))
        return Twist("complex", m, classes, f"spinc:{m}")
    raise UnknownName(f"unknown twist {spec!r}; use spin:(l,k), spinc:m or q8")


@lru_cache(maxsize=None)
def _twist_chart(twist: Twist, flavor: str, joker: bool) -> tuple[ExtChart, tuple[int, ...]]:
    """Chart of the reduced part of H*(X) (or Sigma^2 J (x) H*(X)) and free generator degrees."""
    D = N_MAX + S_MAX
    extra = 7 if flavor == "A1" else 5
    if twist.n_vars >= 2 and twist.name.startswith(("spin:", "spinc:")):
        l, k = (twist.n_vars, 0) if twist.kind == "complex" else _lk(twist)
        reduced, free = reduced_me_module(l, k, D + (extra if joker else 0), flavor)
        split_M = None
    else:
        split_M = split_free(twist.module(D + extra * (2 if joker else 1), flavor))
        reduced, free = split_M.reduced, list(split_M.free_degrees)
    if joker:
        J2 = suspend(standard_module("J"), 2)
        if flavor != "A1":
            raise UnsupportedInput("the connective cover term only appears in the real splitting")
        # J (x) free A(1) on a generator in degree g is free on generators g + |J basis|
        jfree = [g + t for g in free for t in J2.degrees for _ in range(J2.dim(t))]
        split_J = split_free(tensor(J2, reduced))
        reduced = split_J.reduced
        free = sorted(jfree + list(split_J.free_degrees))
    return ext_chart(reduced, S_MAX, min(reduced.trunc, D) if reduced.trunc is not None else D), tuple(free)


def _lk(twist: Twist) -> tuple[int, int]:
    l = sum(1 for _, m in twist.classes if m > 0)
    return l, twist.n_vars - l


def _ko_like(twist: Twist, m: int, joker: bool) -> FiniteAbelianGroup:
    if m < 0:
        return ZERO
    flavor = "A1" if twist.kind == "real" else "E1"
    chart, free = _twist_chart(twist, flavor, joker)
    return groups_from_chart(chart, m) + _whitney(free, m)


def spin_bordism_low(twist: Twist | str, n: int) -> FiniteAbelianGroup:
    """Twisted spin (or spin^c) bordism in degree n assembled from the ABP splitting."""
    if isinstance(twist, str):
        twist = parse_twist(twist)
    if n < 0:
        return ZERO
    total = ZERO
    if twist.kind == "real":
        if n > ABP_REAL_CEILING:
            raise DegreeBeyondABPTable(f"degree {n} exceeds {ABP_REAL_CEILING}")
        for a in ABP_REAL["ko"]:
            total = total + _ko_like(twist, n - a, joker=False)
        for b in ABP_REAL["tau2ko"]:
            total = total + _ko_like(twist, n - b, joker=True)
        for c in ABP_REAL["HF2"]:
            total = total + FiniteAbelianGroup.from_invariants(0, [2] * twist.cohomology_dim(n - c))
    else:
        if n > ABP_COMPLEX_CEILING:
            raise DegreeBeyondABPTable(f"degree {n} exceeds {ABP_COMPLEX_CEILING}")
        for s in ABP_COMPLEX["ku"]:
            total = total + _ko_like(twist, n - s, joker=False)
        for t in ABP_COMPLEX["HF2"]:
            total = total + FiniteAbelianGroup.from_invariants(0, [2] * twist.cohomology_dim(n - t))
    return total
