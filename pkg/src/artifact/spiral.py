"""Closed forms for long summands and free-to-interacting images, and Bott spirals.

Dimensions ``d`` are spatial; the matching bordism degree is ``n = d + 1``.
A spiral alternates the two maps phi and psi.  phi keeps the order of the
free-to-interacting image and psi doubles it, so two steps double the order
and a full turn of eight steps multiplies it by 16.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, replace

from .errors import BothZero, StepNotDefined, UnknownName, UnsupportedInput
from .kfree import FiniteAbelianGroup, Z, Z2, ZERO

__all__ = [
    "ldeg",
    "long_summand",
    "F2IImage",
    "f2i_image_real",
    "f2i_image_complex",
    "anderson_dual",
    "az_label",
    "parse_class",
    "SpiralState",
    "SpiralRow",
    "SpiralTable",
    "initial_state",
    "spiral_step",
    "generate_spiral",
]

_BASE = {
    (0, 0): "D", (1, 0): "BDI", (2, 0): "AI", (3, 0): "CI", (4, 0): "C′",
    (0, 1): "DIII", (0, 2): "AII", (0, 3): "CII",
}
_PRIMES = {0: "", 1: "′", 2: "″", 3: "‴"}


def _check(l: int, k: int) -> None:
    if l < 0 or k < 0:
        raise UnsupportedInput("l and k must be nonnegative")
    if l == 0 and k == 0:
        raise BothZero("(l, k) = (0, 0) has no free-to-interacting map")


def ldeg(l: int, k: int) -> int:
    """Lowest degree in which the long summand can be nonzero."""
    _check(l, k)
    j = l // 4
    return 4 * j + k - 1 if l % 4 == 0 else 4 * j + k


def long_summand(l: int, k: int, n: int) -> int | None:
    """Order of the long cyclic summand of ko_n(ME_{l,k}), if there is one."""
    _check(l, k)
    i, j = l % 4, l // 4
    if n < ldeg(l, k):
        return None
    m = (n - 4 * j - k) // 8
    r = (n - (l + k - 2 * i)) % 8
    if r == 3:
        return 2 ** (4 * m + 4 - i)
    if r == 7:
        return 2 ** (4 * m + 5 - i)
    return None


@dataclass(frozen=True)
class F2IImage:
    """Image of the free-to-interacting map: domain, image and the map's type."""

    domain: FiniteAbelianGroup
    image: FiniteAbelianGroup
    kind: str  # "surjection", "isomorphism" or "zero"

    @property
    def order(self) -> int:
        return self.image.order or 1

    def __str__(self) -> str:
        if self.kind == "surjection":
            return f"{self.domain} ->> {self.image}"
        if self.kind == "isomorphism":
            return f"{self.domain} ~> {self.image}"
        return "0"

    def to_json(self) -> dict:
        return {"domain": self.domain.to_json(), "image": self.image.to_json(), "kind": self.kind}


_NO_IMAGE = F2IImage(ZERO, ZERO, "zero")


def f2i_image_real(l: int, k: int, d: int) -> F2IImage:
    _check(l, k)
    i = l % 4
    if d < ldeg(l, k) - 2:
        return _NO_IMAGE
    m = (d - l + i - k + 1) // 8
    r = (d - (l + k - 2 * i)) % 8
    if r == 2:
        return F2IImage(Z, FiniteAbelianGroup.from_invariants(0, [2 ** (4 + 4 * m - i)]), "surjection")
    if r == 6:
        return F2IImage(Z, FiniteAbelianGroup.from_invariants(0, [2 ** (5 + 4 * m - i)]), "surjection")
    if r in (0, 1) and d + 1 >= ldeg(l, k):
        # the short summand only exists from ldeg on; below that the target is zero
        return F2IImage(Z2, Z2, "isomorphism")
    return _NO_IMAGE


def f2i_image_complex(m: int, d: int) -> F2IImage:
    if m < 1:
        raise UnsupportedInput("m must be positive")
    if (d - m) % 2 or d - m < -2:
        return _NO_IMAGE
    return F2IImage(Z, FiniteAbelianGroup.from_invariants(0, [2 ** (2 + (d - m) // 2)]), "surjection")


def anderson_dual(pi_n: FiniteAbelianGroup, pi_prev: FiniteAbelianGroup) -> FiniteAbelianGroup:
    """Free part of pi_n plus the torsion of pi_prev (after a non-canonical splitting)."""
    return FiniteAbelianGroup(pi_n.free_rank, pi_prev.torsion)


def _primes(n: int) -> str:
    return _PRIMES.get(n, "′" * n)


def _canonical(l: int, k: int) -> tuple[tuple[int, int], int]:
    """Base pair from the table and the number of primes added on top."""
    options = []
    t = -(l // 4)
    while k - 4 * t >= 0:
        a, b = l + 4 * t, k - 4 * t
        if a >= 0:
            m = min(a, b)
            if (a - m, b - m) in _BASE:
                options.append((m, (a - m, b - m)))
        t += 1
    if not options:
        raise UnsupportedInput(f"no table entry for ({l}, {k})")
    m, base = min(options)
    return base, m


def az_label(l: int, k: int) -> str:
    if l < 0 or k < 0:
        raise UnsupportedInput("l and k must be nonnegative")
    base, m = _canonical(l, k)
    name = _BASE[base]
    if name.endswith("′"):
        return name[:-1] + _primes(m + 1)
    return name + _primes(m)


def _complex_label(m: int) -> str:
    return "AIII" if m % 2 else "A′"


def parse_class(label: str) -> tuple[int, int]:
    """Inverse of az_label on its canonical outputs; accepts ASCII primes."""
    text = label.strip().replace("''", "″").replace("'", "′")
    text = text.replace("″", "′′").replace("‴", "′′′")
    base = text.rstrip("′")
    primes = len(text) - len(base)
    for (a, b), name in _BASE.items():
        stem = name.rstrip("′")
        extra = len(name) - len(stem)
        if stem == base and primes >= extra:
            m = primes - extra
            return a + m, b + m
    raise UnknownName(f"unknown class label {label!r}")


# ---------------------------------------------------------------------------
# states and steps


@dataclass(frozen=True)
class SpiralState:
    d: int
    lk: tuple[int, int]
    order: int | None
    label: str
    kind: str = "real"

    def to_json(self) -> dict:
        return {"d": self.d, "l": self.lk[0], "k": self.lk[1], "order": self.order,
                "label": self.label, "kind": self.kind}


def _order(kind: str, lk: tuple[int, int], d: int) -> int | None:
    img = f2i_image_real(*lk, d) if kind == "real" else f2i_image_complex(lk[0], d)
    return img.order if img.kind == "surjection" else None


def initial_state(d: int, start, kind: str = "real") -> SpiralState:
    """State at spatial dimension d for a class label or an explicit (l, k) / m."""
    if kind == "complex":
        if isinstance(start, str):
            text = start.strip().replace("'", "′")
            if text == "AIII":
                m = 1
            elif text == "A′":
                m = 2
            else:
                raise UnknownName(f"unknown complex class {start!r}")
        else:
            m = int(start[0] if isinstance(start, tuple) else start)
        lk = (m, 0)
        return SpiralState(d, lk, _order(kind, lk, d), _complex_label(m), kind)
    lk = parse_class(start) if isinstance(start, str) else (int(start[0]), int(start[1]))
    _check(*lk)
    return SpiralState(d, lk, _order(kind, lk, d), az_label(*lk), kind)


def spiral_step(state: SpiralState, kind: str) -> SpiralState:
    """Apply phi, psi or swap; the new order is checked against the closed form."""
    l, k = state.lk
    if state.kind == "complex":
        if kind == "phi":
            lk = (l + 1, 0)
        elif kind == "psi":
            if l < 2:
                raise StepNotDefined("psi needs m >= 2 in the complex spiral")
            lk = (l - 1, 0)
        else:
            raise StepNotDefined(f"{kind} is not a complex spiral step")
        new = SpiralState(state.d + 1, lk, None, _complex_label(lk[0]), "complex")
    elif kind == "phi":
        new = SpiralState(state.d + 1, (l, k + 1), None, az_label(l, k + 1))
    elif kind == "psi":
        if l < 1:
            raise StepNotDefined("psi needs l >= 1; swap (0, k) to (4, k - 4) first")
        if not (k >= 1 or l - 1 >= 3):
            raise StepNotDefined(f"psi from ({l}, {k}) lands outside the admissible range")
        new = SpiralState(state.d + 1, (l - 1, k), None, az_label(l - 1, k))
    elif kind == "swap":
        if k >= 4:
            lk = (l + 4, k - 4)
        elif l >= 4:
            lk = (l - 4, k + 4)
        else:
            raise StepNotDefined("swap needs l >= 4 or k >= 4")
        new = SpiralState(state.d, lk, state.order, az_label(*lk))
        return new
    else:
        raise StepNotDefined(f"unknown step {kind!r}")
    expected = state.order * 2 if (kind == "psi" and state.order) else state.order
    actual = _order(new.kind, new.lk, new.d)
    if actual != expected:
        raise StepNotDefined(
            f"{kind} from {state.lk} at d={state.d}: order {state.order} does not continue to {actual}")
    return replace(new, order=actual)


@dataclass(frozen=True)
class SpiralRow:
    step: int
    state: SpiralState
    map_kind: str    # "start", "phi", "psi" or "swap"
    effect: str      # "", "iso" or "x2"


@dataclass
class SpiralTable:
    rows: list[SpiralRow] = field(default_factory=list)

    def orders(self) -> list[int | None]:
        """Orders at the start and after every phi/psi step (swap rows skipped)."""
        return [r.state.order for r in self.rows if r.map_kind != "swap"]

    def effects(self) -> list[str]:
        return [r.effect for r in self.rows if r.map_kind in ("phi", "psi")]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "d", "l", "k", "label", "order", "map_kind", "effect"])
        for r in self.rows:
            s = r.state
            w.writerow([r.step, s.d, s.lk[0], s.lk[1], s.label,
                        "" if s.order is None else s.order, r.map_kind, r.effect])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps([{"step": r.step, **r.state.to_json(), "map_kind": r.map_kind, "effect": r.effect}
                           for r in self.rows], ensure_ascii=False)

    def render(self) -> str:
        lines = []
        for r in self.rows:
            s = r.state
            arrow = {"start": "  ", "phi": "φ ", "psi": "ψ ", "swap": "≅ "}[r.map_kind]
            order = "-" if s.order is None else f"Z/{s.order}"
            where = f"({s.lk[0]},{s.lk[1]})" if s.kind == "real" else f"m={s.lk[0]}"
            indent = "  " * (r.step % 2)
            lines.append(f"{arrow}{indent}d={s.d:<3} {where:<8} {s.label:<6} {order:<8} {r.effect}")
        return "\n".join(lines)


def generate_spiral(d: int, start, steps: int, kind: str = "real", first: str = "phi") -> SpiralTable:
    """Alternate phi and psi for ``steps`` steps, swapping (0, k) to (4, k-4) before psi when needed."""
    if first not in ("phi", "psi"):
        raise UnsupportedInput("first step must be phi or psi")
    state = initial_state(d, start, kind)
    if state.order is None:
        raise StepNotDefined(f"no free-to-interacting image for {state.label} at d={d}")
    table = SpiralTable([SpiralRow(0, state, "start", "")])
    move = first
    for step in range(1, steps + 1):
        if move == "psi" and kind == "real" and state.lk[0] == 0 and state.lk[1] >= 4:
            state = spiral_step(state, "swap")
            table.rows.append(SpiralRow(step, state, "swap", "iso"))
        state = spiral_step(state, move)
        table.rows.append(SpiralRow(step, state, move, "x2" if move == "psi" else "iso"))
        move = "psi" if move == "phi" else "phi"
    return table
