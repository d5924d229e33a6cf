"""The ``artifact`` command line.

Exit codes: 0 success, 1 usage error, 2 unsupported input, 3 out of range,
4 a ``check`` mismatch.
"""
from __future__ import annotations

import json
import re
import sys

import click

from . import extengine, groups, kfree, spiral, steenrod, superalg
from .errors import ArtifactError, OutOfRange, UnknownName, UnsupportedInput
from .kfree import FiniteAbelianGroup

EXIT_USAGE, EXIT_UNSUPPORTED, EXIT_RANGE, EXIT_CHECK = 1, 2, 3, 4

FORMAT = click.option("--format", "fmt", type=click.Choice(["json", "csv", "text"]), default="json",
                      show_default=True, help="Output format.")


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, sort_keys=False)


def _emit_group(g: FiniteAbelianGroup, fmt: str, extra: dict | None = None) -> None:
    if fmt == "json":
        click.echo(_dumps({**g.to_json(), **(extra or {})}))
    elif fmt == "csv":
        click.echo("free_rank,torsion")
        click.echo(f"{g.free_rank},{' '.join(map(str, g.torsion))}")
    else:
        click.echo(str(g))


# ---------------------------------------------------------------------------
# parsing helpers

_ELK = re.compile(r"^E\(\s*(\d+)\s*,\s*(\d+)\s*\)$")


def parse_group(text: str) -> groups.FermionicGroup:
    """'E(l,k)', 'Q8' or 'C', joined by '*' for fermionic products; a trailing ' primes."""
    factors = [f.strip() for f in re.split(r"[*⊗]", text) if f.strip()]
    if not factors:
        raise UnknownName(f"empty group expression {text!r}")
    out = None
    for f in factors:
        primes = len(f) - len(f.rstrip("'′"))
        base = f.rstrip("'′").strip()
        m = _ELK.match(base)
        if m:
            G = groups.make_Elk(int(m.group(1)), int(m.group(2)))
        elif base.upper() == "Q8":
            G = groups.make_Q8()
        elif base == "C":
            G = groups.make_C()
        else:
            raise UnknownName(f"unknown group {f!r}; use E(l,k), Q8 or C")
        for _ in range(primes):
            G = groups.primed(G)
        out = G if out is None else groups.fermionic_product(out, G)
    return out


_CL = re.compile(r"^Cl\(\s*(\d+)\s*,\s*(\d+)\s*\)$")


def parse_algebra(text: str) -> superalg.SuperAlgebra:
    """'Cl(l,k)' or 'R[<group>]' (real group superalgebra)."""
    text = text.strip()
    m = _CL.match(text)
    if m:
        return superalg.clifford(int(m.group(1)), int(m.group(2)))
    if text.startswith(("R[", "ℝ[")) and text.endswith("]"):
        return superalg.group_superalgebra(parse_group(text[2:-1]))
    if text.startswith("C[") and text.endswith("]"):
        return superalg.group_superalgebra(parse_group(text[2:-1]), charged=True)
    raise UnknownName(f"unknown algebra {text!r}; use Cl(l,k), R[group] or C[group]")


def _module(name: str, D: int, flavor: str) -> steenrod.SteenrodModule:
    if ":" in name or name.lower() == "q8":
        twist = extengine.parse_twist(name)
        return twist.module(D, flavor)
    return steenrod.standard_module(name, D, flavor)


# ---------------------------------------------------------------------------
# commands


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def cli() -> None:
    """Free and interacting fermionic phases, Ext charts and Bott spirals."""


@cli.command("classify-free")
@click.option("--group", "group", required=True, help="E(l,k), Q8, C, or a '*' product of these.")
@click.option("--dim", "dim", type=int, required=True, help="Spatial dimension d.")
@click.option("--charged", is_flag=True, help="Use the complex (charged) group algebra.")
@click.option("--spacetime", is_flag=True, help="Read --dim as spacetime dimension d + 1.")
@FORMAT
def classify_free(group: str, dim: int, charged: bool, spacetime: bool, fmt: str) -> None:
    """Free-fermion phases: the K-group attached to the group superalgebra."""
    d = dim - 1 if spacetime else dim
    _emit_group(kfree.free_phase_group(parse_group(group), d, charged), fmt)


@cli.command("classify-interacting")
@click.option("--twist", required=True, help="spin:(l,k), spinc:m or q8.")
@click.option("--dim", "dim", type=int, required=True, help="Spatial dimension d.")
@click.option("--full", is_flag=True, help="Whole group of phases instead of the free-to-interacting image.")
@click.option("--spacetime", is_flag=True, help="Read --dim as spacetime dimension d + 1.")
@FORMAT
def classify_interacting(twist: str, dim: int, full: bool, spacetime: bool, fmt: str) -> None:
    """Interacting phases in dimension d (image of the free theories by default)."""
    d = dim - 1 if spacetime else dim
    tw = extengine.parse_twist(twist)
    if full:
        g = spiral.anderson_dual(extengine.spin_bordism_low(tw, d + 2), extengine.spin_bordism_low(tw, d + 1))
        _emit_group(g, fmt)
        return
    if tw.name == "q8":
        raise UnsupportedInput("the image for q8 has no closed form here; pass --full")
    if tw.kind == "complex":
        img = spiral.f2i_image_complex(tw.n_vars, d)
    else:
        l = sum(1 for _, m in tw.classes if m > 0)
        img = spiral.f2i_image_real(l, tw.n_vars - l, d)
    _emit_group(img.image, fmt, {"domain": img.domain.to_json(), "kind": img.kind} if fmt == "json" else None)


@cli.command("spiral")
@click.option("--start", required=True, help="Class label (BDI', CII, AIII, ...) or l,k.")
@click.option("--dim", "dim", type=int, required=True, help="Starting spatial dimension.")
@click.option("--steps", type=int, default=8, show_default=True)
@click.option("--complex", "is_complex", is_flag=True, help="Complex spiral (AIII, A').")
@click.option("--first", type=click.Choice(["phi", "psi"]), default="phi", show_default=True)
@click.option("--spacetime", is_flag=True, help="Read --dim as spacetime dimension d + 1.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "text"]), default="csv", show_default=True)
def spiral_cmd(start: str, dim: int, steps: int, is_complex: bool, first: str, spacetime: bool, fmt: str) -> None:
    """Alternate phi and psi from a starting class."""
    d = dim - 1 if spacetime else dim
    if re.fullmatch(r"\s*\d+\s*,\s*\d+\s*", start):
        start_value = tuple(int(x) for x in start.split(","))
    else:
        start_value = start
    table = spiral.generate_spiral(d, start_value, steps, "complex" if is_complex else "real", first)
    if fmt == "csv":
        click.echo(table.to_csv(), nl=False)
    elif fmt == "json":
        click.echo(table.to_json())
    else:
        click.echo(table.render())


@cli.command("ext-chart")
@click.option("--module", "module", required=True, help="Standard module name or twist (spin:(l,k), spinc:m, q8).")
@click.option("--smax", type=int, default=8, show_default=True)
@click.option("--tmax", type=int, default=24, show_default=True)
@click.option("--flavor", type=click.Choice(["A1", "E1"]), default="A1", show_default=True)
@click.option("--reduced", is_flag=True, help="Split off free summands first.")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="text", show_default=True)
def ext_chart_cmd(module: str, smax: int, tmax: int, flavor: str, reduced: bool, fmt: str) -> None:
    """Ext chart with h0 and h1 (or v1) products."""
    extra = 7 if reduced else 0
    M = _module(module, tmax + extra, flavor)
    if reduced:
        M = steenrod.split_free(M).reduced
    chart = extengine.ext_chart(M, smax, tmax)
    click.echo(_dumps(chart.to_json()) if fmt == "json" else chart.render())


@cli.command("margolis")
@click.option("--module", "module", required=True)
@click.option("--which", type=click.Choice(["0", "1"]), required=True)
@click.option("--D", "D", type=int, default=16, show_default=True, help="Truncation degree.")
@FORMAT
def margolis_cmd(module: str, which: str, D: int, fmt: str) -> None:
    """Q0 or Q1 Margolis homology dimensions."""
    M = _module(module, D, "A1")
    h = steenrod.margolis_homology(M, int(which))
    dims = {t: d for t, (d, _) in sorted(h.items()) if d}
    if fmt == "json":
        click.echo(_dumps({str(t): d for t, d in dims.items()}))
    elif fmt == "csv":
        click.echo("degree,dim")
        for t, d in dims.items():
            click.echo(f"{t},{d}")
    else:
        click.echo(", ".join(f"{d} in degree {t}" for t, d in dims.items()) or "0")


@cli.command("cmq")
@click.option("--l", "l", type=int, required=True)
@click.option("--k", "k", type=int, required=True)
@click.option("--n", "n", type=int, default=0, show_default=True)
@FORMAT
def cmq_cmd(l: int, k: int, n: int, fmt: str) -> None:
    """Clifford module quotient for Cl(l, k)."""
    _emit_group(kfree.cmq(l, k, n), fmt)


@cli.command("iso")
@click.argument("first")
@click.argument("second")
@click.option("--algebra", is_flag=True, help="Compare superalgebras instead of fermionic groups.")
@FORMAT
def iso_cmd(first: str, second: str, algebra: bool, fmt: str) -> None:
    """Search for an isomorphism between two groups or two superalgebras."""
    if algebra:
        found = superalg.find_superalgebra_isomorphism(parse_algebra(first), parse_algebra(second))
        payload = {"isomorphic": found is not None}
        if found is not None:
            payload["images"] = [[[int(k), str(v)] for k, v in sorted(img.items())] for img in found.images]
    else:
        found = groups.find_isomorphism(parse_group(first), parse_group(second))
        payload = {"isomorphic": found is not None}
        if found is not None:
            payload["images"] = list(found.map)
    if fmt == "json":
        click.echo(_dumps(payload))
    else:
        click.echo("isomorphic" if found is not None else "no isomorphism found")


# ---------------------------------------------------------------------------
# cross-validation battery

_SPIN_POINT = ["Z", "Z/2", "Z/2", "0", "Z", "0", "0", "0", "Z^2", "Z/2 + Z/2", "Z/2 + Z/2 + Z/2", "0"]


def _check_cmq() -> list[str]:
    bad = []
    for l in range(5):
        for k in range(5):
            got = kfree.cmq(l, k, 0)
            want = kfree.ko_point(k - l)
            if got != want:
                bad.append(f"cmq({l},{k},0) = {got}, KO gives {want}")
    return bad


def _check_closed_form() -> list[str]:
    bad = []
    for l, k in [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1)]:
        for n in range(13):
            got = extengine.ko_homology(l, k, n)
            order = spiral.long_summand(l, k, n)
            short = (n >= spiral.ldeg(l, k)) and (n - (l + k - 2 * (l % 4))) % 8 in (1, 2)
            want = FiniteAbelianGroup.from_invariants(0, [order] if order else ([2] if short else []))
            if got != want:
                bad.append(f"ko_{n}(ME_{l},{k}) = {got}, closed form {want}")
    return bad


def _check_bordism() -> list[str]:
    bad = []
    for n, want in enumerate(_SPIN_POINT):
        got = str(extengine.spin_bordism_low("spin:(0,0)", n))
        if got != want:
            bad.append(f"spin bordism in degree {n} = {got}, expected {want}")
    return bad


def _check_groups() -> list[str]:
    bad = []
    for a, b in [("E(4,0)", "E(0,4)"), ("E(0,3)", "Q8*E(1,0)"), ("E(3,0)", "Q8*E(0,1)")]:
        if groups.find_isomorphism(parse_group(a), parse_group(b)) is None:
            bad.append(f"no isomorphism {a} -> {b}")
    return bad


def _check_spiral() -> list[str]:
    want = [4, 4, 8, 8, 16, 16, 32, 32, 64]
    got = spiral.generate_spiral(1, "BDI'", 8).orders()
    return [] if got == want else [f"BDI' spiral orders {got}, expected {want}"]


CHECKS = {
    "cmq": _check_cmq,
    "groups": _check_groups,
    "closed-form": _check_closed_form,
    "bordism": _check_bordism,
    "spiral": _check_spiral,
}


@cli.command("check")
@click.option("--only", "only", multiple=True, type=click.Choice(sorted(CHECKS)), help="Run a subset.")
def check_cmd(only: tuple[str, ...]) -> None:
    """Cross-validate closed forms against the computational pipelines."""
    failed = False
    for name in (only or CHECKS):
        problems = CHECKS[name]()
        click.echo(f"{name}: {'ok' if not problems else 'FAILED'}")
        for p in problems:
            click.echo(f"  {p}")
        failed = failed or bool(problems)
    if failed:
        sys.exit(EXIT_CHECK)


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit codes."""
    try:
        cli.main(args=argv, prog_name="artifact", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except OutOfRange as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_RANGE
    except UnsupportedInput as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_UNSUPPORTED
    except ArtifactError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_UNSUPPORTED
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
