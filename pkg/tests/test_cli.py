import csv
import io
import json

import pytest

from artifact import extengine
from artifact.cli import main, parse_algebra, parse_group
from artifact.errors import UnknownName
from artifact.groups import find_isomorphism, make_Elk
from artifact.kfree import FiniteAbelianGroup


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# classify ------------------------------------------------------------------------


def test_classify_free_bdi_line(capsys):
    code, out, _ = run(capsys, "classify-free", "--group", "E(1,0)", "--dim", "1")
    assert code == 0
    assert json.loads(out) == {"free_rank": 1, "torsion": []}


@pytest.mark.parametrize("argv", [["--group", "E(0,0)", "--dim", "2", "--charged"],
                                  ["--group", "E(1,1)", "--dim", "2"]])
def test_classify_free_integers(capsys, argv):
    code, out, _ = run(capsys, "classify-free", *argv, "--format", "text")
    assert code == 0 and out.strip() == "Z"


def test_spacetime_flag(capsys):
    _, a, _ = run(capsys, "classify-free", "--group", "E(1,0)", "--dim", "2", "--spacetime")
    _, b, _ = run(capsys, "classify-free", "--group", "E(1,0)", "--dim", "1")
    assert a == b


def test_classify_interacting_image(capsys):
    code, out, _ = run(capsys, "classify-interacting", "--twist", "spin:(1,1)", "--dim", "2")
    assert code == 0
    data = json.loads(out)
    assert data["torsion"] == [8] and data["kind"] == "surjection"


@pytest.mark.parametrize("twist,want", [("spin:(0,0)", "Z"), ("spinc:2", "Z/4")])
def test_classify_interacting_full(capsys, twist, want):
    code, out, _ = run(capsys, "classify-interacting", "--twist", twist, "--dim", "2", "--full",
                       "--format", "text")
    assert code == 0 and out.strip() == want


def test_q8_needs_full(capsys):
    code, _, err = run(capsys, "classify-interacting", "--twist", "q8", "--dim", "3")
    assert code == 2 and "--full" in err


def test_degree_beyond_table(capsys):
    code, _, err = run(capsys, "classify-interacting", "--twist", "spin:(1,0)", "--dim", "18", "--full")
    assert code == 3 and "exceeds" in err


def test_unsupported_group_exit(capsys):
    code, _, err = run(capsys, "classify-free", "--group", "C*C", "--dim", "1")
    assert code == 2 and "not simple" in err


def test_unknown_group_exit(capsys):
    code, _, err = run(capsys, "classify-free", "--group", "SU(2)", "--dim", "1")
    assert code == 2 and "unknown group" in err


def test_usage_errors(capsys):
    assert run(capsys, "classify-free", "--group", "E(1,0)")[0] == 1
    assert run(capsys, "classify-free", "--bogus")[0] == 1
    assert run(capsys, "no-such-command")[0] == 1


# spiral ----------------------------------------------------------------------------


def orders_from_csv(text):
    return [int(r["order"]) for r in csv.DictReader(io.StringIO(text)) if r["map_kind"] != "swap"]


def test_spiral_bdi_prime(capsys):
    code, out, _ = run(capsys, "spiral", "--start", "BDI'", "--dim", "1", "--steps", "8")
    assert code == 0
    assert orders_from_csv(out) == [4, 4, 8, 8, 16, 16, 32, 32, 64]


def test_spiral_cii(capsys):
    _, out, _ = run(capsys, "spiral", "--start", "CII", "--dim", "1", "--steps", "8")
    assert orders_from_csv(out) == [2, 2, 4, 4, 8, 8, 16, 16, 32]


def test_spiral_complex(capsys):
    _, out, _ = run(capsys, "spiral", "--start", "AIII", "--dim", "1", "--steps", "6", "--complex")
    assert orders_from_csv(out)[:6] == [4, 4, 8, 8, 16, 16]


def test_spiral_json(capsys):
    _, out, _ = run(capsys, "spiral", "--start", "BDI'", "--dim", "1", "--steps", "2", "--format", "json")
    rows = json.loads(out)
    assert [(r["l"], r["k"], r["order"]) for r in rows] == [(2, 1, 4), (2, 2, 4), (1, 2, 8)]


def test_spiral_psi_from_zero_fails(capsys):
    # CII is (0, 3): no swap is available, so psi cannot start
    code, _, err = run(capsys, "spiral", "--start", "CII", "--dim", "1", "--steps", "1", "--first", "psi")
    assert code == 2 and "psi" in err


def test_spiral_swaps_before_psi(capsys):
    _, out, _ = run(capsys, "spiral", "--start", "0,4", "--dim", "6", "--steps", "1", "--first", "psi")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["map_kind"], r["l"], r["k"], r["order"]) for r in rows] == [
        ("start", "0", "4", "16"), ("swap", "4", "0", "16"), ("psi", "3", "0", "32")]


# charts and modules ------------------------------------------------------------------


def test_ext_chart_text_for_n1(capsys):
    code, out, _ = run(capsys, "ext-chart", "--module", "N1", "--smax", "4", "--tmax", "12")
    assert code == 0
    lines = out.rstrip("\n").splitlines()
    axis = lines[-1].split()
    col = axis.index("2")
    # rows are s = 4..0; column 2 holds a tower of length three from s = 0
    marks = [line.split("|")[1].split() for line in lines[:5]]
    assert [row[col] for row in marks][::-1][:3] == ["o", "o", "o"]


def test_ext_chart_f2_json(capsys):
    code, out, _ = run(capsys, "ext-chart", "--module", "F2", "--smax", "5", "--tmax", "14", "--format", "json")
    entries = {(e["s"], e["t"]): e["dim"] for e in json.loads(out)["entries"]}
    assert code == 0
    assert entries[(1, 2)] == 1 and entries[(3, 7)] == 1 and entries[(4, 12)] == 1
    assert (1, 3) not in entries


def test_ext_chart_of_free_module_after_reduction_is_empty(capsys):
    code, out, _ = run(capsys, "ext-chart", "--module", "A1", "--reduced", "--format", "json")
    assert code == 0 and json.loads(out)["entries"] == []


def test_margolis(capsys):
    _, out, _ = run(capsys, "margolis", "--module", "N1", "--which", "1")
    assert json.loads(out) == {"1": 1}
    _, out, _ = run(capsys, "margolis", "--module", "q8", "--which", "1", "--format", "csv")
    assert out.splitlines() == ["degree,dim", "2,1"]


def test_cmq(capsys):
    _, out, _ = run(capsys, "cmq", "--l", "0", "--k", "1", "--format", "text")
    assert out.strip() == "Z/2"


def test_iso(capsys):
    code, out, _ = run(capsys, "iso", "E(4,0)", "E(0,4)")
    assert code == 0 and json.loads(out)["isomorphic"] is True
    _, out, _ = run(capsys, "iso", "Cl(1,0)", "Cl(0,1)", "--algebra", "--format", "text")
    assert out.strip() == "no isomorphism found"


def test_parsers():
    assert find_isomorphism(parse_group("E(1,0)*E(0,1)"), make_Elk(1, 1)) is not None
    assert parse_group("E(1,0)'").order == 16
    assert parse_algebra("R[E(1,0)]").dim == 2
    with pytest.raises(UnknownName):
        parse_algebra("Cl(1)")


# determinism and serialization ------------------------------------------------------------


@pytest.mark.parametrize("argv", [
    ["spiral", "--start", "CII", "--dim", "1", "--steps", "8", "--format", "text"],
    ["ext-chart", "--module", "J", "--format", "json"],
    ["classify-interacting", "--twist", "spin:(1,1)", "--dim", "3", "--full"],
])
def test_byte_identical_output(capsys, argv):
    assert run(capsys, *argv) == run(capsys, *argv)


def test_group_json_round_trip(capsys):
    _, out, _ = run(capsys, "classify-interacting", "--twist", "spinc:2", "--dim", "4", "--full")
    data = json.loads(out)
    g = FiniteAbelianGroup.from_invariants(data["free_rank"], data["torsion"])
    assert g.to_json() == data


# check ----------------------------------------------------------------------------------------


def test_check_subset(capsys):
    code, out, _ = run(capsys, "check", "--only", "cmq", "--only", "spiral")
    assert code == 0
    assert out.splitlines() == ["cmq: ok", "spiral: ok"]


def test_check_all(capsys):
    code, out, _ = run(capsys, "check")
    assert code == 0
    assert all(line.endswith("ok") for line in out.splitlines())


def test_check_detects_corrupted_table(capsys, monkeypatch):
    broken = dict(extengine.ABP_REAL, ko=(0, 9, 16, 16, 24, 24, 24, 24))
    monkeypatch.setattr(extengine, "ABP_REAL", broken)
    code, out, _ = run(capsys, "check", "--only", "bordism")
    assert code == 4
    assert "bordism: FAILED" in out
    assert "degree" in out
