import json

import pytest

from capfilm import dump
from capfilm.cli import main, parse_epsilons
from oracles import lens_energy


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_epsilons():
    assert parse_epsilons("1e-4:1e-2:3") == pytest.approx([1e-4, 1e-3, 1e-2])
    assert parse_epsilons("1e-4:1e-2:0") == []


def test_solve_lens(tmp_path, capsys):
    code, out, _ = _run(capsys, "solve", "--scenario", "two_points", "--epsilon", "1e-3", "--out", tmp_path)
    assert code == 0
    rec = json.loads(out)
    assert rec["status"] == "converged"
    assert rec["energy_F"] == pytest.approx(lens_energy(0.9, 1e-3), rel=2e-6)
    stem = "two_points_lens_eps1.000000e-03"
    for suffix in (".network.json", ".energy.json", ".csv", ".svg"):
        assert (tmp_path / (stem + suffix)).exists()
    net = dump.load(tmp_path / f"{stem}.network.json")
    assert dump.load_meta(tmp_path / f"{stem}.network.json")["epsilon"] == 1e-3
    assert len(net.faces) == 1


def test_solve_is_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        assert _run(capsys, "solve", "--scenario", "two_points", "--epsilon", "1e-3", "--out", d)[0] == 0
        outs.append(sorted((p.name, p.read_bytes()) for p in d.iterdir()))
    assert outs[0] == outs[1]


def test_render_round_trip(tmp_path, capsys):
    _run(capsys, "solve", "--scenario", "two_points", "--epsilon", "1e-3", "--out", tmp_path, "--format", "csv")
    dumpfile = next(tmp_path.glob("*.network.json"))
    code, out, _ = _run(capsys, "render", dumpfile, "--out", tmp_path / "r")
    assert code == 0
    svg = (tmp_path / "r" / (dumpfile.name.removesuffix(".network.json") + ".svg")).read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    assert json.loads(out)["svg"].endswith(".svg")


def test_empty_sweep(tmp_path, capsys):
    code, _, _ = _run(capsys, "sweep", "--scenario", "two_points", "--epsilons", "1e-4:1e-2:0", "--out", tmp_path)
    assert code == 0
    csv = next(tmp_path.glob("*.sweep.csv")).read_text()
    assert csv.count("\n") == 1


def test_sweep_writes_fit(tmp_path, capsys):
    code, _, _ = _run(capsys, "sweep", "--scenario", "two_points", "--epsilons", "1e-3:1e-2:3",
                      "--format", "csv", "--out", tmp_path)
    assert code == 0
    fit = json.loads(next(tmp_path.glob("*.fit.json")).read_text())
    assert fit["fit"]["exponent"] == pytest.approx(2.0, abs=0.05)
    assert fit["ell_reference"] == pytest.approx(0.9)
    rows = next(tmp_path.glob("*.sweep.csv")).read_text().splitlines()
    assert len(rows) == 4


def test_verify_triangle(tmp_path, capsys):
    code, _, _ = _run(capsys, "verify", "--scenario", "triangle", "--epsilons", "1e-3:1e-3:1", "--out", tmp_path)
    assert code == 0
    rep = json.loads(next(tmp_path.glob("*.verify.json")).read_text())
    (row,) = rep["rows"]
    assert row["violations"] == 0 and row["diagnostics_passed"] and row["competitors_checked"] > 0
    assert list(tmp_path.glob("*competitors.txt")) and list(tmp_path.glob("*diagnostics.txt"))


def test_select_four_points(tmp_path, capsys):
    code, out, _ = _run(capsys, "select", "--scenario", "four_points", "--epsilons", "1e-3:1e-3:1", "--out", tmp_path)
    assert code == 0
    winners = json.loads(out)["winners"]
    assert len(winners) == 1 and winners[0]["epsilon"] == 1e-3
    lines = (tmp_path / "four_points.select.csv").read_text().splitlines()
    assert lines[0] == "epsilon,template,wet_junctions,energy_F,status,winner"
    assert sum(l.endswith(",true") for l in lines[1:]) == 1


@pytest.mark.parametrize("argv, kind", [
    (["solve", "--scenario", "no_such_file.scenario"], "FileNotFound"),
    (["solve", "--scenario", "two_points", "--template", "nope"], "SchemaError"),
    (["solve", "--scenario", "two_points", "--epsilon", "-1"], "UsageError"),
    (["solve"], "UsageError"),
    (["frobnicate"], "UsageError"),
])
def test_usage_and_schema_errors_exit_2(capsys, argv, kind):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    rec = json.loads(err.strip().splitlines()[-1])
    assert rec["error"] == kind and rec["exit"] == 2


def test_parse_error_reports_position(tmp_path, capsys):
    p = tmp_path / "bad.scenario"
    p.write_text('{\n  "name": \n}')
    code, _, err = _run(capsys, "solve", "--scenario", p)
    rec = json.loads(err)
    assert code == 2 and rec["error"] == "ParseError" and rec["line"] == 3


def test_solver_failure_exits_3(tmp_path, capsys):
    # a lens holding more than a half disk on its chord cannot be built
    code, _, err = _run(capsys, "solve", "--scenario", "two_points", "--epsilon", "10", "--out", tmp_path)
    rec = json.loads(err)
    assert code == 3 and rec["exit"] == 3
    assert rec["error"] == "InfeasibleVolume" and rec["epsilon"] == 10.0
