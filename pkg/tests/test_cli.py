import csv
import json
import subprocess
import sys

import pytest

from harmonia.cli import main


def _run(*argv):
    return main([str(a) for a in argv])


def _graph_args(fx, name, domain=None):
    return ["--input", fx / f"{name}_graph.json", "--domain", fx / f"{domain or name}_domain.json"]


def test_solve_path3(fixtures_dir, tmp_path):
    rc = _run("solve", *_graph_args(fixtures_dir, "path3"), "--boundary", fixtures_dir / "path3_boundary.json",
              "--out", tmp_path)
    assert rc == 0
    rows = list(csv.reader((tmp_path / "solution.csv").open()))
    assert rows[0] == ["vertex", "value"]
    values = {r[0]: float(r[1]) for r in rows[1:]}
    assert values["x"] == pytest.approx(0.5, abs=1e-15)
    assert values["b0"] == 0.0 and values["b1"] == 1.0


def test_solve_constant_data(fixtures_dir, tmp_path):
    bnd = tmp_path / "b.json"
    g = json.loads((fixtures_dir / "grid_graph.json").read_text())
    inner = set(json.loads((fixtures_dir / "grid_domain.json").read_text())["interior"])
    nbrs = {e["u"] for e in g["edges"] if e["v"] in inner} | {e["v"] for e in g["edges"] if e["u"] in inner}
    bnd.write_text(json.dumps({v: 3.0 for v in nbrs - inner}))
    rc = _run("solve", *_graph_args(fixtures_dir, "grid"), "--boundary", bnd, "--out", tmp_path)
    assert rc == 0
    vals = [float(r["value"]) for r in csv.DictReader((tmp_path / "solution.csv").open())]
    assert max(abs(v - 3.0) for v in vals) < 1e-13


def test_kernel_and_verify(fixtures_dir, tmp_path):
    assert _run("kernel", *_graph_args(fixtures_dir, "grid"), "--out", tmp_path) == 0
    assert (tmp_path / "kernel.csv").exists()
    assert _run("verify", *_graph_args(fixtures_dir, "grid"), "--kernel", tmp_path / "kernel.csv",
                "--out", tmp_path) == 0
    assert not (tmp_path / "verify_witness.json").exists()


def test_verify_faulty_kernel(fixtures_dir, tmp_path):
    rc = _run("verify", *_graph_args(fixtures_dir, "grid"), "--kernel", fixtures_dir / "grid_kernel_fault.csv",
              "--out", tmp_path)
    assert rc == 1
    wit = json.loads((tmp_path / "verify_witness.json").read_text())
    assert "preharmonic" in wit and wit["preharmonic"]
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["passed"] is False


def test_harnack_and_union(fixtures_dir, tmp_path):
    assert _run("harnack", *_graph_args(fixtures_dir, "grid"), "--subset", fixtures_dir / "grid_subset.json",
                "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "harnack.json").read_text())
    assert rep["index"] >= 1.0
    rc = _run("union", "--input", fixtures_dir / "grid_graph.json", "--domain", fixtures_dir / "grid_union_d1.json",
              "--domain2", fixtures_dir / "grid_union_d2.json", "--subset", "0:3", "--out", tmp_path)
    assert rc == 0
    rep = json.loads((tmp_path / "union.json").read_text())
    assert rep["converged"] and all(0.0 <= v <= 1.0 for v in rep["values"].values())
    assert (tmp_path / "union_trace.csv").read_text().startswith("iteration")


@pytest.mark.parametrize("argv", [
    ["solve", "--input", "missing.json", "--domain", "missing.json", "--boundary", "missing.json"],
    ["nosuchcommand"],
    ["lattice", "--domain", "missing.json"],
    ["dahlberg", "--domain", "FIX/square.json", "--p", "0.5"],
    ["dahlberg", "--domain", "FIX/square.json", "--radii", "abc"],
    ["harnack", "--input", "FIX/grid_graph.json", "--domain", "FIX/grid_domain.json", "--subset", "99:99"],
    ["kernel", "--input", "FIX/grid_graph.json", "--domain", "FIX/grid_domain.json", "--jobs", "0"],
])
def test_input_errors_exit_2(argv, fixtures_dir, tmp_path):
    argv = [a.replace("FIX", str(fixtures_dir)) for a in argv] + ["--out", str(tmp_path)]
    assert main(argv) == 2


def test_bad_boundary_value(fixtures_dir, tmp_path):
    bad = tmp_path / "b.json"
    bad.write_text('{"b0": "zero", "b1": 1}')
    assert _run("solve", *_graph_args(fixtures_dir, "path3"), "--boundary", bad, "--out", tmp_path) == 2


def test_lattice_report(fixtures_dir, tmp_path):
    assert _run("lattice", "--domain", fixtures_dir / "square.json", "--out", tmp_path, "--write-kernel") == 0
    rep = json.loads((tmp_path / "lattice.json").read_text())
    assert rep["interior"] == 225 and rep["s"] == 2.0
    assert 0.0 < rep["delta"]["value"] < 1.0
    assert rep["tsci"]["passed"]
    assert (tmp_path / "lattice_kernel.csv").exists()


def test_dahlberg_report(fixtures_dir, tmp_path):
    rc = _run("dahlberg", "--domain", fixtures_dir / "square.json", "--p", "2", "--family-size", "50",
              "--measure", "boundary_layer", "--out", tmp_path)
    assert rc == 0
    rep = json.loads((tmp_path / "dahlberg.json").read_text())
    run = rep["runs"][0]
    for key in ("M", "K", "delta", "bound", "chain_holds"):
        assert key in run
    assert run["M"] <= run["bound"] * 1.1
    assert (tmp_path / "carleson_ratios.csv").read_text().startswith("p,P,r,")


def test_dahlberg_deterministic_across_jobs(fixtures_dir, tmp_path):
    outs = []
    for jobs in (1, 8):
        d = tmp_path / f"j{jobs}"
        _run("dahlberg", "--domain", fixtures_dir / "square.json", "--family-size", "40", "--jobs", jobs,
             "--out", d)
        outs.append(((d / "dahlberg.json").read_bytes(), (d / "carleson_ratios.csv").read_bytes()))
    assert outs[0] == outs[1]


def test_module_entry_point(fixtures_dir, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "harmonia.cli", "solve", *map(str, _graph_args(fixtures_dir, "path3")),
                           "--boundary", str(fixtures_dir / "path3_boundary.json"), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
