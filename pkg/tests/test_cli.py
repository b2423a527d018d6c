import json
from pathlib import Path

import pytest

from trapkit import BACKEND
from trapkit.cli import main

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, json.loads(capsys.readouterr().out)


def test_analyze_pentagon(capsys):
    code, doc = run(capsys, "--deterministic", "analyze", DATA / "pentagon.json")
    assert code == 0 and doc["command"] == "analyze" and doc["backend"] == BACKEND
    assert doc["result"]["rate"] == "2/5" and "timestamp" not in doc


def test_analyze_z_only_and_general(capsys):
    _, doc = run(capsys, "analyze", DATA / "pentagon.json", "--errors", "z-only")
    assert doc["result"]["delta"] == "0" and "timestamp" in doc
    _, doc = run(capsys, "analyze", DATA / "k2-general.json")
    assert doc["result"]["rate"] == "2/3"


@pytest.mark.parametrize("graph, family, rate", [
    ("cycle:5", "general", "16/31"),
    ("complete:3", "standard", "1/3"),
    ("cycle:5", "standard", "2/5"),
])
def test_optimize_builtins(capsys, graph, family, rate):
    code, doc = run(capsys, "optimize", graph, "--family", family)
    assert code == 0 and doc["result"]["rate"] == rate


def test_optimize_writes_scheme(capsys, tmp_path):
    out = tmp_path / "s.json"
    run(capsys, "optimize", "cycle:5", "--scheme-out", out)
    code, doc = run(capsys, "analyze", out)
    assert doc["result"]["rate"] == "2/5"


def test_cap_exit_code(capsys):
    code, doc = run(capsys, "optimize", "grid:4x4")
    assert code == 2 and doc["result"]["error"] == "cap exceeded"


def test_inadmissible_exit_code(capsys):
    code, doc = run(capsys, "bounds", DATA / "params-inadmissible.json")
    assert code == 3 and doc["result"]["inequality"] == "w/(s(1-eps)) < k_eps/n"


def test_bounds(capsys):
    code, doc = run(capsys, "bounds", DATA / "params.json")
    assert code == 0 and 0.16 < doc["result"]["epsilon_prime"] < 0.17
    code, doc = run(capsys, "bounds", DATA / "parallel.json", "--parallel")
    assert doc["result"]["epsilon_parallel"] == pytest.approx(0.0820849986)


def test_simulate_requires_seed(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["simulate", str(DATA / "pentagon.json")])
    assert ei.value.code == 2


def test_simulate_is_deterministic(capsys, tmp_path):
    argv = ["--seed", "4", "--trials", "300", "--deterministic", "simulate", DATA / "grid-traps.json",
            "--computation", DATA / "line3.json", "--adversary", DATA / "harmful.json",
            "--csv", tmp_path / "rows.csv"]
    _, first = run(capsys, *argv)
    rows = (tmp_path / "rows.csv").read_text()
    _, second = run(capsys, *argv)
    assert first == second and rows == (tmp_path / "rows.csv").read_text()
    assert first["seed"] == 4 and len(rows.strip().splitlines()) == 301
    assert 0.4 < first["result"]["accept_rate"] < 0.6


def test_simulate_compiled(capsys):
    code, doc = run(capsys, "--seed", "1", "--trials", "2000", "simulate", DATA / "pentagon.json",
                    "--compile", DATA / "bqp.json")
    assert code == 0 and doc["result"]["accept_rate"] == 1.0


def test_distinguish(capsys):
    code, doc = run(capsys, "--seed", "2", "--trials", "50", "distinguish", DATA / "grid-traps.json",
                    "--computation", DATA / "line3.json", DATA / "line3-zero.json")
    assert code == 0 and doc["result"]["advantage"] == 0


def test_distinguish_without_room_fails_cleanly(capsys):
    code, doc = run(capsys, "--seed", "2", "--trials", "5", "distinguish", DATA / "pentagon.json",
                    "--computation", DATA / "line3.json")
    assert code == 1 and "error" in doc["result"]


def test_validate(capsys, tmp_path):
    code, doc = run(capsys, "validate", DATA / "pentagon.json")
    assert code == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"graph": {"vertices": [0, 1], "edges": [[0, 1]]},
                               "canvases": [{"H": [0]}], "weights": ["1/2"]}))
    code, doc = run(capsys, "validate", bad)
    assert code == 1


def test_out_file(capsys, tmp_path):
    out = tmp_path / "o.json"
    assert main(["--deterministic", "--out", str(out), "optimize", "complete:3"]) == 0
    assert json.loads(out.read_text())["result"]["rate"] == "1/3"
