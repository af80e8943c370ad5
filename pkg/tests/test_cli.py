import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from emitgraph.circuit import CircuitDAG, to_qasm
from emitgraph.cli import main
from emitgraph.densitymat import DensityMatrix
from emitgraph.graphstate import GraphState, linear_cluster
from emitgraph.noise import emitter_gate_depolarizing

from conftest import linear3_circuit


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    write.dir = tmp_path
    return write


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version():
    out = subprocess.run([sys.executable, "-m", "emitgraph.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("emitgraph ")


def test_simulate_linear3(files, capsys):
    qasm = files("linear3.qasm", to_qasm(linear3_circuit()))
    target = files("path3.json", linear_cluster(3).to_json())
    state = str(files.dir / "state.csv")
    code, out, _ = _run(["simulate", qasm, "--backend", "dense", "--target", target, "--out", state], capsys)
    assert code == 0
    report = json.loads(out)
    assert set(report) == {"circuit", "state"}
    assert report["state"]["infidelity"] == pytest.approx(0, abs=1e-12)
    assert report["circuit"]["emitters"] == 1
    rho = DensityMatrix.from_csv(open(state).read())
    assert rho.n == 3
    for backend in ("stabilizer", "mixed"):
        code, out, _ = _run(["simulate", qasm, "--backend", backend, "--target", target], capsys)
        assert code == 0 and json.loads(out)["state"]["infidelity"] == pytest.approx(0, abs=1e-12)


def test_simulate_noise(files, capsys):
    qasm = files("linear3.qasm", to_qasm(linear3_circuit()))
    target = files("path3.json", linear_cluster(3).to_json())
    noise = files("noise.json", emitter_gate_depolarizing(0.01).to_json())
    code, out, _ = _run(["simulate", qasm, "--noise", noise, "--target", target], capsys)
    assert code == 0 and 0 < json.loads(out)["state"]["infidelity"] < 0.1


def test_simulate_errors(files, capsys):
    bad = files("bad.qasm", "OPENQASM 2.0;\nqreg p[1];\nfoo p[0];\n")
    assert _run(["simulate", bad], capsys)[0] == 2
    assert _run(["simulate", str(files.dir / "missing.qasm")], capsys)[0] == 2
    big = files("big.qasm", to_qasm(CircuitDAG(1, 14)))
    assert _run(["simulate", big, "--backend", "dense"], capsys)[0] == 3
    c = CircuitDAG(0, 2)
    c.add("CZ", "p0", "p1")
    assert _run(["simulate", files("invalid.qasm", to_qasm(c))], capsys)[0] == 4


def test_solve_time_reversed(files, capsys):
    target = files("path3.json", linear_cluster(3).to_json())
    out = str(files.dir / "res.jsonl")
    code, _, _ = _run(["solve", target, "--solver", "time-reversed", "--out", out], capsys)
    assert code == 0
    rows = [json.loads(line) for line in open(out)]
    assert len(rows) == 1
    assert set(rows[0]) == {"rank", "cost", "metrics", "qasm", "provenance"}
    assert "qreg e[1];" in rows[0]["qasm"]
    assert rows[0]["cost"] == pytest.approx(0, abs=1e-12)


def test_solve_alternate_and_budget(files, capsys):
    target = files("g.json", GraphState(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).to_json())
    cost = files("cost.json", json.dumps({"infidelity": 1.0}))
    noise = files("noise.json", emitter_gate_depolarizing(0.01).to_json())
    out = str(files.dir / "res.jsonl")
    args = ["solve", target, "--solver", "alternate", "--cost", cost, "--noise", noise, "--out", out]
    assert _run(args, capsys)[0] == 0
    costs = [json.loads(line)["cost"] for line in open(out)]
    assert costs == sorted(costs) and len(costs) >= 1
    assert _run(args + ["--budget", "0"], capsys)[0] == 5


def test_solve_deterministic(files, capsys):
    target = files("path3.json", linear_cluster(3).to_json())
    outs = []
    for k in range(2):
        out = str(files.dir / f"r{k}.jsonl")
        code, _, _ = _run(
            ["solve", target, "--solver", "evolutionary", "--seed", "5", "--iterations", "3", "--population", "4", "--out", out],
            capsys,
        )
        assert code == 0
        outs.append(open(out).read())
    assert outs[0] == outs[1]
    assert _run(["solve", target, "--solver", "random"], capsys)[0] == 2


def test_orbit(files, capsys):
    target = files("k3.json", GraphState(3, [(0, 1), (0, 2), (1, 2)]).to_json())
    out = str(files.dir / "orbit.jsonl")
    code, stdout, _ = _run(["orbit", target, "--out", out], capsys)
    assert code == 0 and json.loads(stdout) == {"entries": 4, "truncated": False, "mode": "labeled"}
    assert len(open(out).readlines()) == 4
    code, stdout, _ = _run(["orbit", target, "--isoclass", "--out", out], capsys)
    assert json.loads(stdout)["entries"] == 2
    p6 = files("p6.json", linear_cluster(6).to_json())
    code, stdout, _ = _run(["orbit", p6, "--max", "10", "--out", out], capsys)
    summary = json.loads(stdout)
    assert summary["entries"] == 10 and summary["truncated"]


def test_bench(files, capsys):
    out = str(files.dir / "bench.csv")
    code, stdout, _ = _run(["bench", "--family", "linear", "--min", "3", "--max", "5", "--repeats", "1", "--out", out], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(out)))
    assert [int(r["size"]) for r in rows] == [3, 4, 5]
    assert {"size", "n", "seconds", "alternatives", "best_cost", "log_seconds", "log_n"} <= set(rows[0])
    assert "r2_semilog" in stdout
    assert _run(["bench", "--family", "linear", "--min", "5", "--max", "3", "--out", out], capsys)[0] == 2


def test_convert(files, capsys):
    g = linear_cluster(3)
    src = files("path3.json", g.to_json())
    out = str(files.dir / "stab.txt")
    assert _run(["convert", src, "--from", "graph", "--to", "stabilizer", "--out", out], capsys)[0] == 0
    text = open(out).read()
    for row in ("XZI", "ZXZ", "IZX"):
        assert row in text
    dens = str(files.dir / "rho.csv")
    assert _run(["convert", src, "--from", "graph", "--to", "density", "--out", dens], capsys)[0] == 0
    back = str(files.dir / "back.json")
    assert _run(["convert", dens, "--from", "density", "--to", "graph", "--out", back], capsys)[0] == 0
    assert GraphState.from_json(open(back).read()) == g
    qasm = files("linear3.qasm", to_qasm(linear3_circuit()))
    assert _run(["convert", qasm, "--from", "qasm-state", "--to", "graph", "--out", back], capsys)[0] == 0
    assert GraphState.from_json(open(back).read()) == g
    junk = files("junk.json", "[1, 2")
    assert _run(["convert", junk, "--from", "graph", "--to", "stabilizer"], capsys)[0] == 2
    mixed = files("mixed.csv", DensityMatrix(np.eye(4) / 4).to_csv())
    assert _run(["convert", mixed, "--from", "density", "--to", "graph"], capsys)[0] == 4
