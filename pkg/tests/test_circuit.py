import numpy as np
import pytest

from emitgraph.circuit import CircuitDAG, GateSpec, from_qasm, is_isomorphic, simulate, to_qasm, validate
from emitgraph.circuit.qasm import HEADER
from emitgraph.convert import stabilizer_to_density
from emitgraph.densitymat import DensityMatrix
from emitgraph.exceptions import CapacityError, CircuitError, QubitIndexError, QasmParseError, UnsupportedGateError, ValidationError
from emitgraph.graphstate import linear_cluster
from emitgraph.metrics import circuit_metrics, fidelity
from emitgraph.tableau import CliffordTableau

from conftest import linear3_circuit, random_physical_circuit


def test_linear3_structure():
    c = linear3_circuit()
    assert (c.n_emitters, c.n_photons) == (1, 3)
    assert len(c) == 7
    assert validate(c).ok
    assert circuit_metrics(c)["emitters"] == 1


def test_gate_spec_errors():
    with pytest.raises(UnsupportedGateError):
        GateSpec("T", ("e0",))
    with pytest.raises(QubitIndexError):
        CircuitDAG(1, 1).add("H", "p4")


def test_edit_operations():
    c = linear3_circuit()
    ref = c.copy()
    node = c.gate_nodes()[2]
    gate = c.gate(node)
    before = {w: e for w in gate.wires for e in c.wire_edges(w) if e[1] == node}
    c.remove_gate(node)
    assert len(c) == len(ref) - 1
    locs = {w: (u, v) for w, (u, _) in before.items() for (u2, v) in c.wire_edges(w) if u2 == u}
    c.insert_gate_at(gate, locs)
    assert is_isomorphic(c, ref)

    d = CircuitDAG(2, 1)
    n = d.add("CNOT", "e0", "e1")
    d.replace_gate(n, GateSpec("CZ", ("e0", "e1")))
    assert len(d) == 1 and d.gate(n).kind == "CZ"
    with pytest.raises(CircuitError):
        d.replace_gate(n, GateSpec("H", ("e0",)))


def test_validate():
    c = CircuitDAG(2, 2)
    c.add("CNOT", "e0", "e1")
    assert validate(c).ok
    c.add("CZ", "p0", "p1")
    report = validate(c)
    assert not report.ok and "photons" in report.violations[0]
    with pytest.raises(ValidationError):
        simulate(c)


def test_qasm_round_trip(rng):
    c = linear3_circuit()
    assert is_isomorphic(from_qasm(to_qasm(c)), c)
    for _ in range(20):
        r = random_physical_circuit(rng, 2, 3, 25)
        assert is_isomorphic(from_qasm(to_qasm(r)), r)
    assert to_qasm(CircuitDAG(0, 0)) == HEADER
    with pytest.raises(QasmParseError):
        from_qasm("OPENQASM 2.0;\nqreg p[2];\nh p[0]")
    with pytest.raises(QasmParseError):
        from_qasm("not qasm at all")


def test_simulate_linear3():
    c = linear3_circuit()
    for backend in ("dense", "stabilizer", "mixed"):
        state = simulate(c, backend, seed=1)
        assert fidelity(state, linear_cluster(3)) == pytest.approx(1.0, abs=1e-12)


def test_simulate_empty():
    rho = simulate(CircuitDAG(0, 1))
    assert np.allclose(rho.mat, [[1, 0], [0, 0]])
    assert isinstance(simulate(CircuitDAG(0, 1), "stabilizer"), CliffordTableau)


def test_simulate_guards():
    with pytest.raises(CapacityError):
        simulate(CircuitDAG(1, 15))
    with pytest.raises(ValueError):
        simulate(CircuitDAG(0, 1), "gpu")


def test_cross_backend_small(rng):
    for _ in range(25):
        c = random_physical_circuit(rng, int(rng.integers(1, 3)), int(rng.integers(1, 4)), 30)
        rho = simulate(c, "dense", keep_emitters=True)
        ens = simulate(c, "mixed", keep_emitters=True)
        assert isinstance(rho, DensityMatrix)
        assert np.allclose(rho.mat, stabilizer_to_density(ens).mat, atol=1e-10)
