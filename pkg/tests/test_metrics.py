import numpy as np
import pytest

from emitgraph import densitymat as dm
from emitgraph.circuit import CircuitDAG, simulate
from emitgraph.convert import graph_to_stabilizer, stabilizer_to_density
from emitgraph.exceptions import MetricUnavailableError, ParameterError
from emitgraph.graphstate import linear_cluster
from emitgraph.metrics import (
    CostFunction,
    circuit_metrics,
    evaluate_cost,
    fidelity,
    fidelity_dense,
    fidelity_stabilizer,
    metric_report,
    trace_distance,
)
from emitgraph.tableau import CliffordTableau

from conftest import linear3_circuit, random_clifford_tableau


def _pure(psi):
    psi = np.asarray(psi, dtype=complex)
    return dm.DensityMatrix.from_statevector(psi / np.linalg.norm(psi))


def test_circuit_metrics_examples():
    m = circuit_metrics(linear3_circuit())
    assert m == {"unitaries": 6, "emitters": 1, "ee_cnots": 0, "depth": 7, "emitter_depth": 7, "emitter_history": 7}
    assert circuit_metrics(CircuitDAG(0, 1)) == {k: 0 for k in m}
    c = CircuitDAG(2, 1)
    c.add("CNOT", "e0", "e1")
    assert circuit_metrics(c)["ee_cnots"] == 1
    assert circuit_metrics(c)["emitters"] == 2


def test_fidelity_dense_basics():
    zero, one = _pure([1, 0]), _pure([0, 1])
    assert fidelity_dense(zero, zero) == pytest.approx(1)
    assert fidelity_dense(zero, one) == pytest.approx(0)
    assert trace_distance(zero, zero) == pytest.approx(0, abs=1e-12)
    assert trace_distance(zero, one) == pytest.approx(1)
    bell = _pure([1, 0, 0, 1])
    for p in (0.02, 0.3):
        assert fidelity_dense(dm.apply_depolarizing(bell, 1, p), bell) == pytest.approx(1 - p)
        plus = _pure([1, 1])
        assert fidelity_dense(dm.apply_depolarizing(plus, 0, p), plus) == pytest.approx(1 - 2 * p / 3)


def test_fidelity_trace_distance_bounds(rng):
    for _ in range(30):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        a = a @ a.conj().T
        a /= np.trace(a)
        if rng.random() < 0.5:
            b = _pure(rng.normal(size=4) + 1j * rng.normal(size=4))
        else:
            m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            m = m @ m.conj().T
            b = dm.DensityMatrix(m / np.trace(m))
        f = fidelity_dense(a, b)
        d = trace_distance(a, b)
        assert 1 - np.sqrt(f) - 1e-9 <= d <= np.sqrt(1 - f) + 1e-9


def test_fidelity_stabilizer(rng):
    zero = CliffordTableau.zero_state(1)
    plus = zero.copy()
    plus.h(0)
    assert fidelity_stabilizer(zero, zero) == 1
    assert fidelity_stabilizer(zero, plus) == pytest.approx(0.5)
    minus = plus.copy()
    minus.pauli_z(0)
    assert fidelity_stabilizer(plus, minus) == 0
    for _ in range(20):
        a, b = random_clifford_tableau(rng, 5), random_clifford_tableau(rng, 5)
        dense = fidelity_dense(stabilizer_to_density(a), stabilizer_to_density(b))
        assert fidelity_stabilizer(a, b) == pytest.approx(dense, abs=1e-10)


def test_fidelity_dispatch():
    g = linear_cluster(3)
    assert fidelity(simulate(linear3_circuit(), "dense"), g) == pytest.approx(1)
    assert fidelity(graph_to_stabilizer(g), g) == 1
    with pytest.raises(MetricUnavailableError):
        fidelity("state", g)


def test_cost_functions():
    c = linear3_circuit()
    state = simulate(c, "stabilizer")
    g = linear_cluster(3)
    assert evaluate_cost(CostFunction({"depth": 1}), c) == 7
    cf = CostFunction({"infidelity": 1, "depth": 0})
    assert evaluate_cost(cf, c, state, g) == pytest.approx(0)
    base = evaluate_cost(CostFunction({"unitaries": 2, "depth": 1}), c)
    assert evaluate_cost(CostFunction({"unitaries": 2, "depth": 1, "ee_cnots": 0}), c) == base == 19
    with pytest.raises(MetricUnavailableError):
        evaluate_cost(cf, c)
    with pytest.raises(ParameterError):
        CostFunction({"depth": 0})
    with pytest.raises(ParameterError):
        CostFunction({"beauty": 1})
    with pytest.raises(ParameterError):
        CostFunction({"depth": -1})
    assert CostFunction.from_dict(cf.to_dict()).terms == cf.terms


def test_metric_report():
    c = linear3_circuit()
    rep = metric_report(c, simulate(c, "dense"), linear_cluster(3), CostFunction({"infidelity": 1}))
    assert rep["state"]["infidelity"] == pytest.approx(0, abs=1e-12)
    assert rep["state"]["trace_distance"] == pytest.approx(0, abs=1e-6)
    assert rep["cost"] == pytest.approx(0, abs=1e-12)
