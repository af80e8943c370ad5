import io
import json

import pytest

from emitgraph.circuit import CircuitDAG, simulate
from emitgraph.exceptions import CapacityError, ParameterError, PipelineError
from emitgraph.graphstate import GraphState, complete_graph, lattice_cluster, linear_cluster, repeater_graph, star_graph
from emitgraph.metrics import CostFunction, fidelity
from emitgraph.noise import emitter_gate_depolarizing
from emitgraph.solvers.base import score
from emitgraph.solvers import (
    SOLVERS,
    AlternateTargetSolver,
    EvolutionarySolver,
    HybridSolver,
    RandomSearchSolver,
    SolverConfig,
    TimeReversedSolver,
    check_target,
    dedupe_circuits,
    height_function,
    make_solver,
    min_emitters,
    time_reversed_solve,
)

from conftest import random_clifford_tableau, random_graph

INFID = {"infidelity": 1.0}


def _sound(circuit, target):
    return fidelity(simulate(circuit, "stabilizer", seed=0), target) >= 1 - 1e-9


# -- height function ----------------------------------------------------------------


def test_height_examples():
    for n in range(2, 9):
        assert max(height_function(linear_cluster(n))) == 1
    assert height_function(GraphState(4)) == [0, 0, 0, 0, 0]
    assert max(height_function(star_graph(5))) == 1
    h = height_function(complete_graph(4))
    assert h[0] == h[-1] == 0
    assert min_emitters(GraphState(3)) == 1


def test_height_steps(rng):
    for _ in range(30):
        h = height_function(random_graph(rng, int(rng.integers(1, 9))))
        assert h[0] == 0 and h[-1] == 0
        assert all(abs(a - b) == 1 or a == b for a, b in zip(h, h[1:]))
        assert all(abs(a - b) <= 1 for a, b in zip(h, h[1:]))


# -- time-reversed ------------------------------------------------------------------


def test_time_reversed_path3():
    circuit, ne = time_reversed_solve(linear_cluster(3))
    assert ne == 1 and circuit.n_emitters == 1
    assert [g.kind for g in circuit.gates()].count("EmissionCNOT") == 3
    assert fidelity(simulate(circuit, "dense"), linear_cluster(3)) == pytest.approx(1.0)


def test_time_reversed_single_node():
    circuit, ne = time_reversed_solve(GraphState(1))
    kinds = [g.kind for g in circuit.gates()]
    assert ne == 1 and kinds.count("EmissionCNOT") == 1
    assert _sound(circuit, GraphState(1))


def test_time_reversed_families():
    for m in (1, 2):
        g = repeater_graph(m)
        circuit, ne = time_reversed_solve(g)
        assert ne == max(height_function(g))
        assert _sound(circuit, g)
    g = lattice_cluster((2, 2, 3))
    circuit, ne = time_reversed_solve(g)
    assert ne == max(height_function(g)) == 6


def test_time_reversed_random(rng):
    for _ in range(40):
        g = random_graph(rng, int(rng.integers(1, 9)), p=rng.uniform(0.2, 0.8))
        circuit, ne = time_reversed_solve(g)
        assert ne == max(1, max(height_function(g)))
        assert _sound(circuit, g)


def test_time_reversed_tableau_targets(rng):
    for _ in range(10):
        t = random_clifford_tableau(rng, int(rng.integers(1, 6)))
        circuit, _ = time_reversed_solve(t)
        assert _sound(circuit, t)


def test_time_reversed_estimator():
    est = TimeReversedSolver(noise=emitter_gate_depolarizing(0.01)).fit(linear_cluster(4))
    assert est.n_emitters_ == 1
    assert len(est.result_) == 1
    assert 0 < est.best_.metrics["infidelity"] < 0.2


# -- stochastic solvers ------------------------------------------------------------------


def test_random_search_finds_path3():
    est = RandomSearchSolver(seed=1, iterations=150, cost=INFID).fit(linear_cluster(3))
    assert est.best_.cost < 1e-6
    assert _sound(est.best_.circuit, linear_cluster(3))


def test_evolutionary_finds_path3():
    est = EvolutionarySolver(seed=1, iterations=150, cost=INFID).fit(linear_cluster(3))
    assert est.best_.cost < 1e-6
    assert _sound(est.best_.circuit, linear_cluster(3))


@pytest.mark.parametrize("cls", [RandomSearchSolver, EvolutionarySolver, HybridSolver])
def test_stochastic_determinism(cls):
    runs = [cls(seed=7, iterations=5, population=6, cost=INFID).fit(linear_cluster(3)) for _ in range(2)]
    a, b = (r.result_ for r in runs)
    assert [c.circuit.canonical_key() for c in a] == [c.circuit.canonical_key() for c in b]
    assert a.history == b.history


def test_zero_iterations():
    est = RandomSearchSolver(seed=0, iterations=0, population=4, cost=INFID).fit(linear_cluster(3))
    assert len(est.history_) == 1
    assert all(c.cost is not None for c in est.result_)
    costs = [c.cost for c in est.result_]
    assert costs == sorted(costs)


def test_population_one_walks():
    est = EvolutionarySolver(seed=2, iterations=20, population=1, cost=INFID).fit(linear_cluster(3))
    h = est.history_
    assert len(h) == 21 and all(b <= a for a, b in zip(h, h[1:]))


def test_solver_guards():
    with pytest.raises(ParameterError):
        RandomSearchSolver(iterations=1).fit(linear_cluster(3))
    with pytest.raises(CapacityError):
        RandomSearchSolver(seed=0).fit(linear_cluster(11))
    with pytest.raises(ParameterError):
        RandomSearchSolver(seed=0, population=0).fit(linear_cluster(3))


def test_hybrid_seed_only_equals_deterministic():
    g = linear_cluster(4)
    det, _ = time_reversed_solve(g)
    est = HybridSolver(seed=0, iterations=0, population=3, cost=INFID).fit(g)
    assert est.best_.circuit.canonical_key() == det.canonical_key()


def test_hybrid_improves_path4():
    g = linear_cluster(4)
    cost = {"unitaries": 1.0, "infidelity": 100.0}
    est = HybridSolver(seed=4, iterations=40, population=8, cost=cost).fit(g)
    h = est.history_
    assert all(b <= a for a, b in zip(h, h[1:]))
    assert h[-1] <= h[0]
    assert _sound(est.best_.circuit, g)


# -- alternate targets ----------------------------------------------------------------------


def test_dedupe_examples():
    a = CircuitDAG(2, 1)
    a.add("H", "e0")
    a.add("H", "e1")
    b = CircuitDAG(2, 1)
    b.add("H", "e1")
    b.add("H", "e0")
    assert a.gates() != b.gates()
    assert dedupe_circuits([a, a.copy()]) == [a]
    assert dedupe_circuits([a, b]) == [a]
    c = CircuitDAG(2, 1)
    c.add("H", "e0")
    assert dedupe_circuits([a, c, b]) == [a, c]


def test_alternate_budget_one():
    g = linear_cluster(4)
    noise = emitter_gate_depolarizing(0.01)
    est = AlternateTargetSolver(budget=1, noise=noise).fit(g)
    det, _ = time_reversed_solve(g)
    _, total, _ = score(det, g, CostFunction(INFID), noise, "auto")
    assert len(est.result_) == 1
    assert est.best_.circuit.canonical_key() == det.canonical_key()
    assert est.best_.cost == pytest.approx(total, abs=1e-12)


def test_alternate_sound_and_sorted(rng):
    for _ in range(4):
        g = random_graph(rng, int(rng.integers(3, 6)))
        g = GraphState(g.n, g.edges, {0: "HS"})
        res = AlternateTargetSolver(ordering="exhaustive").fit(g).result_
        costs = [c.cost for c in res]
        assert costs == sorted(costs)
        assert all(c.cost == pytest.approx(0, abs=1e-9) for c in res)
        for cand in res:
            entry = cand.provenance
            assert entry.replay(g.bare()).bare() == entry.graph.bare()


def test_alternate_noisy_ranks():
    g = GraphState(5, [(0, 1), (1, 2), (2, 3), (0, 3), (3, 4), (0, 4)])
    est = AlternateTargetSolver(noise=emitter_gate_depolarizing(0.01)).fit(g)
    assert est.n_alternatives_ >= est.n_unique_ == len(est.result_)
    assert est.best_.cost <= est.result_[-1].cost
    buf = io.StringIO()
    est.result_.to_jsonl(buf)
    rows = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert [r["rank"] for r in rows] == list(range(len(rows)))
    assert rows[0]["qasm"].startswith("OPENQASM 2.0;")


def test_alternate_errors():
    with pytest.raises(PipelineError) as exc:
        AlternateTargetSolver(budget=0).fit(linear_cluster(3))
    assert exc.value.stage == "orbit"
    with pytest.raises(PipelineError) as exc:
        AlternateTargetSolver(ordering="exhaustive").fit(linear_cluster(10))
    assert exc.value.stage == "ordering"
    with pytest.raises(ParameterError):
        AlternateTargetSolver(ordering="sampled").fit(linear_cluster(3))


# -- config and helpers ------------------------------------------------------------------------


def test_config_and_factory():
    cfg = SolverConfig.from_json('{"seed": 3, "iterations": 2, "population": 4, "cost": {"infidelity": 1}}')
    solver = make_solver("evolutionary", cfg)
    assert isinstance(solver, EvolutionarySolver) and solver.seed == 3 and solver.population == 4
    assert set(SOLVERS) == {"time-reversed", "random", "evolutionary", "hybrid", "alternate"}
    with pytest.raises(ParameterError):
        SolverConfig.from_dict({"speed": 11})


def test_check_target():
    g = linear_cluster(3)
    assert check_target(g) == g
    assert check_target(g.to_networkx()) == g
    assert check_target(g.to_dict()) == g
    with pytest.raises((ParameterError, TypeError)):
        check_target("path")
