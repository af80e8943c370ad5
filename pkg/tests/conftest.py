import itertools

import numpy as np
import pytest

from emitgraph.circuit import CircuitDAG
from emitgraph.graphstate import GraphState

SINGLE = ("H", "S", "Sdag", "X", "Y", "Z")


def random_graph(rng, n, p=0.5):
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
    return GraphState(n, edges)


def random_physical_circuit(rng, n_emitters, n_photons, n_gates, measurements=True):
    """Random circuit that respects the emitter/photon rules."""
    c = CircuitDAG(n_emitters, n_photons)
    for _ in range(n_gates):
        r = rng.random()
        if r < 0.45:
            wires = [f"e{k}" for k in range(n_emitters)] + [f"p{j}" for j in range(n_photons)]
            c.add(SINGLE[rng.integers(len(SINGLE))], wires[rng.integers(len(wires))])
        elif r < 0.75 or n_emitters < 2:
            c.add("EmissionCNOT", f"e{rng.integers(n_emitters)}", f"p{rng.integers(n_photons)}")
        elif r < 0.9 or not measurements:
            a, b = rng.choice(n_emitters, 2, replace=False)
            c.add("CNOT" if rng.random() < 0.5 else "CZ", f"e{a}", f"e{b}")
        else:
            c.add_measurement(f"e{rng.integers(n_emitters)}", f"p{rng.integers(n_photons)}", "XYZ"[rng.integers(3)])
    return c


def random_clifford_tableau(rng, n, depth=40):
    from emitgraph.tableau import CliffordTableau

    t = CliffordTableau.zero_state(n)
    for _ in range(depth):
        k = rng.integers(4)
        if k == 0:
            t.h(int(rng.integers(n)))
        elif k == 1:
            t.s(int(rng.integers(n)))
        elif k == 2 and n > 1:
            a, b = rng.choice(n, 2, replace=False)
            t.cnot(int(a), int(b))
        else:
            t.pauli_x(int(rng.integers(n)))
    return t


def linear3_circuit():
    """Single-emitter circuit for the three-photon linear cluster."""
    c = CircuitDAG(1, 3)
    for j in range(3):
        c.add("H", "e0")
        c.add("EmissionCNOT", "e0", f"p{j}")
    c.add_measurement("e0", "p2", "Z")
    return c


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def nx_graph(g):
    return g.to_networkx()


# -- acceptance report ------------------------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """``criterion(number, ok, detail)`` records one line and asserts ``ok``."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
