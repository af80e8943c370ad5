import numpy as np
import pytest

from emitgraph import densitymat as dm
from emitgraph.exceptions import CapacityError, InvalidSizeError, ParameterError, QubitIndexError
from emitgraph.graphstate import GraphState
from emitgraph.metrics import fidelity_dense


def _bell():
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return dm.DensityMatrix.from_statevector(psi)


def _ket(bits):
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1
    return dm.DensityMatrix.from_statevector(psi)


def test_from_graph_small():
    rho = dm.from_graph(GraphState(2))
    assert np.allclose(rho.mat, np.full((4, 4), 0.25))
    # CZ|++> is H on one side of a Bell pair
    rho = dm.from_graph(GraphState(2, [(0, 1)]))
    rho = dm.apply_unitary(rho, "H", (1,))
    assert fidelity_dense(rho, _bell()) == pytest.approx(1.0)


def test_path3_stabilizers():
    rho = dm.from_graph(GraphState(3, [(0, 1), (1, 2)]))
    P = dm.PAULI_MATRICES
    for word in ("XZI", "ZXZ", "IZX"):
        op = P[word[0]]
        for c in word[1:]:
            op = np.kron(op, P[c])
        assert np.real(np.trace(op @ rho.mat)) == pytest.approx(1.0)


def test_unitary_basics():
    rho = _ket("0")
    assert np.allclose(dm.apply_unitary(rho, "Identity", (0,)).mat, rho.mat)
    assert np.allclose(dm.apply_unitary(rho, "X", (0,)).mat, _ket("1").mat)
    # qubit 0 is the most significant bit
    assert np.allclose(dm.apply_unitary(_ket("00"), "X", (0,)).mat, _ket("10").mat)
    assert np.allclose(dm.apply_unitary(_ket("10"), "CNOT", (0, 1)).mat, _ket("11").mat)


def test_depolarizing():
    rho = _bell()
    assert np.allclose(dm.apply_depolarizing(rho, 0, 0).mat, rho.mat)
    out = dm.apply_depolarizing(rho, 0, 0.02)
    # every Pauli on one half maps the Bell pair to an orthogonal Bell state
    assert fidelity_dense(out, rho) == pytest.approx(1 - 0.02, abs=1e-12)
    plus = dm.DensityMatrix.from_statevector(np.array([1, 1]) / np.sqrt(2))
    # a single qubit keeps the Pauli that stabilizes it
    assert fidelity_dense(dm.apply_depolarizing(plus, 0, 0.02), plus) == pytest.approx(1 - 2 * 0.02 / 3, abs=1e-12)
    assert np.allclose(dm.apply_depolarizing(plus, 0, 0.75).mat, np.eye(2) / 2)
    with pytest.raises(ParameterError):
        dm.apply_depolarizing(rho, 0, 1.5)


def test_loss_traces():
    rho = _ket("00")
    assert dm.apply_loss(rho, 0, 0).trace() == pytest.approx(1)
    a = dm.apply_loss(rho, 0, 0.1)
    assert a.trace() == pytest.approx(0.9)
    assert dm.apply_loss(a, 1, 0.2).trace() == pytest.approx(0.72)


def test_measure(rng):
    out, prob, post = dm.measure_z_dense(_ket("0"), 0, rng)
    assert out == 0 and prob == pytest.approx(1) and post.trace() == pytest.approx(1)
    plus = dm.DensityMatrix.from_statevector(np.array([1, 1]) / np.sqrt(2))
    assert dm.outcome_probability(plus, 0, 1) == pytest.approx(0.5)
    outs = [dm.measure_z_dense(_bell(), 0, rng) for _ in range(200)]
    for m, prob, post in outs:
        assert prob == pytest.approx(0.5)
        assert dm.outcome_probability(dm.normalize(post), 1, m) == pytest.approx(1.0)
    ones = sum(m for m, _, _ in outs)
    assert 60 < ones < 140


def test_negativity():
    assert dm.negativity(_ket("00")) == pytest.approx(0, abs=1e-12)
    assert dm.negativity(_bell()) == pytest.approx(0.5)
    assert dm.negativity(dm.from_graph(GraphState(2, [(0, 1)]))) == pytest.approx(0.5)
    with pytest.raises(InvalidSizeError):
        dm.negativity(np.eye(2))


def test_partial_trace():
    rho = dm.partial_trace(_bell(), [0])
    assert np.allclose(rho.mat, np.eye(2) / 2)


def test_capacity_and_indices():
    with pytest.raises(CapacityError):
        dm.DensityMatrix.zero_state(dm.DENSE_CAP + 1)
    with pytest.raises(QubitIndexError):
        dm.apply_unitary(_ket("0"), "H", (3,))
    with pytest.raises(InvalidSizeError):
        dm.DensityMatrix(np.eye(3))


def test_csv_round_trip(rng):
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    rho = dm.DensityMatrix.from_statevector(psi / np.linalg.norm(psi))
    back = dm.DensityMatrix.from_csv(rho.to_csv())
    assert np.array_equal(back.mat, rho.mat)
    with pytest.raises(ParameterError):
        dm.DensityMatrix.from_csv("1,0\nfoo")
