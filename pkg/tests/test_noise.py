import numpy as np
import pytest

from emitgraph import densitymat as dm
from emitgraph.circuit import GateSpec, simulate
from emitgraph.convert import stabilizer_to_density
from emitgraph.exceptions import BackendUnsupportedError, NoiseModelError
from emitgraph.graphstate import GraphState
from emitgraph.noise import (
    Channel,
    NoiseModel,
    NoisePlacement,
    Selector,
    apply_channel,
    depolarizing,
    emitter_gate_depolarizing,
    loss,
    resolve,
)
from emitgraph.tableau import CliffordTableau, MixedStabilizerState

from conftest import random_physical_circuit


def test_resolve_examples():
    h = GateSpec("H", ("e0",))
    assert resolve(NoiseModel(), h).gate == h
    assert resolve(None, h).post == ()
    model = emitter_gate_depolarizing(0.01)
    assert resolve(model, h).post == ((depolarizing(0.01), "e0"),)
    photon_rule = NoiseModel((NoisePlacement(Selector("*", "photon"), "after", depolarizing(0.1)),))
    assert resolve(photon_rule, GateSpec("CNOT", ("e0", "e1"))).post == ()
    assert resolve(photon_rule, GateSpec("H", ("p0",))).post == ((depolarizing(0.1), "p0"),)


def test_emission_noise_targets():
    emit = GateSpec("EmissionCNOT", ("e0", "p1"))
    assert [w for _, w in resolve(emitter_gate_depolarizing(0.01), emit).post] == ["e0"]
    rule = NoiseModel((NoisePlacement(Selector("EmissionCNOT", "photon"), "before", loss(0.1)),))
    assert [w for _, w in resolve(rule, emit).pre] == ["p1"]


def test_replace_rule():
    model = NoiseModel((NoisePlacement(Selector("H"), "replace", replacement="Identity"),))
    out = resolve(model, GateSpec("H", ("p0",)))
    assert out.gate.kind == "Identity"
    drop = NoiseModel((NoisePlacement(Selector("H"), "replace"),))
    assert resolve(drop, GateSpec("H", ("p0",))).gate is None


def test_model_errors():
    with pytest.raises(NoiseModelError):
        Channel("thermal", 0.1)
    with pytest.raises(NoiseModelError):
        depolarizing(1.2)
    with pytest.raises(NoiseModelError):
        NoisePlacement(Selector(register="emitter"), "after", loss(0.1))
    with pytest.raises(NoiseModelError):
        NoisePlacement(Selector(), "sideways", depolarizing(0.1))


def test_json_round_trip():
    model = NoiseModel(
        (
            NoisePlacement(Selector("unitary", "emitter"), "after", depolarizing(0.01)),
            NoisePlacement(Selector("EmissionCNOT", "photon", wire=2), "before", loss(0.05)),
        )
    )
    assert NoiseModel.from_json(model.to_json()) == model


def test_loss_then_depolarizing():
    rho = dm.from_graph(GraphState(2, [(0, 1)]))
    out = apply_channel(apply_channel(rho, loss(0.1), 0), depolarizing(0.02), 0)
    expected = dm.apply_depolarizing(dm.DensityMatrix(rho.mat * 0.9), 0, 0.02)
    assert np.allclose(out.mat, expected.mat)
    assert out.trace() == pytest.approx(0.9)
    assert apply_channel(rho, depolarizing(0), 0) is rho


def test_tableau_channel_rules(rng):
    t = CliffordTableau.zero_state(1)
    with pytest.raises(BackendUnsupportedError):
        apply_channel(t, loss(0.1), 0)
    with pytest.raises(BackendUnsupportedError):
        apply_channel(t, depolarizing(0.1), 0)
    assert isinstance(apply_channel(t, depolarizing(0.1), 0, rng=rng), CliffordTableau)
    ens = apply_channel(MixedStabilizerState.from_tableau(t), loss(0.25), 0)
    assert ens.total_probability() == pytest.approx(0.75)


@pytest.mark.parametrize("p", [0.01, 0.02, 0.3])
def test_dense_vs_mixed_noisy(rng, p):
    model = NoiseModel((NoisePlacement(Selector("unitary", "any"), "after", depolarizing(p)),))
    for _ in range(5):
        c = random_physical_circuit(rng, 1, 2, 12, measurements=False)
        rho = simulate(c, "dense", noise=model, keep_emitters=True)
        ens = simulate(c, "mixed", noise=model, keep_emitters=True)
        assert np.allclose(rho.mat, stabilizer_to_density(ens).mat, atol=1e-10)
