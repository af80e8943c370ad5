"""
Circuit simulator for the dense, stabilizer and mixed-stabilizer backends.

Simulation qubit order: photons ``0..n_photons-1`` then emitters.  Every
qubit starts in ``|0>``.  By default the returned state is restricted to the
photons; emitters are expected to end in ``|0>``.
"""

import warnings

import numpy as np

from .. import densitymat as dm
from .. import noise as noise_mod
from ..densitymat import DENSE_CAP, check_capacity
from ..exceptions import InvalidSizeError, ValidationError
from ..tableau import CliffordTableau, MixedStabilizerState, remove_qubits
from .dag import COMPOSITE, validate

BACKENDS = ("dense", "stabilizer", "mixed")


def qubit_index(circuit, wire):
    reg, idx = wire[0], int(wire[1:])
    return idx if reg == "p" else circuit.n_photons + idx


class _Dense:
    def __init__(self, n):
        self.state = dm.DensityMatrix.zero_state(n, allow_large=True)

    def gate(self, kind, qubits):
        self.state = dm.apply_unitary(self.state, kind, qubits)

    def composite(self, e, t, correction, rng):
        self.state = dm.measure_x_feedforward_reset(self.state, e, t, correction)

    def channel(self, ch, q, rng):
        self.state = noise_mod.apply_channel(self.state, ch, q, rng)

    def dispose(self, emitters, keep, rng):
        tr = self.state.trace()
        for e in emitters:
            if tr > 0 and dm.outcome_probability(self.state, e, 0) < tr * (1 - 1e-9):
                warnings.warn(f"emitter qubit {e} does not end in |0>; tracing it out", RuntimeWarning)
                break
        return dm.partial_trace(self.state, keep)


class _Stabilizer:
    def __init__(self, n):
        self.state = CliffordTableau.zero_state(n)

    def gate(self, kind, qubits):
        self.state.apply(kind, qubits)

    def composite(self, e, t, correction, rng):
        s = self.state
        s.h(e)
        outcome, _ = s.measure_z(e, rng)
        if outcome:
            s.apply_pauli(correction, t)
            s.pauli_x(e)

    def channel(self, ch, q, rng):
        self.state = noise_mod.apply_channel(self.state, ch, q, rng)

    def dispose(self, emitters, keep, rng):
        s = self.state
        for e in emitters:
            if s.peek_z(e) != 0:
                warnings.warn(f"emitter qubit {e} does not end in |0>; measuring and resetting it", RuntimeWarning)
                s.reset(e, rng)
        return remove_qubits(s, emitters) if emitters else s


class _Mixed:
    def __init__(self, n, prune_eps=0.0):
        self.state = MixedStabilizerState.zero_state(n)
        self.prune_eps = prune_eps

    def gate(self, kind, qubits):
        self.state.apply(kind, qubits)

    def composite(self, e, t, correction, rng):
        m = self.state
        m.apply("H", (e,))
        outcomes = m.measure_z_branches(e)
        for (_, tab), out in zip(m.branches, outcomes):
            if out:
                tab.apply_pauli(correction, t)
                tab.pauli_x(e)
        m.merge()

    def channel(self, ch, q, rng):
        self.state = noise_mod.apply_channel(self.state, ch, q, rng, self.prune_eps)

    def dispose(self, emitters, keep, rng):
        m = self.state
        warned = False
        for e in emitters:
            if not warned and any(t.peek_z(e) != 0 for _, t in m.branches):
                warnings.warn(f"emitter qubit {e} does not end in |0>; measuring and resetting it", RuntimeWarning)
                warned = True
            outcomes = m.measure_z_branches(e)
            for (_, tab), out in zip(m.branches, outcomes):
                if out:
                    tab.pauli_x(e)
        if not emitters:
            return m
        return MixedStabilizerState([(p, remove_qubits(t, emitters)) for p, t in m.branches])


def simulate(
    circuit,
    backend="dense",
    noise=None,
    rng=None,
    seed=None,
    keep_emitters=False,
    allow_large=False,
    dense_cap=DENSE_CAP,
    prune_eps=0.0,
    check=True,
):
    """Run ``circuit`` from ``|0...0>`` and return the final state.

    Parameters
    ----------
    circuit : CircuitDAG
    backend : {"dense", "stabilizer", "mixed"}
        ``dense`` returns a :class:`DensityMatrix`, ``stabilizer`` a single
        :class:`CliffordTableau` (measurements and noise are sampled) and
        ``mixed`` an exact :class:`MixedStabilizerState` ensemble.
    noise : NoiseModel, optional
    rng, seed
        Randomness for sampled measurement outcomes and Monte Carlo noise.
    keep_emitters : bool
        Return the state of all qubits instead of the photons only.
    """
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
    if check:
        report = validate(circuit)
        if not report.ok:
            raise ValidationError("; ".join(report.violations))
    if rng is None:
        rng = np.random.default_rng(seed)
    n = circuit.n_photons + circuit.n_emitters
    if n == 0:
        raise InvalidSizeError("circuit has no qubits")
    if backend == "dense":
        check_capacity(n, allow_large, dense_cap)
        sim = _Dense(n)
    elif backend == "stabilizer":
        sim = _Stabilizer(n)
    else:
        sim = _Mixed(n, prune_eps)

    for gate in circuit.gates():
        res = noise_mod.resolve(noise, gate)
        for ch, w in res.pre:
            sim.channel(ch, qubit_index(circuit, w), rng)
        g = res.gate
        if g is not None:
            if g.kind == COMPOSITE:
                e, t = (qubit_index(circuit, w) for w in g.wires[:2])
                sim.composite(e, t, g.correction, rng)
            elif g.kind != "Identity":
                sim.gate(g.kind, tuple(qubit_index(circuit, w) for w in g.wires))
        for ch, w in res.post:
            sim.channel(ch, qubit_index(circuit, w), rng)

    if keep_emitters or circuit.n_emitters == 0:
        return sim.state
    if circuit.n_photons == 0:
        raise InvalidSizeError("no photons to return; pass keep_emitters=True")
    emitters = list(range(circuit.n_photons, n))
    return sim.dispose(emitters, list(range(circuit.n_photons)), rng)
