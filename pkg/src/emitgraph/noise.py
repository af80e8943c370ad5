"""
Noise models placed relative to circuit gates.

A :class:`NoiseModel` is an ordered list of :class:`NoisePlacement` rules.
For each position (``before``, ``after``, ``replace``) the first rule whose
selector matches a gate decides what happens at that position, so a single
gate can receive both a pre- and a post-channel.
"""

import json
from dataclasses import dataclass, field

from . import densitymat as dm
from .circuit.dag import GATE_KINDS, GateSpec
from .densitymat import DensityMatrix
from .exceptions import BackendUnsupportedError, NoiseModelError
from .tableau import CliffordTableau, MixedStabilizerState, branch_depolarize, sample_depolarize

CHANNEL_TYPES = ("depolarizing", "loss", "pauli", "none")
POSITIONS = ("before", "after", "replace")
REGISTERS = ("emitter", "photon", "any")


@dataclass(frozen=True)
class Channel:
    """Single-qubit noise channel.

    ``pauli`` applies the letter ``pauli`` with probability ``p``.
    """

    type: str
    p: float = 0.0
    pauli: str = None

    def __post_init__(self):
        if self.type not in CHANNEL_TYPES:
            raise NoiseModelError(f"unknown channel type {self.type!r}")
        if not 0.0 <= float(self.p) <= 1.0:
            raise NoiseModelError(f"channel probability must lie in [0, 1], got {self.p}")
        if self.type == "pauli" and self.pauli not in ("X", "Y", "Z"):
            raise NoiseModelError("pauli channel needs pauli in {X, Y, Z}")

    def to_dict(self):
        d = {"type": self.type, "p": self.p}
        if self.pauli:
            d["pauli"] = self.pauli
        return d


def depolarizing(p):
    return Channel("depolarizing", p)


def loss(p):
    return Channel("loss", p)


def pauli(letter, p):
    return Channel("pauli", p, letter)


@dataclass(frozen=True)
class Selector:
    """Matches gates by kind, register class and wire index.

    ``kind`` is a gate kind, ``"*"`` for any gate or ``"unitary"`` for any
    gate except the measurement composite.  A gate belongs to the emitter
    class if it touches an emitter (emissions included) and to the photon
    class otherwise; naming ``EmissionCNOT`` explicitly together with
    ``register="photon"`` targets the emitted photon instead.
    """

    kind: str = "*"
    register: str = "any"
    wire: int = None

    def __post_init__(self):
        if self.kind not in ("*", "unitary") + GATE_KINDS:
            raise NoiseModelError(f"unknown gate kind in selector: {self.kind!r}")
        if self.register not in REGISTERS:
            raise NoiseModelError(f"register must be one of {REGISTERS}, got {self.register!r}")

    def targets(self, gate):
        """Wires of ``gate`` the rule acts on, or ``None`` if it does not match."""
        if self.kind == "unitary" and not gate.is_unitary:
            return None
        if self.kind not in ("*", "unitary") and self.kind != gate.kind:
            return None
        qwires = gate.quantum_wires
        touches_emitter = any(w[0] == "e" for w in qwires)
        if self.register == "any":
            wires = qwires
        elif self.register == "emitter":
            wires = tuple(w for w in qwires if w[0] == "e")
        elif gate.kind == "EmissionCNOT":
            wires = tuple(w for w in qwires if w[0] == "p") if self.kind == "EmissionCNOT" else ()
        else:
            wires = () if touches_emitter else qwires
        if self.wire is not None:
            wires = tuple(w for w in wires if int(w[1:]) == self.wire)
        return wires or None

    def to_dict(self):
        d = {"kind": self.kind, "register": self.register}
        if self.wire is not None:
            d["wire"] = self.wire
        return d


@dataclass(frozen=True)
class NoisePlacement:
    """One rule: where (selector, position) and what (channel or replacement gate kind)."""

    selector: Selector
    position: str
    channel: Channel = None
    replacement: str = None

    def __post_init__(self):
        if self.position not in POSITIONS:
            raise NoiseModelError(f"position must be one of {POSITIONS}, got {self.position!r}")
        if self.position == "replace":
            if self.channel is not None and self.channel.type != "none":
                raise NoiseModelError("replace rules substitute a gate, not a channel")
            if self.replacement is not None and self.replacement not in GATE_KINDS:
                raise NoiseModelError(f"unknown replacement gate {self.replacement!r}")
        elif self.channel is None:
            raise NoiseModelError("before/after rules need a channel")
        if self.channel is not None and self.channel.type == "loss" and self.selector.register == "emitter":
            raise NoiseModelError("photon loss applies to photonic wires only")

    def to_dict(self):
        d = {"selector": self.selector.to_dict(), "position": self.position}
        if self.position == "replace":
            d["channel"] = {"type": "gate", "kind": self.replacement} if self.replacement else {"type": "none"}
        else:
            d["channel"] = self.channel.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            sel = Selector(**d.get("selector", {}))
            position = d["position"]
            ch = dict(d["channel"])
        except (KeyError, TypeError) as exc:
            raise NoiseModelError(f"malformed noise rule {d!r}: {exc}") from None
        if position == "replace":
            if ch.get("type") == "gate":
                return cls(sel, position, replacement=ch["kind"])
            return cls(sel, position, channel=Channel("none"))
        return cls(sel, position, channel=Channel(ch.get("type"), float(ch.get("p", 0.0)), ch.get("pauli")))


@dataclass(frozen=True)
class ResolvedGate:
    pre: tuple
    gate: GateSpec
    post: tuple


@dataclass(frozen=True)
class NoiseModel:
    rules: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    @classmethod
    def from_list(cls, items):
        return cls(tuple(NoisePlacement.from_dict(d) for d in items))

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        if isinstance(data, dict):
            data = data.get("rules", [])
        return cls.from_list(data)

    def to_list(self):
        return [r.to_dict() for r in self.rules]

    def to_json(self):
        return json.dumps(self.to_list())

    @property
    def is_empty(self):
        return not self.rules

    def resolve(self, gate):
        return resolve(self, gate)

    def channels(self):
        return [r.channel for r in self.rules if r.channel is not None]


def emitter_gate_depolarizing(p):
    """Depolarizing ``p`` after every unitary gate on the emitter wires."""
    return NoiseModel((NoisePlacement(Selector("unitary", "emitter"), "after", depolarizing(p)),))


def resolve(model, gate):
    """Expand ``gate`` into ``(pre-channels, gate or replacement, post-channels)``.

    Each channel entry is a ``(Channel, wire)`` pair.  A ``replace`` rule
    without a replacement kind drops the gate (``gate`` is ``None``).
    """
    if model is None or not model.rules:
        return ResolvedGate((), gate, ())
    found = {}
    for rule in model.rules:
        if rule.position in found:
            continue
        wires = rule.selector.targets(gate)
        if wires is None:
            continue
        found[rule.position] = (rule, wires)
        if len(found) == len(POSITIONS):
            break
    out_gate = gate
    if "replace" in found:
        rule, _ = found["replace"]
        if rule.replacement is None:
            out_gate = None
        else:
            try:
                out_gate = GateSpec(rule.replacement, gate.wires, gate.correction)
            except Exception as exc:
                raise NoiseModelError(f"cannot replace {gate.kind} by {rule.replacement}: {exc}") from None
    pre, post = [], []
    for pos, acc in (("before", pre), ("after", post)):
        if pos not in found:
            continue
        rule, wires = found[pos]
        for w in wires:
            if rule.channel.type == "loss" and w[0] != "p":
                raise NoiseModelError(f"loss rule matched emitter wire {w} of {gate.kind}")
            if rule.channel.type != "none":
                acc.append((rule.channel, w))
    return ResolvedGate(tuple(pre), out_gate, tuple(post))


def apply_channel(state, channel, qubit, rng=None, prune_eps=0.0):
    """Apply ``channel`` to qubit index ``qubit`` of ``state``.

    Dense states support every channel.  Branch ensembles apply Pauli
    channels exactly and loss as a weight factor.  A pure tableau can only
    sample Pauli noise (Monte Carlo, needs ``rng``) and rejects loss.
    """
    if channel.type == "none" or channel.p == 0:
        return state
    if isinstance(state, DensityMatrix):
        if channel.type == "depolarizing":
            return dm.apply_depolarizing(state, qubit, channel.p)
        if channel.type == "loss":
            return dm.apply_loss(state, qubit, channel.p)
        return dm.apply_pauli_channel(state, qubit, {"I": 1 - channel.p, channel.pauli: channel.p})
    if isinstance(state, MixedStabilizerState):
        if channel.type == "depolarizing":
            return branch_depolarize(state, qubit, channel.p, prune_eps, merge=True)
        if channel.type == "loss":
            return state.copy().scale(1 - channel.p)
        new = state.copy()
        return new.apply_pauli_channel(qubit, {"I": 1 - channel.p, channel.pauli: channel.p}, prune_eps)
    if isinstance(state, CliffordTableau):
        if channel.type == "loss":
            raise BackendUnsupportedError("a pure tableau cannot carry loss; use the mixed backend")
        if rng is None:
            raise BackendUnsupportedError("sampling noise on a pure tableau needs a random generator")
        new = state.copy()
        if channel.type == "depolarizing":
            return sample_depolarize(new, qubit, channel.p, rng)
        if rng.random() < channel.p:
            new.apply_pauli(channel.pauli, qubit)
        return new
    raise BackendUnsupportedError(f"unsupported state type {type(state).__name__}")


def all_zero(model):
    """True if every channel in ``model`` has probability zero."""
    return all(c.p == 0 for c in model.channels())


__all__ = [
    "Channel",
    "NoiseModel",
    "NoisePlacement",
    "ResolvedGate",
    "Selector",
    "all_zero",
    "apply_channel",
    "depolarizing",
    "emitter_gate_depolarizing",
    "loss",
    "pauli",
    "resolve",
]
