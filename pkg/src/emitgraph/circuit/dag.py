"""
Circuit DAG over emitter, photon and classical registers.

Wires are named ``e<k>``, ``p<k>`` and ``c<k>``.  Every wire runs from an
input terminal through the gates acting on it to an output terminal; the
edge key in the underlying :class:`networkx.MultiDiGraph` is the wire name.
"""

import heapq
import json
import re
from dataclasses import dataclass, field

import networkx as nx

from ..exceptions import CircuitError, QubitIndexError, UnsupportedGateError

SINGLE_QUBIT_GATES = ("H", "X", "Y", "Z", "S", "Sdag", "Identity")
TWO_QUBIT_GATES = ("CNOT", "CZ", "EmissionCNOT")
COMPOSITE = "MeasureXFeedforwardReset"
GATE_KINDS = SINGLE_QUBIT_GATES + TWO_QUBIT_GATES + (COMPOSITE,)
INVERSE = {"S": "Sdag", "Sdag": "S"}
REGISTER_ORDER = {"e": 0, "p": 1, "c": 2}
_WIRE_RE = re.compile(r"^([epc])(\d+)$")


def parse_wire(wire):
    m = _WIRE_RE.match(wire)
    if not m:
        raise CircuitError(f"bad wire name {wire!r}; expected e<k>, p<k> or c<k>")
    return m.group(1), int(m.group(2))


def wire_sort_key(wire):
    reg, idx = parse_wire(wire)
    return REGISTER_ORDER[reg], idx


def emitter(k):
    return f"e{k}"


def photon(k):
    return f"p{k}"


def classical(k):
    return f"c{k}"


@dataclass(frozen=True)
class GateSpec:
    """A gate kind and its operand wires.

    ``MeasureXFeedforwardReset`` takes ``(emitter, target, classical)`` and a
    ``correction`` Pauli (X, Y or Z) applied to the target when the outcome
    is 1.
    """

    kind: str
    wires: tuple
    correction: str = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(self.wires))
        if self.kind not in GATE_KINDS:
            raise UnsupportedGateError(f"unsupported gate kind {self.kind!r}")
        regs = [parse_wire(w)[0] for w in self.wires]
        if len(set(self.wires)) != len(self.wires):
            raise CircuitError(f"{self.kind} repeats a wire: {self.wires}")
        if self.kind in SINGLE_QUBIT_GATES:
            ok = len(regs) == 1 and regs[0] in "ep"
        elif self.kind == "EmissionCNOT":
            ok = regs == ["e", "p"]
        elif self.kind in TWO_QUBIT_GATES:
            ok = len(regs) == 2 and all(r in "ep" for r in regs)
        else:
            ok = len(regs) == 3 and regs[0] == "e" and regs[1] in "ep" and regs[2] == "c"
            if self.correction is None:
                object.__setattr__(self, "correction", "X")
            if self.correction not in ("X", "Y", "Z"):
                raise CircuitError(f"correction must be X, Y or Z, got {self.correction!r}")
        if self.kind != COMPOSITE and self.correction is not None:
            raise CircuitError("only the measurement composite takes a correction")
        if not ok:
            raise CircuitError(f"register mismatch for {self.kind} on {self.wires}")

    @property
    def quantum_wires(self):
        return tuple(w for w in self.wires if w[0] != "c")

    @property
    def is_unitary(self):
        return self.kind != COMPOSITE

    def inverse(self):
        if self.kind == COMPOSITE:
            raise CircuitError("the measurement composite has no inverse")
        return GateSpec(INVERSE.get(self.kind, self.kind), self.wires)

    def to_dict(self):
        d = {"kind": self.kind, "wires": list(self.wires)}
        if self.correction is not None:
            d["correction"] = self.correction
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], tuple(d["wires"]), d.get("correction"))


def _is_terminal(node):
    return isinstance(node, tuple)


def _insertion_key(node):
    if not _is_terminal(node):
        return node
    return -1 if node[0] == "in" else 1 << 60


class CircuitDAG:
    """Directed acyclic gate graph with register-qualified wires.

    Parameters
    ----------
    n_emitters, n_photons, n_classical : int
        Register sizes.  Classical bits are added on demand by
        :meth:`add_measurement`.
    """

    def __init__(self, n_emitters=0, n_photons=1, n_classical=0):
        if min(n_emitters, n_photons, n_classical) < 0:
            raise CircuitError("register sizes must be non-negative")
        self.graph = nx.MultiDiGraph()
        self.n_emitters = 0
        self.n_photons = 0
        self.n_classical = 0
        self._next_id = 0
        self.add_registers(n_emitters, n_photons, n_classical)

    # -- registers ----------------------------------------------------------------

    def _add_wire(self, wire):
        self.graph.add_node(("in", wire))
        self.graph.add_node(("out", wire))
        self.graph.add_edge(("in", wire), ("out", wire), key=wire)

    def add_registers(self, emitters=0, photons=0, classical_bits=0):
        for k in range(emitters):
            self._add_wire(emitter(self.n_emitters + k))
        for k in range(photons):
            self._add_wire(photon(self.n_photons + k))
        for k in range(classical_bits):
            self._add_wire(classical(self.n_classical + k))
        self.n_emitters += emitters
        self.n_photons += photons
        self.n_classical += classical_bits

    @property
    def wires(self):
        return (
            [emitter(k) for k in range(self.n_emitters)]
            + [photon(k) for k in range(self.n_photons)]
            + [classical(k) for k in range(self.n_classical)]
        )

    def _check_wires(self, gate):
        for w in gate.wires:
            reg, idx = parse_wire(w)
            size = {"e": self.n_emitters, "p": self.n_photons, "c": self.n_classical}[reg]
            if idx >= size:
                raise QubitIndexError(f"wire {w} outside register of size {size}")

    # -- edits ----------------------------------------------------------------------

    def _last_edge(self, wire):
        out = ("out", wire)
        (u, _, _), = [e for e in self.graph.in_edges(out, keys=True) if e[2] == wire]
        return u, out

    def add_gate(self, gate):
        """Append ``gate`` at the end of its wires; returns the node id."""
        if isinstance(gate, str):
            raise TypeError("pass a GateSpec")
        self._check_wires(gate)
        node = self._next_id
        self._next_id += 1
        self.graph.add_node(node, gate=gate)
        for w in gate.wires:
            u, v = self._last_edge(w)
            self.graph.remove_edge(u, v, key=w)
            self.graph.add_edge(u, node, key=w)
            self.graph.add_edge(node, v, key=w)
        return node

    def add(self, kind, *wires, correction=None):
        return self.add_gate(GateSpec(kind, wires, correction))

    def add_measurement(self, emitter_wire, target_wire, correction="X"):
        """Append a measurement composite with a fresh classical bit."""
        self.add_registers(classical_bits=1)
        return self.add_gate(
            GateSpec(COMPOSITE, (emitter_wire, target_wire, classical(self.n_classical - 1)), correction)
        )

    def wire_edges(self, wire):
        """Edges ``(u, v)`` along ``wire`` from input to output."""
        node = ("in", wire)
        path = []
        while node != ("out", wire):
            (nxt,) = [v for _, v, k in self.graph.out_edges(node, keys=True) if k == wire]
            path.append((node, nxt))
            node = nxt
        return path

    def insert_gate_at(self, gate, locations):
        """Insert ``gate`` splicing into edge ``locations[w] = (u, v)`` of each wire ``w``."""
        self._check_wires(gate)
        if set(locations) != set(gate.wires):
            raise CircuitError("need exactly one insertion edge per gate wire")
        for w, (u, v) in locations.items():
            if not self.graph.has_edge(u, v, key=w):
                raise CircuitError(f"no edge {u}->{v} on wire {w}")
        node = self._next_id
        self._next_id += 1
        self.graph.add_node(node, gate=gate)
        for w, (u, v) in locations.items():
            self.graph.remove_edge(u, v, key=w)
            self.graph.add_edge(u, node, key=w)
            self.graph.add_edge(node, v, key=w)
        if not nx.is_directed_acyclic_graph(self.graph):
            self._detach(node)
            for w, (u, v) in locations.items():
                self.graph.add_edge(u, v, key=w)
            raise CircuitError("insertion would create a cycle")
        return node

    def _detach(self, node):
        preds = {k: u for u, _, k in self.graph.in_edges(node, keys=True)}
        succs = {k: v for _, v, k in self.graph.out_edges(node, keys=True)}
        self.graph.remove_node(node)
        return preds, succs

    def remove_gate(self, node):
        if node not in self.graph or _is_terminal(node):
            raise CircuitError(f"no gate node {node!r}")
        preds, succs = self._detach(node)
        for w in preds:
            self.graph.add_edge(preds[w], succs[w], key=w)

    def replace_gate(self, node, gate):
        if node not in self.graph or _is_terminal(node):
            raise CircuitError(f"no gate node {node!r}")
        old = self.graph.nodes[node]["gate"]
        if set(old.wires) != set(gate.wires):
            raise CircuitError("replacement must act on the same wires")
        self.graph.nodes[node]["gate"] = gate

    # -- views ------------------------------------------------------------------------

    def gate_nodes(self):
        return [n for n in self.graph.nodes if not _is_terminal(n)]

    def gate(self, node):
        return self.graph.nodes[node]["gate"]

    def __len__(self):
        return len(self.gate_nodes())

    def topological_order(self):
        """Gate nodes in a topological order that follows insertion order where free."""
        order = nx.lexicographical_topological_sort(self.graph, key=_insertion_key)
        return [n for n in order if not _is_terminal(n)]

    def gates(self):
        return [self.gate(n) for n in self.topological_order()]

    def canonical_order(self):
        """Topological order that depends only on the DAG structure.

        Among ready gates the one whose wires sort first (by register, then
        index) goes first, so DAG-isomorphic circuits serialize identically.
        """
        indeg = {}
        heap = []
        for n in self.graph.nodes:
            if _is_terminal(n):
                continue
            preds = [u for u, _ in self.graph.in_edges(n) if not _is_terminal(u)]
            indeg[n] = len(preds)
            if not preds:
                heapq.heappush(heap, (self._node_key(n), n))
        order = []
        while heap:
            _, n = heapq.heappop(heap)
            order.append(n)
            for _, v in self.graph.out_edges(n):
                if _is_terminal(v):
                    continue
                indeg[v] -= 1
                if indeg[v] == 0:
                    heapq.heappush(heap, (self._node_key(v), v))
        return order

    def _node_key(self, n):
        g = self.gate(n)
        return tuple(wire_sort_key(w) for w in g.wires), g.kind, g.correction or ""

    def canonical_gates(self):
        return [self.gate(n) for n in self.canonical_order()]

    def canonical_key(self):
        regs = (self.n_emitters, self.n_photons)
        gates = []
        cmap = {}
        for g in self.canonical_gates():
            # classical bit numbering is an artefact of construction order
            wires = tuple(cmap.setdefault(w, f"c{len(cmap)}") if w[0] == "c" else w for w in g.wires)
            gates.append((g.kind, wires, g.correction))
        return regs, tuple(gates)

    def wire_gates(self, wire):
        """Gate nodes along ``wire`` in order."""
        return [v for _, v in self.wire_edges(wire) if not _is_terminal(v)]

    def copy(self):
        new = CircuitDAG.__new__(CircuitDAG)
        new.graph = self.graph.copy()
        new.n_emitters = self.n_emitters
        new.n_photons = self.n_photons
        new.n_classical = self.n_classical
        new._next_id = self._next_id
        return new

    def __repr__(self):
        return (
            f"CircuitDAG(emitters={self.n_emitters}, photons={self.n_photons}, "
            f"classical={self.n_classical}, gates={len(self)})"
        )

    # -- construction helpers ----------------------------------------------------------

    @classmethod
    def from_gates(cls, gates, n_emitters, n_photons, n_classical=None):
        gates = list(gates)
        if n_classical is None:
            n_classical = 0
            for g in gates:
                for w in g.wires:
                    if w[0] == "c":
                        n_classical = max(n_classical, parse_wire(w)[1] + 1)
        c = cls(n_emitters, n_photons, n_classical)
        for g in gates:
            c.add_gate(g)
        return c

    def to_dict(self):
        return {
            "n_emitters": self.n_emitters,
            "n_photons": self.n_photons,
            "n_classical": self.n_classical,
            "gates": [g.to_dict() for g in self.gates()],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        return cls.from_gates(
            [GateSpec.from_dict(g) for g in d["gates"]], d["n_emitters"], d["n_photons"], d["n_classical"]
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def is_isomorphic(a, b):
    """Structural equality of two circuits up to gate-node identity."""
    return a.canonical_key() == b.canonical_key()


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def validate(circuit):
    """Check the photon interaction constraints.

    Photons may only be touched by single-qubit gates, as the target of an
    emission, or as the feed-forward target of a measurement composite.
    Flags two-qubit gates between photons and CNOT/CZ gates coupling a photon
    back into an emitter.
    """
    problems = []
    for n in circuit.topological_order():
        g = circuit.gate(n)
        if g.kind not in ("CNOT", "CZ"):
            continue
        regs = [w[0] for w in g.wires]
        if regs == ["p", "p"]:
            problems.append(f"gate {n}: {g.kind} between photons {g.wires}")
        elif g.kind == "CNOT" and regs == ["p", "e"]:
            problems.append(f"gate {n}: CNOT with photon control {g.wires[0]} and emitter target")
        elif g.kind == "CZ" and "p" in regs:
            problems.append(f"gate {n}: CZ coupling photon and emitter {g.wires}")
    return ValidationReport(problems)
