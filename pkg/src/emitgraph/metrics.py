"""
Circuit metrics, state metrics and weighted cost functions.

Every metric is oriented for minimization; fidelity is exposed as
``infidelity``.
"""

import json
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .circuit.dag import COMPOSITE, _is_terminal
from .densitymat import DENSE_CAP, DensityMatrix
from .exceptions import InvalidSizeError, MetricUnavailableError, ParameterError
from .graphstate import GraphState
from .tableau import CliffordTableau, MixedStabilizerState, pauli_product

CIRCUIT_METRICS = ("unitaries", "emitters", "ee_cnots", "depth", "emitter_depth", "emitter_history")
STATE_METRICS = ("infidelity", "trace_distance")


@dataclass(frozen=True)
class MetricValue:
    name: str
    value: float
    direction: str = "minimize"


# -- circuit metrics ----------------------------------------------------------------


def _counts_as_gate(gate):
    return gate.kind != "Identity"


def circuit_metrics(circuit, count_emission=True, count_cz=True):
    """Gate-count and depth figures of ``circuit``.

    Parameters
    ----------
    count_emission : bool
        Include ``EmissionCNOT`` in ``unitaries``.
    count_cz : bool
        Count CZ as well as CNOT between emitters in ``ee_cnots``.

    Returns
    -------
    dict
        ``unitaries``, ``emitters``, ``ee_cnots``, ``depth``,
        ``emitter_depth`` and ``emitter_history``.
    """
    unitaries = 0
    ee = 0
    ee_kinds = ("CNOT", "CZ") if count_cz else ("CNOT",)
    for node in circuit.gate_nodes():
        g = circuit.gate(node)
        if g.is_unitary and _counts_as_gate(g):
            if g.kind != "EmissionCNOT" or count_emission:
                unitaries += 1
        if g.kind in ee_kinds and all(w[0] == "e" for w in g.wires):
            ee += 1

    # longest path measured in gate nodes
    longest = {}
    for node in nx.topological_sort(circuit.graph):
        preds = [longest[u] for u, _ in circuit.graph.in_edges(node)]
        best = max(preds, default=0)
        if not _is_terminal(node) and _counts_as_gate(circuit.gate(node)):
            best += 1
        longest[node] = best
    depth = max(longest.values(), default=0)

    emitter_depth = 0
    history = 0
    for k in range(circuit.n_emitters):
        gates = [circuit.gate(n) for n in circuit.wire_gates(f"e{k}")]
        gates = [g for g in gates if _counts_as_gate(g)]
        history = max(history, len(gates))
        seg = 0
        for g in gates:
            seg += 1
            if g.kind == COMPOSITE:
                emitter_depth = max(emitter_depth, seg)
                seg = 0
        emitter_depth = max(emitter_depth, seg)
    return {
        "unitaries": unitaries,
        "emitters": circuit.n_emitters,
        "ee_cnots": ee,
        "depth": depth,
        "emitter_depth": emitter_depth,
        "emitter_history": history,
    }


# -- dense state metrics --------------------------------------------------------------


def _mat(rho):
    return rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _psd_sqrt(mat):
    w, v = np.linalg.eigh((mat + mat.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fidelity_dense(rho_out, rho_target):
    """Uhlmann fidelity ``(tr sqrt(sqrt(a) b sqrt(a)))**2``.

    A pure target reduces this to ``<psi|a|psi>``.  The output state may be
    sub-normalized, in which case the fidelity carries its trace as a factor.
    """
    a, b = _mat(rho_out), _mat(rho_target)
    if a.shape != b.shape:
        raise InvalidSizeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    tb = np.real(np.trace(b))
    if abs(np.real(np.trace(b @ b)) - tb * tb) < 1e-10:
        return float(min(max(np.real(np.trace(a @ b)) / tb, 0.0), 1.0))
    sa = _psd_sqrt(a)
    w = np.linalg.eigvalsh(sa @ b @ sa)
    return float(min(np.sum(np.sqrt(np.clip(w, 0, None))) ** 2, 1.0))


def trace_distance(rho_out, rho_target):
    a, b = _mat(rho_out), _mat(rho_target)
    if a.shape != b.shape:
        raise InvalidSizeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((d + d.conj().T) / 2))))


# -- stabilizer overlap -----------------------------------------------------------------


def _left_kernel(mat):
    """Basis (rows) of ``{w : w @ mat = 0 (mod 2)}``."""
    mat = np.asarray(mat, np.uint8) & 1
    m = mat.shape[0]
    aug = np.hstack([mat, np.eye(m, dtype=np.uint8)])
    rank = 0
    for c in range(mat.shape[1]):
        cand = np.flatnonzero(aug[rank:, c])
        if cand.size == 0:
            continue
        p = rank + int(cand[0])
        aug[[rank, p]] = aug[[p, rank]]
        others = np.flatnonzero(aug[:, c])
        others = others[others != rank]
        aug[others] ^= aug[rank]
        rank += 1
        if rank == m:
            break
    return aug[rank:, mat.shape[1]:]


def _combine(x, z, exps, mask):
    n = x.shape[1]
    rx, rz, e = np.zeros(n, np.uint8), np.zeros(n, np.uint8), 0
    for k in np.flatnonzero(mask):
        rx, rz, e = pauli_product(rx, rz, e, x[k], z[k], exps[k])
    return e


def _pure_overlap(a, b):
    n = a.n
    ax, az = a.stabilizer_x, a.stabilizer_z
    bx, bz = b.stabilizer_x, b.stabilizer_z
    ae = 2 * a.rphase[n:].astype(int)
    be = 2 * b.rphase[n:].astype(int)
    stacked = np.vstack([np.hstack([ax, az]), np.hstack([bx, bz])])
    kernel = _left_kernel(stacked)
    dim = kernel.shape[0]
    for w in kernel:
        if _combine(ax, az, ae, w[:n]) != _combine(bx, bz, be, w[n:]):
            return 0.0
    return 2.0 ** (-(n - dim))


def fidelity_stabilizer(a, b):
    """``|<a|b>|**2`` from the stabilizer groups alone.

    The common subgroup of the two (unsigned) stabilizer groups is the left
    kernel of the stacked generator matrix.  If some common element carries
    opposite signs the states are orthogonal; otherwise the overlap is
    ``2**-(n - dim)``.  A branch ensemble ``a`` gives the weighted sum.
    """
    if isinstance(b, MixedStabilizerState):
        raise TypeError("the second argument must be a pure tableau")
    if a.n != b.n:
        raise InvalidSizeError(f"qubit count mismatch: {a.n} vs {b.n}")
    if isinstance(a, MixedStabilizerState):
        return float(sum(p * _pure_overlap(t, b) for p, t in a.branches))
    return _pure_overlap(a, b)


# -- generic dispatch ---------------------------------------------------------------------


def _target_tableau(target):
    from .convert import graph_to_stabilizer

    if isinstance(target, GraphState):
        return graph_to_stabilizer(target)
    if isinstance(target, CliffordTableau):
        return target
    raise MetricUnavailableError("stabilizer states need a graph or tableau target")


def _target_density(target):
    from .convert import graph_to_density, stabilizer_to_density

    if isinstance(target, DensityMatrix):
        return target
    if isinstance(target, GraphState):
        return graph_to_density(target)
    if isinstance(target, CliffordTableau):
        return stabilizer_to_density(target)
    raise MetricUnavailableError(f"cannot compare against {type(target).__name__}")


def fidelity(state, target):
    """Fidelity of a dense or stabilizer ``state`` with ``target``."""
    if isinstance(state, DensityMatrix):
        return fidelity_dense(state, _target_density(target))
    if isinstance(state, (CliffordTableau, MixedStabilizerState)):
        return fidelity_stabilizer(state, _target_tableau(target))
    raise MetricUnavailableError(f"unsupported state type {type(state).__name__}")


def infidelity(state, target):
    return 1.0 - fidelity(state, target)


def state_trace_distance(state, target):
    from .convert import stabilizer_to_density

    if not isinstance(state, DensityMatrix):
        if state.n > DENSE_CAP:
            raise MetricUnavailableError("trace distance needs a dense state; too many qubits")
        state = stabilizer_to_density(state)
    return trace_distance(state, _target_density(target))


# -- cost functions ---------------------------------------------------------------------------


class CostFunction:
    """Weighted sum of named metrics.

    Parameters
    ----------
    terms : dict or list of (name, weight)
        Metric names from ``CIRCUIT_METRICS`` and ``STATE_METRICS``.
    """

    def __init__(self, terms):
        items = list(terms.items()) if isinstance(terms, dict) else [tuple(t) for t in terms]
        for name, w in items:
            if name not in CIRCUIT_METRICS + STATE_METRICS:
                raise ParameterError(f"unknown metric {name!r}")
            if w < 0:
                raise ParameterError(f"metric weights must be non-negative, got {w} for {name}")
        if not any(w > 0 for _, w in items):
            raise ParameterError("a cost function needs at least one positive weight")
        self.terms = [(name, float(w)) for name, w in items]

    def __repr__(self):
        return f"CostFunction({dict(self.terms)})"

    @property
    def needs_state(self):
        return any(name in STATE_METRICS for name, _ in self.terms)

    def to_dict(self):
        return {"metrics": [{"name": n, "weight": w} for n, w in self.terms]}

    @classmethod
    def from_dict(cls, d):
        if "metrics" in d:
            return cls([(m["name"], m.get("weight", 1.0)) for m in d["metrics"]])
        return cls(d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def metric_values(cf, circuit, state, target):
    names = [n for n, _ in cf.terms]
    values = {}
    if any(n in CIRCUIT_METRICS for n in names):
        values.update(circuit_metrics(circuit))
    if "infidelity" in names:
        values["infidelity"] = infidelity(state, target)
    if "trace_distance" in names:
        values["trace_distance"] = state_trace_distance(state, target)
    return values


def evaluate_cost(cf, circuit, state=None, target=None, values=None):
    """``sum_i w_i m_i`` over the cost function's terms."""
    if values is None:
        if cf.needs_state and (state is None or target is None):
            raise MetricUnavailableError("state metrics need both a state and a target")
        values = metric_values(cf, circuit, state, target)
    return float(sum(w * values[n] for n, w in cf.terms))


def metric_report(circuit, state=None, target=None, cost=None):
    report = {"circuit": circuit_metrics(circuit), "state": {}}
    if state is not None and target is not None:
        report["state"]["infidelity"] = infidelity(state, target)
        try:
            report["state"]["trace_distance"] = state_trace_distance(state, target)
        except MetricUnavailableError:
            pass
    if cost is not None:
        report["cost"] = evaluate_cost(cost, circuit, state, target)
    return report


__all__ = [
    "CIRCUIT_METRICS",
    "STATE_METRICS",
    "CostFunction",
    "MetricValue",
    "circuit_metrics",
    "evaluate_cost",
    "fidelity",
    "fidelity_dense",
    "fidelity_stabilizer",
    "infidelity",
    "metric_report",
    "metric_values",
    "state_trace_distance",
    "trace_distance",
]
