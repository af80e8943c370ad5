"""
Alternate-target pipeline: synthesize circuits for LC-equivalent graphs and
emission orderings, correct each back to the original target, drop
duplicates and rank them by a noisy cost.
"""

from ..circuit.dag import COMPOSITE, CircuitDAG, GateSpec
from ..convert import stabilizer_to_graph
from ..exceptions import EmitGraphError, ParameterError, PipelineError
from ..graphops import OrbitEntry, lc_correction, lc_orbit, relabelings
from ..graphstate import LocalCliffordLayer, canonical_word, gates_matrix
from ..tableau import CliffordTableau
from .base import BaseSolver, CandidateCircuit, SolverResult, as_cost, as_noise, score
from .time_reversed import time_reversed_solve


def dedupe_circuits(items):
    """Keep the first of every group of DAG-isomorphic circuits.

    ``items`` may hold circuits or objects with a ``circuit`` attribute.
    """
    seen, out = set(), []
    for item in items:
        circuit = getattr(item, "circuit", item)
        key = circuit.canonical_key()
        if key in seen:
            continue
        seen.add(key)
        out.append(item)
    return out


def _rename_photons(gate, inverse_perm):
    """Photon ``p{perm[u]}`` becomes ``p{u}``."""
    wires = tuple(f"p{inverse_perm[int(w[1:])]}" if w[0] == "p" else w for w in gate.wires)
    return GateSpec(gate.kind, wires, gate.correction)


def merge_trailing_gates(gates, n_photons):
    """Fuse the run of single-qubit gates that ends every photon wire into one canonical word."""
    gates = list(gates)
    out_tail = {}
    keep = [True] * len(gates)
    for j in range(n_photons):
        wire = f"p{j}"
        run = []
        for i in range(len(gates) - 1, -1, -1):
            g = gates[i]
            if wire not in g.wires:
                continue
            if len(g.wires) != 1 or g.kind == "Identity":
                if g.kind == "Identity":
                    run.append(i)
                    continue
                break
            run.append(i)
        if not run:
            continue
        letters = [gates[i].kind for i in reversed(run) if gates[i].kind != "Identity"]
        for i in run:
            keep[i] = False
        out_tail[j] = canonical_word(gates_matrix(letters))
    merged = [g for g, k in zip(gates, keep) if k]
    for j in sorted(out_tail):
        merged.extend(GateSpec(c, (f"p{j}",)) for c in out_tail[j])
    return merged


def corrected_circuit(entry, circuit, correction, n_photons, n_emitters, merge=True):
    """Relabel photons of a circuit for ``entry.graph`` back and append ``correction``."""
    perm = entry.relabeling if entry.relabeling is not None else tuple(range(n_photons))
    inv = [0] * n_photons
    for u, p in enumerate(perm):
        inv[p] = u
    gates = [_rename_photons(g, inv) for g in circuit.gates()]
    gates += [GateSpec(c, (f"p{q}",)) for c, q in correction.gates()]
    if merge:
        gates = merge_trailing_gates(gates, n_photons)
    out = CircuitDAG(n_emitters, n_photons)
    for g in gates:
        if g.kind == COMPOSITE:
            out.add_measurement(g.wires[0], g.wires[1], g.correction)
        else:
            out.add_gate(g)
    return out


def alternative_targets(g, budget=None, ordering="identity", n_orderings=8, orbit_mode="isoclass", seed=None):
    """Orbit members of ``g`` under each emission ordering, identity first.

    Entries replay from ``g``: complement along the sequence, then relabel.
    """
    if budget is not None and budget < 1:
        raise PipelineError("orbit", f"alternative budget must be positive, got {budget}")
    bare = g.bare()
    try:
        orbit = lc_orbit(bare, max_entries=budget, mode=orbit_mode)
    except EmitGraphError as exc:
        raise PipelineError("orbit", str(exc)) from exc
    out = []
    for entry in orbit:
        if ordering == "identity":
            perms = [tuple(range(g.n))]
        else:
            try:
                perms = [r.relabeling for r in relabelings(entry.graph, ordering, k=n_orderings, seed=seed)]
            except EmitGraphError as exc:
                raise PipelineError("ordering", str(exc)) from exc
        for p in perms:
            out.append(OrbitEntry(entry.graph.relabel(p), entry.complementation_sequence, tuple(p)))
            if budget is not None and len(out) >= budget:
                return out
    return out


class AlternateTargetSolver(BaseSolver):
    """Rank circuits over LC-equivalent targets and emission orderings.

    Parameters
    ----------
    cost : CostFunction or dict, optional
        Defaults to infidelity.
    noise : NoiseModel, optional
    budget : int, optional
        Maximum number of alternatives; unbounded by default.
    ordering : {"identity", "exhaustive", "sampled"}
    n_orderings : int
        Permutations drawn per orbit member in ``sampled`` mode.
    orbit_mode : {"isoclass", "labeled"}
    seed : int, optional
        Only used by ``sampled`` ordering.
    backend : str
        ``auto`` simulates densely up to the dense cap and with the branch
        ensemble above.
    merge : bool
        Fuse the correction into the trailing photon gates.
    """

    def __init__(self, cost=None, noise=None, budget=None, ordering="identity", n_orderings=8,
                 orbit_mode="isoclass", seed=None, backend="auto", merge=True):
        self.cost = cost
        self.noise = noise
        self.budget = budget
        self.ordering = ordering
        self.n_orderings = n_orderings
        self.orbit_mode = orbit_mode
        self.seed = seed
        self.backend = backend
        self.merge = merge

    def _solve(self, target):
        if isinstance(target, CliffordTableau):
            target = stabilizer_to_graph(target)
        if self.ordering not in ("identity", "exhaustive", "sampled"):
            raise ParameterError(f"unknown ordering mode {self.ordering!r}")
        if self.ordering == "sampled" and self.seed is None:
            raise ParameterError("sampled ordering needs a seed")
        cost = as_cost(self.cost)
        noise = as_noise(self.noise)
        tags = LocalCliffordLayer(target.lc_tags)
        bare = target.bare()

        alts = alternative_targets(target, self.budget, self.ordering, self.n_orderings, self.orbit_mode, self.seed)
        self.n_alternatives_ = len(alts)

        candidates = []
        corrections = {}
        for entry in alts:
            try:
                circuit, ne = time_reversed_solve(entry.graph)
            except EmitGraphError as exc:
                raise PipelineError("synthesis", str(exc)) from exc
            seq = entry.complementation_sequence
            if seq not in corrections:
                try:
                    corrections[seq] = lc_correction(seq, bare).then(tags)
                except EmitGraphError as exc:
                    raise PipelineError("correction", str(exc)) from exc
            corr = corrections[seq]
            full = corrected_circuit(entry, circuit, corr, target.n, ne, self.merge)
            candidates.append(CandidateCircuit(full, corr, provenance=entry))

        candidates = dedupe_circuits(candidates)
        self.n_unique_ = len(candidates)
        for cand in candidates:
            try:
                cand.metrics, cand.cost, cand.state = score(cand.circuit, target, cost, noise, self.backend)
            except EmitGraphError as exc:
                raise PipelineError("simulate", str(exc)) from exc
        return SolverResult(candidates)


def solve_alternates(target, **params):
    """Functional form of :class:`AlternateTargetSolver`; returns the :class:`SolverResult`."""
    return AlternateTargetSolver(**params).fit(target).result_


__all__ = [
    "AlternateTargetSolver",
    "alternative_targets",
    "corrected_circuit",
    "dedupe_circuits",
    "merge_trailing_gates",
    "solve_alternates",
]
