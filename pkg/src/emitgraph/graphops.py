"""
Exploration of equivalent targets: local-complementation orbits, the
single-qubit corrections they imply, emission-order relabelings and
LC-equivalence checks.
"""

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .exceptions import CapacityError, QubitIndexError
from .graphstate import GraphState, LocalCliffordLayer, canonical_word, complement_masks

RELABEL_GUARD = 9


@dataclass(frozen=True)
class OrbitEntry:
    """A graph reached from an original target.

    Replaying ``complementation_sequence`` on the original and then moving
    node ``u`` to ``relabeling[u]`` gives ``graph``.
    """

    graph: GraphState
    complementation_sequence: tuple = ()
    relabeling: tuple = None

    def replay(self, original):
        g = original
        for v in self.complementation_sequence:
            g = g.local_complement(v)
        if self.relabeling is not None:
            g = g.relabel(self.relabeling)
        return g

    def to_dict(self):
        return {
            "graph": self.graph.to_dict(),
            "complementation_sequence": list(self.complementation_sequence),
            "relabeling": list(self.relabeling) if self.relabeling is not None else list(range(self.graph.n)),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(GraphState.from_dict(d["graph"]), tuple(d["complementation_sequence"]), tuple(d["relabeling"]))


class Orbit(list):
    """List of :class:`OrbitEntry` with a ``truncated`` flag and the dedup ``mode``."""

    def __init__(self, entries=(), truncated=False, mode="labeled"):
        super().__init__(entries)
        self.truncated = truncated
        self.mode = mode


def certificate(masks):
    """Canonical-labeling certificate of a graph given as neighbourhood masks."""
    import pynauty

    n = len(masks)
    adj = {i: [j for j in range(n) if masks[i] >> j & 1] for i in range(n)}
    return pynauty.certificate(pynauty.Graph(n, adjacency_dict=adj))


def lc_orbit(g, max_entries=None, mode="labeled"):
    """Breadth-first closure of ``g`` under single-node local complementation.

    Parameters
    ----------
    g : GraphState
    max_entries : int, optional
        Stop after this many entries; the result then has ``truncated=True``.
    mode : {"labeled", "isoclass"}
        ``labeled`` keeps every distinct labeled graph.  ``isoclass`` keeps
        one labeled representative per isomorphism class and only expands
        representatives; since complementation commutes with relabeling this
        still reaches every class.

    Returns
    -------
    Orbit
        Entries in discovery order, each with the complementation sequence
        that produces it from ``g``.
    """
    if mode not in ("labeled", "isoclass"):
        raise ValueError(f"mode must be 'labeled' or 'isoclass', got {mode!r}")
    if max_entries is not None and max_entries < 1:
        raise ValueError("max_entries must be positive")
    n = g.n
    start = g.masks()
    parent = {start: None}
    seen_cert = {certificate(start)} if mode == "isoclass" else None
    order = [start]
    queue = deque([start])
    truncated = False
    while queue and not truncated:
        cur = queue.popleft()
        for v in range(n):
            if not cur[v]:
                continue
            nxt = complement_masks(cur, v)
            if nxt in parent:
                continue
            if seen_cert is not None:
                cert = certificate(nxt)
                if cert in seen_cert:
                    continue
                seen_cert.add(cert)
            if max_entries is not None and len(order) >= max_entries:
                truncated = True
                break
            parent[nxt] = (cur, v)
            order.append(nxt)
            queue.append(nxt)

    entries = []
    seq_cache = {start: ()}
    for masks in order:
        seq = _sequence(masks, parent, seq_cache)
        graph = GraphState.from_masks(masks)
        if g.lc_tags:
            graph = GraphState(n, graph.edges, g.lc_tags)
        entries.append(OrbitEntry(graph, seq))
    return Orbit(entries, truncated, mode)


def _sequence(masks, parent, cache):
    if masks in cache:
        return cache[masks]
    prev, v = parent[masks]
    seq = _sequence(prev, parent, cache) + (v,)
    cache[masks] = seq
    return seq


def orbit_size(g, mode="labeled"):
    return len(lc_orbit(g, mode=mode))


def dump_orbit(entries, fh):
    """Write entries as JSON lines."""
    for e in entries:
        fh.write(json.dumps(e.to_dict()) + "\n")


def load_orbit(fh):
    return [OrbitEntry.from_dict(json.loads(line)) for line in fh if line.strip()]


# -- local-Clifford bookkeeping ---------------------------------------------------------

_SQRT_MINUS_IX = np.array([[1, -1j], [-1j, 1]], dtype=complex) / np.sqrt(2)
_SQRT_IZ = np.diag([np.exp(1j * np.pi / 4), np.exp(-1j * np.pi / 4)])


def lc_step_unitaries(g, v):
    """Per-qubit matrices ``U`` with ``|LC_v(G)> = (prod U) |G>``.

    ``sqrt(-iX)`` on ``v`` and ``sqrt(iZ)`` on each neighbour of ``v``.
    """
    ops = {v: _SQRT_MINUS_IX}
    for u in g.neighbors(v):
        ops[u] = _SQRT_IZ
    return ops


def lc_correction(sequence, g):
    """Single-qubit layer ``L`` with ``L |G_k> = |G>`` after complementing ``g`` along ``sequence``.

    Every step at ``v`` maps the state by ``sqrt(-iX_v) prod_{u in N(v)} sqrt(iZ_u)``
    (neighbourhood taken in the current graph); the correction applies the
    inverses in reverse order.  Words are canonicalized per qubit.
    """
    mats = {q: np.eye(2, dtype=complex) for q in range(g.n)}
    cur = g
    for v in sequence:
        if not 0 <= v < g.n:
            raise QubitIndexError(f"complementation at unknown node {v}")
        for q, u in lc_step_unitaries(cur, v).items():
            # forward map accumulates U_k ... U_1; the correction is its inverse
            mats[q] = u @ mats[q]
        cur = cur.local_complement(v)
    return LocalCliffordLayer({q: canonical_word(m.conj().T) for q, m in mats.items()})


# -- relabelings ---------------------------------------------------------------------------


def _relabel_masks(masks, perm):
    n = len(masks)
    out = [0] * n
    for u in range(n):
        m = masks[u]
        t = 0
        while m:
            low = m & -m
            t |= 1 << perm[low.bit_length() - 1]
            m ^= low
        out[perm[u]] = t
    return tuple(out)


def relabelings(g, mode="exhaustive", k=None, seed=None, guard=RELABEL_GUARD):
    """Distinct emission orderings of ``g``.

    ``exhaustive`` tries all ``n!`` permutations (``n <= guard``) and keeps one
    per distinct labeled graph, so automorphisms collapse.  ``sampled`` draws
    ``k`` distinct permutations with ``seed`` (the identity is always first)
    and then collapses duplicates.
    """
    n = g.n
    masks = g.masks()
    if mode == "exhaustive":
        if n > guard:
            raise CapacityError(f"exhaustive relabeling is limited to n <= {guard}; use sampled mode")
        perms = itertools.permutations(range(n))
    elif mode == "sampled":
        if k is None or k < 1:
            raise ValueError("sampled mode needs k >= 1")
        rng = np.random.default_rng(seed)
        chosen = [tuple(range(n))]
        seen = {chosen[0]}
        budget = min(k, math.factorial(n)) if n <= 20 else k
        while len(chosen) < budget:
            p = tuple(int(x) for x in rng.permutation(n))
            if p not in seen:
                seen.add(p)
                chosen.append(p)
        perms = chosen
    else:
        raise ValueError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")
    out = []
    seen_graphs = set()
    for p in perms:
        m = _relabel_masks(masks, p)
        if m in seen_graphs:
            continue
        seen_graphs.add(m)
        out.append(OrbitEntry(g.relabel(p), (), tuple(p)))
    return out


# -- equivalence -----------------------------------------------------------------------------


@dataclass
class LCEquivalence:
    """Outcome of :func:`check_lc_equivalence`.

    ``equivalent`` is ``True`` with a ``sequence`` mapping the first graph to
    the second, or ``False`` when nothing was found.  ``conclusive`` says
    whether a negative answer is a proof (one side's full orbit was explored).
    """

    equivalent: bool
    sequence: tuple = field(default=None)
    conclusive: bool = True

    def __bool__(self):
        return self.equivalent


def check_lc_equivalence(g1, g2, budget=None):
    """Bidirectional orbit search for a complementation sequence turning ``g1`` into ``g2``."""
    if g1.n != g2.n:
        raise ValueError("graphs have different node counts")
    a, b = g1.masks(), g2.masks()
    if a == b:
        return LCEquivalence(True, ())
    parents = [{a: None}, {b: None}]
    queues = [deque([a]), deque([b])]
    explored = 2
    while queues[0] and queues[1]:
        side = 0 if len(queues[0]) <= len(queues[1]) else 1
        other = 1 - side
        for _ in range(len(queues[side])):
            cur = queues[side].popleft()
            for v in range(g1.n):
                if not cur[v]:
                    continue
                nxt = complement_masks(cur, v)
                if nxt in parents[side]:
                    continue
                parents[side][nxt] = (cur, v)
                if nxt in parents[other]:
                    return LCEquivalence(True, _join(nxt, parents, side))
                queues[side].append(nxt)
                explored += 1
                if budget is not None and explored >= budget:
                    return LCEquivalence(False, None, conclusive=False)
    return LCEquivalence(False, None, conclusive=True)


def _path_to(node, parent):
    seq = []
    while parent[node] is not None:
        prev, v = parent[node]
        seq.append(v)
        node = prev
    return seq[::-1]


def _join(meet, parents, side):
    forward = _path_to(meet, parents[0])
    backward = _path_to(meet, parents[1])
    # complementation is an involution: undo the second side's steps in reverse
    return tuple(forward + backward[::-1])


__all__ = [
    "LCEquivalence",
    "Orbit",
    "OrbitEntry",
    "certificate",
    "check_lc_equivalence",
    "dump_orbit",
    "lc_correction",
    "lc_orbit",
    "lc_step_unitaries",
    "load_orbit",
    "orbit_size",
    "relabelings",
]
