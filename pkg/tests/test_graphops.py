import io
import itertools
import math

import networkx as nx
import numpy as np
import pytest

from emitgraph import densitymat as dm
from emitgraph.exceptions import CapacityError, QubitIndexError
from emitgraph.graphops import (
    OrbitEntry,
    check_lc_equivalence,
    dump_orbit,
    lc_correction,
    lc_orbit,
    load_orbit,
    orbit_size,
    relabelings,
)
from emitgraph.graphstate import GraphState, complete_graph, linear_cluster, star_graph
from emitgraph.metrics import fidelity_dense

from conftest import random_graph


def _brute_orbit(g):
    """Closure under complementation with plain edge sets."""
    start = g.edges
    seen, todo = {start}, [start]
    while todo:
        cur = GraphState(g.n, todo.pop())
        for v in range(g.n):
            nxt = cur.local_complement(v).edges
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def _apply_layer(rho, layer):
    for letter, q in layer.gates():
        rho = dm.apply_unitary(rho, letter, (q,))
    return rho


def test_small_orbits():
    edge = GraphState(2, [(0, 1)])
    assert len(lc_orbit(edge)) == 1
    tri = complete_graph(3)
    orbit = lc_orbit(tri)
    assert {e.graph.edges for e in orbit} == {
        tri.edges,
        frozenset({(0, 1), (1, 2)}),
        frozenset({(0, 1), (0, 2)}),
        frozenset({(0, 2), (1, 2)}),
    }
    assert len(lc_orbit(tri, mode="isoclass")) == 2


def test_orbit_matches_brute_force(rng):
    for _ in range(15):
        g = random_graph(rng, int(rng.integers(2, 7)))
        orbit = lc_orbit(g)
        assert {e.graph.edges for e in orbit} == _brute_orbit(g)
        for e in orbit:
            assert e.replay(g) == e.graph
        classes = {nx.weisfeiler_lehman_graph_hash(e.graph.to_networkx()) for e in orbit}
        assert len(lc_orbit(g, mode="isoclass")) >= len(classes)


def test_orbit_truncation_and_io():
    g = linear_cluster(5)
    orbit = lc_orbit(g, max_entries=10)
    assert len(orbit) == 10 and orbit.truncated
    assert not lc_orbit(g).truncated
    assert orbit_size(g) == 30
    buf = io.StringIO()
    dump_orbit(orbit, buf)
    buf.seek(0)
    back = load_orbit(buf)
    assert [(e.graph, e.complementation_sequence) for e in back] == [(e.graph, e.complementation_sequence) for e in orbit]
    assert all(e.replay(g) == e.graph for e in back)
    with pytest.raises(ValueError):
        lc_orbit(g, mode="fuzzy")


def test_lc_correction_examples():
    g = linear_cluster(3)
    assert lc_correction((), g).is_identity
    target = dm.from_graph(g)
    for seq in [(1,), (1, 1), (0, 1, 2), (2, 0)]:
        other = g
        for v in seq:
            other = other.local_complement(v)
        out = _apply_layer(dm.from_graph(other), lc_correction(seq, g))
        assert fidelity_dense(out, target) == pytest.approx(1.0, abs=1e-10)
    # complementation is an involution at the state level too
    assert lc_correction((1, 1), g).is_identity
    with pytest.raises(QubitIndexError):
        lc_correction((7,), g)


def test_lc_correction_random(rng):
    for _ in range(50):
        g = random_graph(rng, int(rng.integers(2, 7)))
        seq = tuple(int(v) for v in rng.integers(g.n, size=int(rng.integers(1, 5))))
        entry = OrbitEntry(g, seq).replay(g)
        out = _apply_layer(dm.from_graph(entry), lc_correction(seq, g))
        assert fidelity_dense(out, dm.from_graph(g)) == pytest.approx(1.0, abs=1e-10)


def _brute_labelings(g):
    return {g.relabel(p).edges for p in itertools.permutations(range(g.n))}


def test_relabelings():
    assert len(relabelings(linear_cluster(3))) == 3
    assert len(relabelings(complete_graph(5))) == 1
    assert len(relabelings(GraphState(4))) == 1
    assert relabelings(linear_cluster(4))[0].relabeling == (0, 1, 2, 3)
    with pytest.raises(CapacityError):
        relabelings(linear_cluster(10))


def test_relabeling_counts_divide(rng):
    for _ in range(10):
        g = random_graph(rng, int(rng.integers(1, 7)))
        count = len(relabelings(g))
        assert count == len(_brute_labelings(g))
        assert math.factorial(g.n) % count == 0


def test_sampled_relabelings():
    g = linear_cluster(7)
    a = relabelings(g, "sampled", k=20, seed=3)
    assert a == relabelings(g, "sampled", k=20, seed=3)
    assert a[0].relabeling == tuple(range(7))
    assert len(a) <= 20
    with pytest.raises(ValueError):
        relabelings(g, "sampled")


def test_check_lc_equivalence():
    g = random_graph(np.random.default_rng(3), 6)
    res = check_lc_equivalence(g, g.local_complement(2))
    assert res and OrbitEntry(g, res.sequence).replay(g) == g.local_complement(2)
    res = check_lc_equivalence(linear_cluster(3), complete_graph(3))
    assert res and OrbitEntry(None, res.sequence).replay(linear_cluster(3)) == complete_graph(3)
    p4, s4 = linear_cluster(4), star_graph(4)
    res = check_lc_equivalence(p4, s4)
    assert bool(res) == (s4.edges in _brute_orbit(p4))
    assert not res and res.conclusive
    assert not check_lc_equivalence(p4, s4, budget=3).conclusive
