"""
Graph backend and the single-qubit Clifford group.

Node IDs are ``0..n-1`` and double as the photon emission slot.  Each node may
carry a local-Clifford tag: a word over ``{H, S}`` applied, in reading order,
to the bare graph state.
"""

import json
from collections import deque
from functools import lru_cache

import numpy as np

from .exceptions import InvalidSizeError, QubitIndexError

# -- single-qubit Clifford group --------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_LETTER_MATRIX = {
    "H": _H,
    "S": _S,
    "Sdag": _S.conj().T,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "I": np.eye(2, dtype=complex),
}


def _phase_key(u):
    """Key of a 2x2 unitary modulo global phase."""
    flat = u.reshape(-1)
    k = int(np.flatnonzero(np.abs(flat) > 1e-9)[0])
    v = flat * (abs(flat[k]) / flat[k])
    return tuple(np.round(v.real, 8)) + tuple(np.round(v.imag, 8))


def word_to_gates(word):
    """Split an ``{H, S}`` word such as ``"HSS"`` into gate names."""
    for c in word:
        if c not in "HS":
            raise ValueError(f"local-Clifford words use only H and S, got {word!r}")
    return list(word)


def word_matrix(word):
    u = np.eye(2, dtype=complex)
    for c in word_to_gates(word):
        u = _LETTER_MATRIX[c] @ u
    return u


def gates_matrix(gates):
    u = np.eye(2, dtype=complex)
    for g in gates:
        u = _LETTER_MATRIX[g] @ u
    return u


@lru_cache(maxsize=None)
def _clifford_table():
    """Breadth-first enumeration of the 24 elements with shortest {H,S} words."""
    table = {}
    queue = deque([""])
    table[_phase_key(np.eye(2, dtype=complex))] = ""
    while queue:
        w = queue.popleft()
        for c in "HS":
            nw = w + c
            k = _phase_key(word_matrix(nw))
            if k not in table:
                table[k] = nw
                queue.append(nw)
    return table


def clifford_elements():
    """Canonical words of all 24 single-qubit Cliffords, shortest first."""
    return sorted(_clifford_table().values(), key=lambda w: (len(w), w))


def canonical_word(u):
    """Canonical ``{H, S}`` word of a single-qubit Clifford given as a matrix."""
    try:
        return _clifford_table()[_phase_key(np.asarray(u, dtype=complex))]
    except KeyError:
        raise ValueError("matrix is not a single-qubit Clifford") from None


def simplify_gates(gates):
    """Canonical word equivalent (up to phase) to a sequence of gate names."""
    return canonical_word(gates_matrix(gates))


def compose_words(first, second):
    """Word for applying ``first`` and then ``second``."""
    return canonical_word(word_matrix(second) @ word_matrix(first))


def inverse_word(word):
    return canonical_word(word_matrix(word).conj().T)


class LocalCliffordLayer:
    """Per-qubit single-qubit Clifford assignments as canonical ``{H, S}`` words."""

    def __init__(self, words=None):
        self.words = {}
        for q, w in (words or {}).items():
            w = canonical_word(word_matrix(w))
            if w:
                self.words[int(q)] = w

    def __getitem__(self, q):
        return self.words.get(q, "")

    def __eq__(self, other):
        return isinstance(other, LocalCliffordLayer) and self.words == other.words

    def __repr__(self):
        return f"LocalCliffordLayer({self.words})"

    def is_identity(self):
        return not self.words

    def gates(self):
        """``(gate, qubit)`` pairs in application order."""
        return [(c, q) for q in sorted(self.words) for c in self.words[q]]

    def then(self, other):
        """Layer that applies ``self`` first and ``other`` second."""
        qubits = set(self.words) | set(other.words)
        return LocalCliffordLayer({q: compose_words(self[q], other[q]) for q in qubits})

    def inverse(self):
        return LocalCliffordLayer({q: inverse_word(w) for q, w in self.words.items()})

    def relabel(self, perm):
        return LocalCliffordLayer({perm[q]: w for q, w in self.words.items()})


# -- graph states ------------------------------------------------------------------


class GraphState:
    """Simple undirected graph with emission-ordered node IDs.

    Instances are treated as immutable values; every operation returns a new
    object.
    """

    __slots__ = ("n", "edges", "lc_tags", "_adj")

    def __init__(self, n, edges=(), lc_tags=None):
        n = int(n)
        if n < 1:
            raise InvalidSizeError(f"a graph needs at least one node, got {n}")
        norm = set()
        for e in edges:
            i, j = (int(v) for v in e)
            if not (0 <= i < n and 0 <= j < n):
                raise QubitIndexError(f"edge ({i}, {j}) has an endpoint outside 0..{n - 1}")
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            norm.add((min(i, j), max(i, j)))
        self.n = n
        self.edges = frozenset(norm)
        tags = {}
        for node, w in (lc_tags or {}).items():
            node = int(node)
            if not 0 <= node < n:
                raise QubitIndexError(f"tag on unknown node {node}")
            w = canonical_word(word_matrix(w))
            if w:
                tags[node] = w
        self.lc_tags = tags
        self._adj = None

    # constructors

    @classmethod
    def from_adjacency(cls, mat, lc_tags=None):
        mat = np.asarray(mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidSizeError("adjacency matrix must be square")
        if not np.array_equal(mat, mat.T):
            raise ValueError("adjacency matrix must be symmetric")
        if np.any(np.diag(mat)):
            raise ValueError("adjacency matrix must have a zero diagonal")
        i, j = np.nonzero(np.triu(mat, 1))
        return cls(mat.shape[0], zip(i.tolist(), j.tolist()), lc_tags)

    @classmethod
    def from_masks(cls, masks):
        n = len(masks)
        return cls(n, ((i, j) for i in range(n) for j in range(i + 1, n) if masks[i] >> j & 1))

    @classmethod
    def from_networkx(cls, graph):
        nodes = sorted(graph.nodes())
        if nodes != list(range(len(nodes))):
            raise ValueError("networkx graph nodes must be the integers 0..n-1")
        return cls(len(nodes), graph.edges())

    # views

    def adjacency_matrix(self):
        if self._adj is None:
            a = np.zeros((self.n, self.n), dtype=np.uint8)
            for i, j in self.edges:
                a[i, j] = a[j, i] = 1
            a.setflags(write=False)
            self._adj = a
        return self._adj

    def masks(self):
        """Neighbourhoods as integer bit masks (bit ``j`` set if ``j`` is a neighbour)."""
        m = [0] * self.n
        for i, j in self.edges:
            m[i] |= 1 << j
            m[j] |= 1 << i
        return tuple(m)

    def neighbors(self, v):
        self._check_node(v)
        return sorted({j for i, j in self.edges if i == v} | {i for i, j in self.edges if j == v})

    def edge_list(self):
        return sorted(self.edges)

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edge_list())
        return g

    def bare(self):
        """Same graph without local-Clifford tags."""
        return GraphState(self.n, self.edges)

    def _check_node(self, v):
        if not 0 <= v < self.n:
            raise QubitIndexError(f"unknown node {v}")

    # value semantics

    def __eq__(self, other):
        if not isinstance(other, GraphState):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges and self.lc_tags == other.lc_tags

    def __hash__(self):
        return hash((self.n, self.edges, tuple(sorted(self.lc_tags.items()))))

    def __repr__(self):
        tags = f", lc_tags={self.lc_tags}" if self.lc_tags else ""
        return f"GraphState(n={self.n}, edges={self.edge_list()}{tags})"

    # operations

    def local_complement(self, v):
        return local_complement(self, v)

    def relabel(self, perm):
        """Node ``u`` becomes node ``perm[u]``."""
        perm = [int(p) for p in perm]
        if sorted(perm) != list(range(self.n)):
            raise ValueError("relabeling must be a permutation of 0..n-1")
        return GraphState(
            self.n,
            ((perm[i], perm[j]) for i, j in self.edges),
            {perm[k]: w for k, w in self.lc_tags.items()},
        )

    # JSON

    def to_dict(self):
        return {
            "n": self.n,
            "edges": [list(e) for e in self.edge_list()],
            "lc_tags": {str(k): w for k, w in sorted(self.lc_tags.items())},
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        return cls(data["n"], data.get("edges", []), {int(k): w for k, w in data.get("lc_tags", {}).items()})

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def from_edges(n, edges):
    return GraphState(n, edges)


def adjacency_matrix(g):
    return g.adjacency_matrix()


def complement_masks(masks, v):
    """Local complementation on bit-mask adjacency."""
    nb = masks[v]
    out = list(masks)
    u_bits = nb
    while u_bits:
        low = u_bits & -u_bits
        u = low.bit_length() - 1
        out[u] ^= nb & ~low
        u_bits ^= low
    return tuple(out)


def local_complement(g, v):
    """Toggle every edge between two neighbours of ``v``.

    Local-Clifford tags are carried over unchanged; see
    :func:`emitgraph.graphops.lc_correction` for the state-level bookkeeping.
    """
    g._check_node(v)
    masks = complement_masks(g.masks(), v)
    out = GraphState.from_masks(masks)
    if g.lc_tags:
        out = GraphState(out.n, out.edges, g.lc_tags)
    return out


# -- standard families ----------------------------------------------------------------


def linear_cluster(n):
    return GraphState(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(n, center=0):
    return GraphState(n, [(center, j) for j in range(n) if j != center])


def complete_graph(n):
    return GraphState(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def lattice_cluster(dims):
    """Cluster state on a rectangular lattice; the last axis varies fastest."""
    import itertools

    coords = list(itertools.product(*[range(d) for d in dims]))
    index = {c: k for k, c in enumerate(coords)}
    edges = []
    for c in coords:
        for axis in range(len(dims)):
            nxt = list(c)
            nxt[axis] += 1
            nxt = tuple(nxt)
            if nxt in index:
                edges.append((index[c], index[nxt]))
    return GraphState(len(coords), edges)


def repeater_graph(m):
    """All-photonic repeater graph: ``2m`` fully connected core nodes, one leaf each.

    Emission order alternates leaf, core: leaf of core ``a`` is node ``2a`` and
    core ``a`` is node ``2a + 1``.
    """
    if m < 1:
        raise InvalidSizeError("repeater graph needs m >= 1")
    k = 2 * m
    edges = [(2 * a, 2 * a + 1) for a in range(k)]
    edges += [(2 * a + 1, 2 * b + 1) for a in range(k) for b in range(a + 1, k)]
    return GraphState(2 * k, edges)
