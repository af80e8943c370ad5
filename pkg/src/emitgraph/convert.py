"""
Conversions between graph, stabilizer and density-matrix representations.
"""

import numpy as np

from . import densitymat as dm
from .densitymat import DENSE_CAP, DensityMatrix, check_capacity
from .exceptions import ConversionMismatchError, ParameterError
from .graphstate import GraphState, canonical_word, gates_matrix, word_to_gates
from .tableau import CliffordTableau, MixedStabilizerState


def graph_to_stabilizer(g):
    """Tableau with stabilizers ``X_j prod_{k in N(j)} Z_k`` and destabilizers ``Z_j``.

    Local-Clifford tags of ``g`` are applied as gates afterwards.
    """
    n = g.n
    eye = np.eye(n, dtype=np.uint8)
    x = np.vstack([np.zeros((n, n), np.uint8), eye])
    z = np.vstack([eye, np.array(g.adjacency_matrix(), dtype=np.uint8)])
    t = CliffordTableau(x, z)
    for node, word in sorted(g.lc_tags.items()):
        for letter in word_to_gates(word):
            t.apply(letter, (node,))
    return t


def graph_to_density(g, allow_large=False):
    return dm.from_graph(g, allow_large=allow_large)


def _pauli_on_vector(psi, n, x, z, exponent):
    """Apply ``i**exponent * P(x, z)`` to a state vector (qubit 0 is the MSB)."""
    idx = np.arange(2 ** n)
    shifts = n - 1 - np.arange(n)
    xmask = int(np.sum(x.astype(np.int64) << shifts))
    zbits = (idx[:, None] >> shifts[None, :]) & z[None, :].astype(np.int64)
    zsign = 1 - 2 * (zbits.sum(axis=1) & 1)
    # Y = i X Z, so P(x, z) = i**(#Y) X^x Z^z
    e = (int(exponent) + int(np.sum(x & z))) % 4
    out = np.empty_like(psi)
    out[idx ^ xmask] = psi * zsign
    return out * (1j ** e)


def stabilizer_to_statevector(t, allow_large=False):
    """State vector of a pure stabilizer state, fixed up to a global phase."""
    n = t.n
    check_capacity(n, allow_large)
    rng = np.random.default_rng(12345)
    psi = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    for k in range(n, 2 * n):
        e = 2 * int(t.rphase[k]) + int(t.iphase[k])
        psi = 0.5 * (psi + _pauli_on_vector(psi, n, t.x[k], t.z[k], e))
    norm = np.linalg.norm(psi)
    if norm < 1e-8:
        raise ConversionMismatchError("stabilizer generators do not define a state")
    psi = psi / norm
    k = int(np.argmax(np.abs(psi)))
    return psi * (abs(psi[k]) / psi[k])


def stabilizer_to_density(t, allow_large=False):
    """``rho = 2**-n prod_j (I + R_j)`` for a pure tableau or a branch ensemble."""
    if isinstance(t, MixedStabilizerState):
        check_capacity(t.n, allow_large)
        mat = np.zeros((2 ** t.n, 2 ** t.n), complex)
        for p, branch in t.branches:
            psi = stabilizer_to_statevector(branch, allow_large)
            mat += p * np.outer(psi, psi.conj())
        return DensityMatrix(mat, allow_large=allow_large)
    psi = stabilizer_to_statevector(t, allow_large)
    return DensityMatrix.from_statevector(psi, allow_large=allow_large)


def pair_negativities(rho):
    """Algorithm-1 negativity for every pair ``(i, j)``, ``i < j``.

    All other qubits are measured in Z; the negativity of the conditional
    two-qubit state is averaged over outcomes with Born weights.  Averaging
    the negativity rather than the post-measurement states matters: the
    average state of a graph-state edge is separable.
    """
    n = rho.n
    mat = rho.mat.reshape((2,) * (2 * n))
    out = {}
    for i in range(n):
        for j in range(i + 1, n):
            rest = [q for q in range(n) if q not in (i, j)]
            # diagonal in the measured qubits: einsum-free by gathering blocks
            order = rest + [i, j] + [n + q for q in rest] + [n + i, n + j]
            t = np.transpose(mat, order).reshape(2 ** (n - 2), 4, 2 ** (n - 2), 4)
            blocks = t[np.arange(2 ** (n - 2)), :, np.arange(2 ** (n - 2)), :]
            probs = np.real(np.einsum("kaa->k", blocks))
            keep = probs > 1e-14
            if not keep.any():
                out[(i, j)] = 0.0
                continue
            normed = blocks[keep] / probs[keep, None, None]
            negs = dm.batch_negativity(normed)
            out[(i, j)] = float(np.sum(probs[keep] * negs) / np.sum(probs[keep]))
    return out


def density_to_graph(rho, delta=0.49, verify=True, atol=1e-8):
    """Recover the graph of a graph-state density matrix from pair negativities.

    Raises :class:`ConversionMismatchError` if the reconstructed graph state
    does not reproduce ``rho`` (fidelity below ``1 - atol``).
    """
    if not 0.49 <= delta <= 0.5:
        raise ParameterError(f"negativity threshold must lie in [0.49, 0.5], got {delta}")
    n = rho.n
    if n == 1:
        edges = []
    else:
        # tolerance keeps delta = 0.5 usable against rounding in the eigenvalues
        edges = [pair for pair, neg in pair_negativities(rho).items() if neg >= delta - 1e-9]
    g = GraphState(n, edges)
    if verify:
        psi = dm._statevector_from_graph(n, g.edges)
        tr = rho.trace()
        fid = float(np.real(psi.conj() @ rho.mat @ psi)) / tr if tr > 0 else 0.0
        if fid < 1 - atol:
            raise ConversionMismatchError(
                f"input is not the graph state of the recovered graph (fidelity {fid:.6g})"
            )
    return g


def density_to_stabilizer(rho, delta=0.49):
    return graph_to_stabilizer(density_to_graph(rho, delta))


def stabilizer_to_graph(t):
    """Graph state plus local-Clifford tags equal to the stabilizer state ``t``.

    The X part of the generators is row-reduced; a Hadamard on every qubit
    without an X pivot makes the X block invertible.  After reducing it to the
    identity, ``Sdag`` clears Y entries on the diagonal and ``Z`` fixes
    negative signs.  Tags record the inverse of those per-qubit gates.
    """
    if isinstance(t, GraphState):
        raise TypeError("expected a tableau")
    work = t.copy()
    n = work.n
    applied = {q: [] for q in range(n)}
    pivots = work._eliminate(range(n))
    pivot_qubits = {col for _, col in pivots}
    for q in range(n):
        if q not in pivot_qubits:
            work.h(q)
            applied[q].append("H")
    pivots = work._eliminate(range(n))
    assert len(pivots) == n, "X block not invertible after Hadamards"
    sx, sz = work.stabilizer_x, work.stabilizer_z
    assert np.array_equal(sx, np.eye(n, dtype=np.uint8))
    for q in range(n):
        if sz[q, q]:
            work.sdg(q)
            applied[q].append("Sdag")
    for q in range(n):
        if work.stabilizer_phase[q]:
            work.pauli_z(q)
            applied[q].append("Z")
    theta = work.stabilizer_z.copy()
    assert np.array_equal(theta, theta.T) and not np.diag(theta).any()
    tags = {}
    for q, gates in applied.items():
        if gates:
            tags[q] = canonical_word(gates_matrix(gates).conj().T)
    return GraphState.from_adjacency(theta, lc_tags=tags)


__all__ = [
    "DENSE_CAP",
    "density_to_graph",
    "density_to_stabilizer",
    "graph_to_density",
    "graph_to_stabilizer",
    "pair_negativities",
    "stabilizer_to_density",
    "stabilizer_to_graph",
    "stabilizer_to_statevector",
]
