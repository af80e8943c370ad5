"""
Dense density-matrix backend.

Qubit 0 is the most significant bit of the computational-basis index, the same
convention used by every other backend in the package.  States may be
sub-normalized: photon loss multiplies the matrix by the survival probability
instead of enlarging the Hilbert space.
"""

import numpy as np

from .exceptions import (
    CapacityError,
    DegenerateMeasurementError,
    InvalidSizeError,
    ParameterError,
    QubitIndexError,
    UnsupportedGateError,
)

DENSE_CAP = 12

_SQ2 = 1 / np.sqrt(2)
GATE_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "Identity": np.eye(2, dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdag": np.array([[1, 0], [0, -1j]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}
GATE_MATRICES["EmissionCNOT"] = GATE_MATRICES["CNOT"]
PAULI_MATRICES = {k: GATE_MATRICES[k] for k in "IXYZ"}


def check_capacity(n, allow_large=False, cap=DENSE_CAP):
    if n < 1:
        raise InvalidSizeError(f"number of qubits must be >= 1, got {n}")
    if n > cap and not allow_large:
        raise CapacityError(f"dense backend limited to {cap} qubits, requested {n}")


class DensityMatrix:
    """Dense ``2**n x 2**n`` complex density operator.

    Operations below return new objects; the wrapped array is never shared.
    """

    def __init__(self, mat, allow_large=False):
        mat = np.asarray(mat, dtype=complex)
        dim = mat.shape[0]
        n = int(round(np.log2(dim))) if dim > 0 else 0
        if mat.ndim != 2 or mat.shape != (dim, dim) or 2 ** n != dim:
            raise InvalidSizeError(f"expected a 2**n square matrix, got shape {mat.shape}")
        check_capacity(n, allow_large)
        self.n = n
        self.mat = mat

    @classmethod
    def zero_state(cls, n, allow_large=False):
        check_capacity(n, allow_large)
        mat = np.zeros((2 ** n, 2 ** n), dtype=complex)
        mat[0, 0] = 1.0
        return cls(mat, allow_large)

    @classmethod
    def from_statevector(cls, psi, allow_large=False):
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        return cls(np.outer(psi, psi.conj()), allow_large)

    def copy(self):
        return DensityMatrix(self.mat.copy(), allow_large=True)

    def trace(self):
        return float(np.real(np.trace(self.mat)))

    def purity(self):
        return float(np.real(np.trace(self.mat @ self.mat)))

    def is_valid(self, atol=1e-10):
        herm = np.allclose(self.mat, self.mat.conj().T, atol=atol)
        evals = np.linalg.eigvalsh((self.mat + self.mat.conj().T) / 2)
        tr = self.trace()
        return bool(herm and evals.min() >= -atol and 0 < tr <= 1 + 1e-12)

    def __repr__(self):
        return f"DensityMatrix(n={self.n}, trace={self.trace():.6g})"

    def to_csv(self):
        """Debug dump: one line per row, ``re,im`` pairs separated by ``;``."""
        rows = []
        for row in self.mat:
            rows.append(";".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in row))
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text, allow_large=False):
        rows = [ln for ln in text.strip().splitlines() if ln.strip()]
        try:
            mat = [[complex(float(re), float(im)) for re, im in (cell.split(",") for cell in row.split(";"))] for row in rows]
        except ValueError as exc:
            raise ParameterError(f"malformed density-matrix CSV: {exc}") from None
        return cls(np.array(mat, dtype=complex), allow_large=allow_large)


def _check_qubits(n, qubits):
    for q in qubits:
        if not 0 <= q < n:
            raise QubitIndexError(f"qubit {q} out of range for {n} qubits")
    if len(set(qubits)) != len(qubits):
        raise QubitIndexError(f"repeated qubit in {qubits}")


def _apply_operator(mat, n, op, qubits, left=True, right=True):
    """Return ``op rho op^dagger`` for an operator on ``qubits`` (tensor contraction)."""
    k = len(qubits)
    t = mat.reshape((2,) * (2 * n))
    opt = op.reshape((2,) * (2 * k))
    if left:
        t = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), list(qubits)))
        t = np.moveaxis(t, list(range(k)), list(qubits))
    if right:
        cols = [n + q for q in qubits]
        t = np.tensordot(t, opt.conj(), axes=(cols, list(range(k, 2 * k))))
        t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), cols)
    return t.reshape(2 ** n, 2 ** n)


def apply_matrix(rho, op, qubits):
    """Conjugate ``rho`` by an arbitrary operator acting on ``qubits``."""
    qubits = tuple(int(q) for q in qubits)
    _check_qubits(rho.n, qubits)
    return DensityMatrix(_apply_operator(rho.mat, rho.n, op, qubits), allow_large=True)


def apply_unitary(rho, kind, qubits):
    """Apply the named gate to ``qubits`` (control first for two-qubit gates)."""
    try:
        op = GATE_MATRICES[kind]
    except KeyError:
        raise UnsupportedGateError(f"unknown gate {kind!r}") from None
    qubits = tuple(int(q) for q in qubits)
    if op.shape[0] != 2 ** len(qubits):
        raise UnsupportedGateError(f"gate {kind} acts on {op.shape[0].bit_length() - 1} qubits")
    return apply_matrix(rho, op, qubits)


def _check_probability(p, name="probability"):
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {p}")


def apply_pauli_channel(rho, q, weights):
    """``sum_P w_P P rho P`` for ``weights`` keyed by Pauli letters."""
    _check_qubits(rho.n, (q,))
    out = np.zeros_like(rho.mat)
    for letter, w in weights.items():
        if w == 0:
            continue
        if letter == "I":
            out += w * rho.mat
        else:
            out += w * _apply_operator(rho.mat, rho.n, PAULI_MATRICES[letter], (q,))
    return DensityMatrix(out, allow_large=True)


def apply_depolarizing(rho, q, p):
    """``(1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)`` on qubit ``q``."""
    _check_probability(p, "depolarizing probability")
    if p == 0:
        _check_qubits(rho.n, (q,))
        return rho.copy()
    return apply_pauli_channel(rho, q, {"I": 1 - p, "X": p / 3, "Y": p / 3, "Z": p / 3})


def apply_loss(rho, q, p_loss):
    """Keep only the no-loss event: the trace shrinks by ``1 - p_loss``."""
    _check_probability(p_loss, "loss probability")
    _check_qubits(rho.n, (q,))
    return DensityMatrix(rho.mat * (1.0 - p_loss), allow_large=True)


def _projector(n, q, m):
    return np.array([[1, 0], [0, 0]] if m == 0 else [[0, 0], [0, 1]], dtype=complex)


def outcome_probability(rho, q, m):
    _check_qubits(rho.n, (q,))
    diag = np.real(np.diag(rho.mat)).reshape((2,) * rho.n)
    return float(np.take(diag, m, axis=q).sum())


def measure_z_dense(rho, q, rng=None, outcome=None):
    """Projective Z measurement.

    Returns ``(outcome, probability, post_state)``; the post-measurement state
    keeps the branch weight, i.e. its trace equals ``probability`` times the
    input trace.  Use :func:`normalize` for the conditional state.
    """
    _check_qubits(rho.n, (q,))
    tr = rho.trace()
    p1 = outcome_probability(rho, q, 1) / tr
    if outcome is None:
        rng = np.random.default_rng() if rng is None else rng
        outcome = int(rng.random() < p1)
    prob = p1 if outcome else 1 - p1
    if prob <= 1e-15:
        raise DegenerateMeasurementError(f"outcome {outcome} on qubit {q} has probability zero")
    post = _apply_operator(rho.mat, rho.n, _projector(rho.n, q, outcome), (q,))
    return int(outcome), float(prob), DensityMatrix(post, allow_large=True)


def normalize(rho):
    return DensityMatrix(rho.mat / rho.trace(), allow_large=True)


def measure_x_feedforward_reset(rho, emitter, target, correction="X"):
    """Deterministic channel: measure ``emitter`` in X, correct ``target``, reset.

    Both outcomes are kept; outcome 1 has ``correction`` applied to ``target``
    before the emitter returns to ``|0>``.
    """
    _check_qubits(rho.n, (emitter, target))
    h = GATE_MATRICES["H"]
    k0 = np.array([[1, 0], [0, 0]], dtype=complex) @ h  # |0><0| H
    k1 = np.array([[0, 1], [0, 0]], dtype=complex) @ h  # |0><1| H
    branch0 = _apply_operator(rho.mat, rho.n, k0, (emitter,))
    branch1 = _apply_operator(rho.mat, rho.n, k1, (emitter,))
    if correction != "I":
        branch1 = _apply_operator(branch1, rho.n, PAULI_MATRICES[correction], (target,))
    return DensityMatrix(branch0 + branch1, allow_large=True)


def reset_dense(rho, q):
    k0 = np.array([[1, 0], [0, 0]], dtype=complex)
    k1 = np.array([[0, 1], [0, 0]], dtype=complex)
    out = _apply_operator(rho.mat, rho.n, k0, (q,)) + _apply_operator(rho.mat, rho.n, k1, (q,))
    return DensityMatrix(out, allow_large=True)


def partial_trace(rho, keep):
    """Reduced state on the qubits in ``keep`` (returned in ascending order)."""
    keep = sorted(int(q) for q in keep)
    _check_qubits(rho.n, keep)
    n = rho.n
    drop = [q for q in range(n) if q not in keep]
    t = rho.mat.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    col = list(letters[n: 2 * n])
    for q in drop:
        col[q] = row[q]
    out = "".join(row[q] for q in keep) + "".join(col[q] for q in keep)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = 2 ** len(keep)
    return DensityMatrix(red.reshape(d, d), allow_large=True)


def partial_transpose(mat, n, qubits):
    t = mat.reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for q in qubits:
        axes[q], axes[n + q] = axes[n + q], axes[q]
    return t.transpose(axes).reshape(2 ** n, 2 ** n)


def negativity(rho):
    """Two-qubit negativity ``(||rho^{T_B}||_1 - tr rho) / 2``."""
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if mat.shape != (4, 4):
        raise InvalidSizeError(f"negativity needs a 4x4 matrix, got {mat.shape}")
    return float(batch_negativity(mat[None])[0])


def batch_negativity(mats):
    """Negativity of a stack of 4x4 matrices, transposing the second qubit."""
    mats = np.asarray(mats, dtype=complex)
    t = mats.reshape(-1, 2, 2, 2, 2).transpose(0, 1, 4, 3, 2).reshape(-1, 4, 4)
    t = (t + t.conj().transpose(0, 2, 1)) / 2
    evals = np.linalg.eigvalsh(t)
    tr = np.real(np.trace(mats, axis1=1, axis2=2))
    return np.maximum((np.abs(evals).sum(axis=1) - tr) / 2, 0.0)


def _statevector_from_graph(n, edges):
    idx = np.arange(2 ** n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    sign = np.zeros(2 ** n, dtype=np.int64)
    for i, j in edges:
        sign ^= bits[:, i] & bits[:, j]
    return (1 - 2 * sign).astype(complex) / np.sqrt(2 ** n)


def from_graph(g, allow_large=False, cap=DENSE_CAP):
    """``|psi><psi|`` with ``|psi> = prod_{(i,j) in E} CZ_ij |+>^n``.

    Per-node local-Clifford tags of ``g`` are applied afterwards.
    """
    check_capacity(g.n, allow_large, cap)
    psi = _statevector_from_graph(g.n, g.edges)
    rho = DensityMatrix.from_statevector(psi, allow_large=True)
    for node, word in sorted(g.lc_tags.items()):
        for letter in _word_gates(word):
            rho = apply_unitary(rho, letter, (node,))
    return rho


def _word_gates(word):
    # local import keeps densitymat free of a hard dependency cycle
    from .graphstate import word_to_gates

    return word_to_gates(word)
