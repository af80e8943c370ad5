"""
Stabilizer tableau backend.

A state on ``n`` qubits is held as a ``2n x 2n`` binary symplectic matrix split
into an X block and a Z block, plus two phase bit vectors.  Rows ``0..n-1`` are
destabilizer generators and rows ``n..2n-1`` are stabilizer generators.  Row
``k`` encodes the operator

    i**iphase[k] * (-1)**rphase[k] * P_0 (x) P_1 (x) ... (x) P_{n-1}

with the single-qubit letters encoded as I=(0,0), X=(1,0), Y=(1,1), Z=(0,1).

Gate updates are column operations over ``numpy.uint8`` arrays; row products
accumulate phases modulo 4 so that the ``i`` factor is tracked exactly.  With
Y encoded as (1,1) every row stays Hermitian under Clifford conjugation, so an
``i`` phase can only appear through a row product.  Stabilizer rows never carry
one.
"""

import numpy as np

from .exceptions import (
    DegenerateMeasurementError,
    InvalidSizeError,
    ParameterError,
    QubitIndexError,
    UnsupportedGateError,
)

PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
BITS_PAULI = {v: k for k, v in PAULI_BITS.items()}

SINGLE_QUBIT_KINDS = frozenset({"I", "H", "X", "Y", "Z", "S", "Sdag"})
TWO_QUBIT_KINDS = frozenset({"CNOT", "CZ"})
_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def pauli_to_bits(letters):
    """Return ``(x, z)`` uint8 vectors for a Pauli word such as ``"XZI"``."""
    try:
        pairs = [PAULI_BITS[c] for c in letters]
    except KeyError as exc:
        raise ValueError(f"not a Pauli letter: {exc.args[0]!r}") from None
    if not pairs:
        return np.zeros(0, np.uint8), np.zeros(0, np.uint8)
    x, z = zip(*pairs)
    return np.array(x, dtype=np.uint8), np.array(z, dtype=np.uint8)


def bits_to_pauli(x, z):
    return "".join(BITS_PAULI[(int(a), int(b))] for a, b in zip(x, z))


def _g(x1, z1, x2, z2):
    """Exponent of ``i`` picked up when multiplying Pauli ``(x1,z1)`` by ``(x2,z2)``.

    Elementwise over integer arrays; sum along the qubit axis for whole rows.
    """
    x1 = x1.astype(np.int8)
    z1 = z1.astype(np.int8)
    x2 = x2.astype(np.int8)
    z2 = z2.astype(np.int8)
    y_case = x1 & z1
    x_case = x1 & (1 - z1)
    z_case = (1 - x1) & z1
    return (
        y_case * (z2 - x2)
        + x_case * (z2 * (2 * x2 - 1))
        + z_case * (x2 * (1 - 2 * z2))
    )


def pauli_product(x1, z1, e1, x2, z2, e2):
    """Multiply ``i**e1 P1`` by ``i**e2 P2``; returns ``(x, z, e)`` with ``e`` mod 4."""
    e = (int(e1) + int(e2) + int(_g(x1, z1, x2, z2).sum())) % 4
    return x1 ^ x2, z1 ^ z2, e


class CliffordTableau:
    """Destabilizer/stabilizer tableau of a pure ``n``-qubit stabilizer state.

    Parameters
    ----------
    x, z : ndarray of shape (2n, n)
        X and Z blocks; rows ``0..n-1`` are destabilizers.
    rphase, iphase : ndarray of shape (2n,)
        Sign bit and ``i`` bit of every row.
    """

    __slots__ = ("n", "x", "z", "rphase", "iphase")

    def __init__(self, x, z, rphase=None, iphase=None):
        x = np.asarray(x, dtype=np.uint8) & 1
        z = np.asarray(z, dtype=np.uint8) & 1
        if x.ndim != 2 or x.shape != z.shape or x.shape[0] != 2 * x.shape[1]:
            raise InvalidSizeError(f"tableau blocks must be 2n x n, got {x.shape} and {z.shape}")
        self.n = x.shape[1]
        if self.n < 1:
            raise InvalidSizeError("a tableau needs at least one qubit")
        self.x = x.copy()
        self.z = z.copy()
        rows = 2 * self.n
        self.rphase = np.zeros(rows, np.uint8) if rphase is None else np.asarray(rphase, np.uint8).copy() & 1
        self.iphase = np.zeros(rows, np.uint8) if iphase is None else np.asarray(iphase, np.uint8).copy() & 1

    @classmethod
    def zero_state(cls, n):
        if n < 1:
            raise InvalidSizeError(f"number of qubits must be >= 1, got {n}")
        eye = np.eye(n, dtype=np.uint8)
        zero = np.zeros((n, n), dtype=np.uint8)
        return cls(np.vstack([eye, zero]), np.vstack([zero, eye]))

    def copy(self):
        new = object.__new__(CliffordTableau)
        new.n = self.n
        new.x = self.x.copy()
        new.z = self.z.copy()
        new.rphase = self.rphase.copy()
        new.iphase = self.iphase.copy()
        return new

    # -- views ------------------------------------------------------------------

    @property
    def stabilizer_x(self):
        return self.x[self.n:]

    @property
    def stabilizer_z(self):
        return self.z[self.n:]

    @property
    def stabilizer_phase(self):
        return self.rphase[self.n:]

    def row_string(self, k):
        e = int(2 * self.rphase[k] + self.iphase[k])
        return _PHASE_PREFIX[e] + bits_to_pauli(self.x[k], self.z[k])

    def stabilizers(self):
        """Signed stabilizer generators as strings, e.g. ``['+XZ', '+ZX']``."""
        return [self.row_string(k) for k in range(self.n, 2 * self.n)]

    def destabilizers(self):
        return [self.row_string(k) for k in range(self.n)]

    def __eq__(self, other):
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
            and np.array_equal(self.rphase, other.rphase)
            and np.array_equal(self.iphase, other.iphase)
        )

    def __repr__(self):
        return f"CliffordTableau(n={self.n}, stabilizers={self.stabilizers()})"

    def key(self):
        """Hashable byte key of the full tableau (use on canonical forms)."""
        return (
            self.n,
            np.packbits(self.x).tobytes()
            + np.packbits(self.z).tobytes()
            + np.packbits(self.rphase).tobytes()
            + np.packbits(self.iphase).tobytes(),
        )

    # -- gates (in place) -------------------------------------------------------

    def _check(self, *qubits):
        for q in qubits:
            if not 0 <= q < self.n:
                raise QubitIndexError(f"qubit {q} out of range for {self.n} qubits")

    def h(self, q):
        self._check(q)
        xq = self.x[:, q].copy()
        zq = self.z[:, q]
        self.rphase ^= xq & zq
        self.x[:, q] = zq
        self.z[:, q] = xq
        return self

    def s(self, q):
        self._check(q)
        xq = self.x[:, q]
        self.rphase ^= xq & self.z[:, q]
        self.z[:, q] ^= xq
        return self

    def sdg(self, q):
        self._check(q)
        xq = self.x[:, q]
        self.rphase ^= xq & (self.z[:, q] ^ 1)
        self.z[:, q] ^= xq
        return self

    def pauli_x(self, q):
        self._check(q)
        self.rphase ^= self.z[:, q]
        return self

    def pauli_y(self, q):
        self._check(q)
        self.rphase ^= self.x[:, q] ^ self.z[:, q]
        return self

    def pauli_z(self, q):
        self._check(q)
        self.rphase ^= self.x[:, q]
        return self

    def cnot(self, c, t):
        self._check(c, t)
        if c == t:
            raise QubitIndexError("control and target coincide")
        xc, zt = self.x[:, c], self.z[:, t]
        self.rphase ^= xc & zt & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= xc
        self.z[:, c] ^= zt
        return self

    def cz(self, a, b):
        self._check(a, b)
        if a == b:
            raise QubitIndexError("CZ operands coincide")
        xa, xb = self.x[:, a], self.x[:, b]
        self.rphase ^= xa & xb & (self.z[:, a] ^ self.z[:, b])
        self.z[:, a] ^= xb
        self.z[:, b] ^= xa
        return self

    def apply(self, kind, qubits):
        """Apply a Clifford gate in place; ``qubits`` is a sequence of indices."""
        fn = _GATE_METHODS.get(kind)
        if fn is None:
            raise UnsupportedGateError(f"gate {kind!r} is not a supported Clifford gate")
        fn(self, *qubits)
        return self

    def apply_pauli(self, letter, q):
        if letter == "X":
            self.pauli_x(q)
        elif letter == "Y":
            self.pauli_y(q)
        elif letter == "Z":
            self.pauli_z(q)
        elif letter != "I":
            raise ValueError(f"not a Pauli letter: {letter!r}")
        return self

    # -- row algebra ------------------------------------------------------------

    def _rowmul(self, targets, p):
        """Replace each row ``h`` in ``targets`` by ``row_p * row_h``."""
        if len(targets) == 0:
            return
        x1, z1 = self.x[p], self.z[p]
        x2, z2 = self.x[targets], self.z[targets]
        g = _g(x1[None, :], z1[None, :], x2, z2).sum(axis=1)
        e = (
            2 * int(self.rphase[p]) + int(self.iphase[p])
            + 2 * self.rphase[targets].astype(np.int64) + self.iphase[targets]
            + g
        ) % 4
        self.iphase[targets] = e & 1
        self.rphase[targets] = (e >> 1) & 1
        self.x[targets] = x2 ^ x1
        self.z[targets] = z2 ^ z1

    def _copy_row(self, src, dst):
        self.x[dst] = self.x[src]
        self.z[dst] = self.z[src]
        self.rphase[dst] = self.rphase[src]
        self.iphase[dst] = self.iphase[src]

    def _swap_rows(self, a, b):
        if a == b:
            return
        for arr in (self.x, self.z):
            arr[[a, b]] = arr[[b, a]]
        for arr in (self.rphase, self.iphase):
            arr[[a, b]] = arr[[b, a]]

    # -- measurement --------------------------------------------------------------

    def peek_z(self, q):
        """Return the deterministic Z outcome of ``q`` or ``None`` if random."""
        self._check(q)
        n = self.n
        if self.x[n:, q].any():
            return None
        e, xs, zs = 0, np.zeros(n, np.uint8), np.zeros(n, np.uint8)
        for d in np.flatnonzero(self.x[:n, q]):
            k = n + d
            xs, zs, e = pauli_product(
                self.x[k], self.z[k], 2 * int(self.rphase[k]) + int(self.iphase[k]), xs, zs, e
            )
        return e >> 1

    def measure_z(self, q, rng=None, outcome=None):
        """Measure qubit ``q`` in Z in place.

        Returns ``(outcome, deterministic)``.  ``outcome`` forces the result of
        a random measurement (post-selection); forcing an impossible outcome of
        a deterministic measurement raises :class:`DegenerateMeasurementError`.
        """
        self._check(q)
        n = self.n
        hits = np.flatnonzero(self.x[n:, q])
        if hits.size == 0:
            value = self.peek_z(q)
            if outcome is not None and int(outcome) != value:
                raise DegenerateMeasurementError(
                    f"outcome {outcome} on qubit {q} has probability zero"
                )
            return value, True
        p = n + int(hits[0])
        others = np.flatnonzero(self.x[:, q])
        others = others[others != p]
        self._rowmul(others, p)
        self._copy_row(p, p - n)
        self.x[p] = 0
        self.z[p] = 0
        self.z[p, q] = 1
        self.iphase[p] = 0
        if outcome is None:
            rng = np.random.default_rng() if rng is None else rng
            outcome = int(rng.integers(2))
        self.rphase[p] = int(outcome) & 1
        return int(outcome), False

    def reset(self, q, rng=None):
        value, _ = self.measure_z(q, rng)
        if value:
            self.pauli_x(q)
        return self

    # -- gauge fixing -------------------------------------------------------------

    def _stab_column(self, col):
        n = self.n
        return self.x[n:, col] if col < n else self.z[n:, col - n]

    def _eliminate(self, columns):
        """Row-reduce the stabilizer block over ``columns`` (indices into ``[X|Z]``).

        Destabilizer rows receive the dual operations so that the pairing of
        destabilizer ``k`` with stabilizer ``k`` is preserved.  Returns the
        list of ``(stabilizer_row, column)`` pivots.
        """
        n = self.n
        pivots = []
        row = 0
        for col in columns:
            if row == n:
                break
            colbits = self._stab_column(col)
            cand = np.flatnonzero(colbits[row:])
            if cand.size == 0:
                continue
            piv = row + int(cand[0])
            self._swap_rows(n + row, n + piv)
            self._swap_rows(row, piv)
            colbits = self._stab_column(col)
            targets = np.flatnonzero(colbits)
            targets = targets[targets != row]
            if targets.size:
                self._rowmul(n + targets, n + row)
                # dual update D_row <- D_row * D_t for every stabilizer target t
                for t in targets:
                    self._rowmul(np.array([row]), int(t))
            pivots.append((row, col))
            row += 1
        return pivots

    def _reduce_destabilizers(self, pivots):
        n = self.n
        for srow, col in pivots:
            bits = self.x[:n, col] if col < n else self.z[:n, col - n]
            targets = np.flatnonzero(bits)
            self._rowmul(targets, n + srow)
        self.rphase[:n] = 0
        self.iphase[:n] = 0

    def check_invariants(self):
        """Raise ``AssertionError`` if any structural tableau invariant fails."""
        n = self.n
        assert not self.iphase[n:].any(), "stabilizer row carries an i phase"
        sym = _symplectic_products(self.x, self.z)
        target = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        target[:n, n:] = np.eye(n, dtype=np.uint8)
        target[n:, :n] = np.eye(n, dtype=np.uint8)
        # destabilizers need not commute among themselves
        assert np.array_equal(sym[n:, :], target[n:, :]), "stabilizer commutation relations broken"
        assert np.array_equal(sym[:n, n:], target[:n, n:]), "destabilizer pairing broken"
        assert gf2_rank(np.hstack([self.x, self.z])) == 2 * n, "rows are linearly dependent"

    # -- text format ----------------------------------------------------------------

    def to_text(self):
        lines = [f"n={self.n}"]
        lines += [self.row_string(k) for k in range(2 * self.n)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("n="):
            raise ValueError("tableau text must start with a header line 'n=<int>'")
        n = int(lines[0][2:])
        rows = lines[1:]
        if len(rows) != 2 * n:
            raise ValueError(f"expected {2 * n} generator lines, found {len(rows)}")
        x = np.zeros((2 * n, n), np.uint8)
        z = np.zeros((2 * n, n), np.uint8)
        rphase = np.zeros(2 * n, np.uint8)
        iphase = np.zeros(2 * n, np.uint8)
        for k, row in enumerate(rows):
            for prefix, e in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2)):
                if row.startswith(prefix):
                    rphase[k], iphase[k] = e >> 1, e & 1
                    row = row[len(prefix):]
                    break
            else:
                raise ValueError(f"generator line {k + 2} lacks a phase prefix")
            if len(row) != n:
                raise ValueError(f"generator line {k + 2} has {len(row)} letters, expected {n}")
            x[k], z[k] = pauli_to_bits(row)
        return cls(x, z, rphase, iphase)


_GATE_METHODS = {
    "I": lambda t, q: t._check(q),
    "Identity": lambda t, q: t._check(q),
    "H": CliffordTableau.h,
    "S": CliffordTableau.s,
    "Sdag": CliffordTableau.sdg,
    "X": CliffordTableau.pauli_x,
    "Y": CliffordTableau.pauli_y,
    "Z": CliffordTableau.pauli_z,
    "CNOT": CliffordTableau.cnot,
    "EmissionCNOT": CliffordTableau.cnot,
    "CZ": CliffordTableau.cz,
}


def _symplectic_products(x, z):
    x = x.astype(np.int64)
    z = z.astype(np.int64)
    return ((x @ z.T + z @ x.T) % 2).astype(np.uint8)


def gf2_rank(mat):
    """Rank over GF(2) of a 0/1 matrix."""
    m = (np.asarray(mat, dtype=np.uint8) & 1).copy()
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        cand = np.flatnonzero(m[rank:, c])
        if cand.size == 0:
            continue
        p = rank + int(cand[0])
        if p != rank:
            m[[rank, p]] = m[[p, rank]]
        others = np.flatnonzero(m[:, c])
        others = others[others != rank]
        m[others] ^= m[rank]
        rank += 1
    return rank


# -- functional API -------------------------------------------------------------------


def new_zero_state(n):
    """Tableau of ``|0...0>`` on ``n`` qubits."""
    return CliffordTableau.zero_state(n)


def apply_gate(t, kind, qubits):
    """Return a new tableau with Clifford gate ``kind`` applied to ``qubits``."""
    return t.copy().apply(kind, tuple(qubits))


def measure_z(t, q, rng=None):
    """Measure ``q`` in Z. Returns ``(outcome, deterministic, new_tableau)``."""
    new = t.copy()
    outcome, deterministic = new.measure_z(q, rng)
    return outcome, deterministic, new


def reset_qubit(t, q, rng=None):
    return t.copy().reset(q, rng)


def canonical_form(t):
    """Deterministic gauge of ``t``.

    The stabilizer block is put in reduced row echelon form over the column
    order ``x_0..x_{n-1}, z_0..z_{n-1}``; every destabilizer is reduced modulo
    the stabilizer group and given a ``+`` phase.  Two tableaux describe the
    same state iff their canonical forms are equal.
    """
    new = t.copy()
    pivots = new._eliminate(range(2 * new.n))
    new._reduce_destabilizers(pivots)
    return new


def remove_qubits(t, qubits):
    """Drop ``qubits`` that are known to be in ``|0>`` and return the remaining state.

    Raises :class:`ValueError` when one of them is not deterministically ``|0>``.
    """
    qubits = sorted(set(int(q) for q in qubits))
    for q in qubits:
        if t.peek_z(q) != 0:
            raise ValueError(f"qubit {q} is not in |0>; measure or reset it first")
    keep = [q for q in range(t.n) if q not in set(qubits)]
    if not keep:
        raise InvalidSizeError("cannot remove every qubit of a state")
    work = t.copy()
    n = work.n
    pivots = work._eliminate([n + q for q in qubits])
    # non-pivot stabilizers have no support on the removed qubits
    rows = [n + r for r in range(len(pivots), n)]
    return stabilizer_tableau_from_generators(
        work.x[np.ix_(rows, keep)], work.z[np.ix_(rows, keep)], work.rphase[rows]
    )


def stabilizer_tableau_from_generators(x, z, signs):
    """Full tableau for commuting, independent stabilizer generators.

    Destabilizers are found by solving the symplectic pairing equations
    over GF(2) and then made symplectically orthogonal to one another.
    """
    x = np.asarray(x, np.uint8) & 1
    z = np.asarray(z, np.uint8) & 1
    n = x.shape[1]
    if x.shape != (n, n):
        raise InvalidSizeError("need exactly n generators on n qubits")
    # destabilizer d_k satisfies <d_k, s_j> = delta_kj, i.e. [dz | dx] @ [x|z]^T = e_k
    a = np.hstack([z, x])  # <d, s> = d_x . s_z + d_z . s_x
    sol = _gf2_solve(a, np.eye(n, dtype=np.uint8))
    if sol is None:
        raise ValueError("generators are not independent")
    dx, dz = sol[:, :n], sol[:, n:]
    # Gram-Schmidt so destabilizers commute with each other
    for k in range(n):
        for j in range(k + 1, n):
            if (int(dx[k] @ dz[j]) + int(dz[k] @ dx[j])) % 2:
                # multiply d_j by s_k: keeps pairing, fixes <d_k, d_j>
                dx[j] ^= x[k]
                dz[j] ^= z[k]
    tx = np.vstack([dx, x])
    tz = np.vstack([dz, z])
    rphase = np.concatenate([np.zeros(n, np.uint8), np.asarray(signs, np.uint8) & 1])
    return CliffordTableau(tx, tz, rphase)


def _gf2_solve(a, b):
    """Solve ``X @ a.T = b`` over GF(2) for square ``b``; returns rows of X or None."""
    # each unknown row v solves a @ v = b[:, k]
    a = np.asarray(a, np.uint8) & 1
    m, ncols = a.shape
    aug = np.hstack([a, np.asarray(b, np.uint8).T & 1]).astype(np.uint8)
    rank = 0
    piv_cols = []
    for c in range(ncols):
        cand = np.flatnonzero(aug[rank:, c])
        if cand.size == 0:
            continue
        p = rank + int(cand[0])
        aug[[rank, p]] = aug[[p, rank]]
        others = np.flatnonzero(aug[:, c])
        others = others[others != rank]
        aug[others] ^= aug[rank]
        piv_cols.append(c)
        rank += 1
        if rank == m:
            break
    if aug[rank:, ncols:].any():
        return None
    sol = np.zeros((b.shape[0], ncols), np.uint8)
    for r, c in enumerate(piv_cols):
        sol[:, c] = aug[r, ncols:]
    return sol


# -- mixed states ---------------------------------------------------------------------


class MixedStabilizerState:
    """Sub-normalized ensemble of ``(probability, tableau)`` branches.

    Branches that become identical (same canonical tableau) are merged, which
    keeps Pauli-noise ensembles bounded by ``2**n`` members per pure state.
    """

    def __init__(self, branches, merge=True):
        branches = [(float(p), t) for p, t in branches]
        if not branches:
            raise InvalidSizeError("a mixed state needs at least one branch")
        n = branches[0][1].n
        if any(t.n != n for _, t in branches):
            raise InvalidSizeError("all branches must have the same number of qubits")
        self.n = n
        self.branches = branches
        if merge:
            self.merge()

    @classmethod
    def from_tableau(cls, t, probability=1.0):
        return cls([(probability, t.copy())])

    @classmethod
    def zero_state(cls, n):
        return cls([(1.0, CliffordTableau.zero_state(n))])

    def copy(self):
        return MixedStabilizerState([(p, t.copy()) for p, t in self.branches], merge=False)

    @property
    def probabilities(self):
        return np.array([p for p, _ in self.branches])

    def total_probability(self):
        return float(sum(p for p, _ in self.branches))

    def __len__(self):
        return len(self.branches)

    def merge(self):
        acc = {}
        order = []
        for p, t in self.branches:
            c = canonical_form(t)
            k = c.key()
            if k in acc:
                acc[k][0] += p
            else:
                acc[k] = [p, c]
                order.append(k)
        self.branches = [(acc[k][0], acc[k][1]) for k in order]
        return self

    def prune(self, eps):
        kept = [(p, t) for p, t in self.branches if p >= eps]
        if not kept:
            raise ParameterError("pruning removed every branch")
        self.branches = kept
        return self

    def apply(self, kind, qubits):
        for _, t in self.branches:
            t.apply(kind, qubits)
        return self

    def apply_pauli_channel(self, q, weights, prune_eps=0.0, merge=True):
        """Split every branch by ``weights`` = ``{'I': pI, 'X': pX, ...}`` on ``q``."""
        out = []
        for p, t in self.branches:
            for letter, w in weights.items():
                if w == 0:
                    continue
                new = t.copy().apply_pauli(letter, q)
                out.append((p * w, new))
        out = [(p, t) for p, t in out if p >= prune_eps] if prune_eps > 0 else out
        if not out:
            raise ParameterError("pruning removed every branch")
        self.branches = out
        return self.merge() if merge else self

    def scale(self, factor):
        self.branches = [(p * factor, t) for p, t in self.branches]
        return self

    def measure_z_branches(self, q):
        """Exact Z measurement: split random branches into both outcomes.

        Returns a list parallel to the new branch list holding each branch's
        outcome.
        """
        new, outcomes = [], []
        for p, t in self.branches:
            value = t.peek_z(q)
            if value is not None:
                new.append((p, t))
                outcomes.append(value)
                continue
            for m in (0, 1):
                c = t.copy()
                c.measure_z(q, outcome=m)
                new.append((p / 2, c))
                outcomes.append(m)
        self.branches = new
        return outcomes


def branch_depolarize(m, q, p, prune_eps=0.0, merge=False):
    """Depolarize qubit ``q`` of every branch: weights ``(1-p, p/3, p/3, p/3)``.

    With ``merge=False`` every branch splits into exactly four; the simulator
    passes ``merge=True`` to fold coinciding states together.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"depolarizing probability must lie in [0, 1], got {p}")
    if prune_eps < 0:
        raise ParameterError("prune_eps must be non-negative")
    new = m.copy()
    if p == 0:
        return new
    weights = {"I": 1 - p, "X": p / 3, "Y": p / 3, "Z": p / 3}
    return new.apply_pauli_channel(q, weights, prune_eps, merge=merge)


def sample_depolarize(t, q, p, rng):
    """Monte Carlo depolarizing: apply one sampled Pauli in place."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"depolarizing probability must lie in [0, 1], got {p}")
    u = rng.random()
    if u < p:
        t.apply_pauli("XYZ"[int(rng.integers(3))], q)
    return t
