"""
Deterministic circuit synthesis by disentangling the target in reverse time.

The reverse pass starts from the target photons next to emitters in ``|0>``
and absorbs photons from the last one to the first.  A photon ``j`` is
absorbed with a reversed emission ``CNOT(e -> p_j)`` once the stabilizer
group holds an element supported on ``p_j`` and the emitters only.  When no
such element exists a free emitter is entangled with ``p_j`` first; run
forwards this step is an X-basis measurement of the emitter with a Pauli
feed-forward on the photon.  Finally the emitters are rotated back to
``|0>``.  The forward circuit is the reverse operation list read backwards
with every gate inverted.

Tie-breaks: candidate elements are ranked by emitter weight, then by
enumeration order of the echelon basis; among emitters the lowest index
wins.
"""

import numpy as np

from ..circuit.dag import COMPOSITE, INVERSE, CircuitDAG, GateSpec
from ..convert import graph_to_stabilizer
from ..exceptions import PipelineError
from ..graphstate import GraphState
from ..tableau import CliffordTableau, _g
from .base import BaseSolver, CandidateCircuit, SolverResult, as_cost, as_noise, score
from .height import height_function

# local gates that rotate a Pauli letter onto Z by conjugation
_TO_Z = {"X": ("H",), "Y": ("Sdag", "H"), "Z": ()}
# feed-forward Pauli that anticommutes with a single-qubit stabilizer
_ANTI = {"X": "Z", "Y": "X", "Z": "X"}


def _letter(x, z):
    return {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}.get((int(x), int(z)))


class _Rows:
    """Stabilizer generators as ``(x, z, e)`` with phases ``i**e``."""

    def __init__(self, t):
        n = t.n
        self.nq = n
        self.x = t.x[n:].astype(np.uint8).copy()
        self.z = t.z[n:].astype(np.uint8).copy()
        self.e = (2 * t.rphase[n:].astype(np.int64)) % 4

    def col(self, c):
        return self.x[:, c] if c < self.nq else self.z[:, c - self.nq]

    def mul(self, targets, p):
        if len(targets) == 0:
            return
        g = _g(self.x[targets], self.z[targets], self.x[p][None, :], self.z[p][None, :]).sum(axis=1)
        self.e[targets] = (self.e[targets] + self.e[p] + g) % 4
        self.x[targets] ^= self.x[p]
        self.z[targets] ^= self.z[p]

    def rref(self, columns):
        """Echelon form over ``columns``; returns ``{row: column}`` pivots in order."""
        pivots = {}
        row = 0
        m = self.x.shape[0]
        for c in columns:
            if row == m:
                break
            cand = np.flatnonzero(self.col(c)[row:])
            if cand.size == 0:
                continue
            p = row + int(cand[0])
            for arr in (self.x, self.z, self.e):
                arr[[row, p]] = arr[[p, row]]
            targets = np.flatnonzero(self.col(c))
            self.mul(targets[targets != row], row)
            pivots[row] = c
            row += 1
        return pivots

    def product(self, rows):
        x = np.zeros(self.nq, np.uint8)
        z = np.zeros(self.nq, np.uint8)
        e = 0
        for r in rows:
            e = (e + int(self.e[r]) + int(_g(x, z, self.x[r], self.z[r]).sum())) % 4
            x = x ^ self.x[r]
            z = z ^ self.z[r]
        return x, z, e


class _ReversePass:
    def __init__(self, target, n_emitters):
        self.np = target.n
        self.ne = n_emitters
        self.nq = self.np + self.ne
        t = CliffordTableau.zero_state(self.nq)
        # target stabilizers on the photons, Z on the emitters
        t.x[:] = 0
        t.z[:] = 0
        t.rphase[:] = 0
        t.iphase[:] = 0
        n, N = self.np, self.nq
        t.x[:n, :n] = target.x[:n]
        t.z[:n, :n] = target.z[:n]
        t.x[N:N + n, :n] = target.x[n:]
        t.z[N:N + n, :n] = target.z[n:]
        t.rphase[N:N + n] = target.rphase[n:]
        t.rphase[:n] = target.rphase[:n]
        t.iphase[:n] = target.iphase[:n]
        for k in range(self.ne):
            t.x[n + k, n + k] = 1
            t.z[N + n + k, n + k] = 1
        self.t = t
        self.h = height_function(target)
        self.ops = []

    # -- bookkeeping --------------------------------------------------------------------

    def emitter_qubit(self, k):
        return self.np + k

    def cols(self, qubits):
        return [q for q in qubits] + [self.nq + q for q in qubits]

    def gate(self, kind, *qubits):
        self.t.apply(kind, qubits)
        self.ops.append((kind, qubits))

    def rotate_to_z(self, letter, q):
        for kind in _TO_Z[letter]:
            self.gate(kind, q)

    def reverse_measurement(self, e, j, corr):
        """Entangle free emitter ``e`` (in ``|0>``) with photon ``j``: ``H_e . C-corr . H_e``."""
        t = self.t
        t.h(e)
        if corr == "X":
            t.cnot(e, j)
        elif corr == "Z":
            t.cz(e, j)
        else:
            t.sdg(j)
            t.cnot(e, j)
            t.s(j)
        t.h(e)
        self.ops.append((COMPOSITE, (e, j), corr))

    # -- searches --------------------------------------------------------------------------

    def single_qubit_stabilizer(self, q, ignore):
        """Letter and sign of a stabilizer supported on ``q`` alone (``ignore`` qubits are ``|0>``)."""
        rows = _Rows(self.t)
        others = [p for p in range(self.nq) if p != q and p not in ignore]
        piv = rows.rref(self.cols(others) + self.cols(sorted(ignore)) + self.cols([q]))
        for r, c in piv.items():
            if c in (q, self.nq + q):
                letter = _letter(rows.x[r, q], rows.z[r, q])
                return letter, int(rows.e[r]) == 2
        return None

    def free_emitter(self, absorbed):
        """Rotate some emitter to ``|0>`` using emitter-only gates; return it or ``None``.

        Elements supported on the emitters alone (absorbed photons are
        ``|0>`` and ignored) are concentrated onto the lowest emitter of the
        lightest such element.
        """
        rows = _Rows(self.t)
        photons = [q for q in range(self.np) if q not in absorbed]
        emitters = [self.emitter_qubit(k) for k in range(self.ne)]
        piv = rows.rref(self.cols(photons) + self.cols(sorted(absorbed)) + self.cols(emitters))
        ecols = set(self.cols(emitters))
        cands = [r for r, c in piv.items() if c in ecols]
        if not cands:
            return None
        ecol = np.array(emitters)
        r = min(cands, key=lambda r: (int(np.count_nonzero(rows.x[r, ecol] | rows.z[r, ecol])), r))
        support = [q for q in emitters if rows.x[r, q] or rows.z[r, q]]
        for q in support:
            self.rotate_to_z(_letter(rows.x[r, q], rows.z[r, q]), q)
        keep = support[0]
        for q in support[1:]:
            self.gate("CNOT", q, keep)
        if int(rows.e[r]) == 2:
            self.gate("X", keep)
        return keep

    def absorption_candidates(self, j, absorbed):
        """Group elements on ``p_j`` and the emitters, nontrivial on ``p_j``.

        Returns ``(disentangled, best)`` where ``best`` is the element with the
        lowest positive emitter weight (or ``None``).
        """
        rows = _Rows(self.t)
        emitters = [self.emitter_qubit(k) for k in range(self.ne)]
        order = self.cols(range(j)) + self.cols(sorted(absorbed)) + self.cols([j]) + self.cols(emitters)
        piv = rows.rref(order)
        a_rows = [r for r, c in piv.items() if c in (j, self.nq + j)]
        b_rows = [r for r, c in piv.items() if c in self.cols(emitters)]
        ecols = np.array(emitters)
        disentangled = False
        best, best_key = None, None
        for amask in range(1, 1 << len(a_rows)):
            base = [a_rows[i] for i in range(len(a_rows)) if amask >> i & 1]
            for bmask in range(1 << min(len(b_rows), 12)):
                extra = [b_rows[i] for i in range(len(b_rows)) if bmask >> i & 1]
                x, z, e = rows.product(base + extra)
                weight = int(np.count_nonzero(x[ecols] | z[ecols]))
                if weight == 0:
                    disentangled = True
                    continue
                key = (weight, amask, bmask)
                if best_key is None or key < best_key:
                    best, best_key = (x, z, e), key
        return disentangled, best

    # -- steps -----------------------------------------------------------------------------

    def absorb(self, j, element):
        x, z, e = element
        emitters = [self.emitter_qubit(k) for k in range(self.ne) if x[self.emitter_qubit(k)] or z[self.emitter_qubit(k)]]
        self.rotate_to_z(_letter(x[j], z[j]), j)
        for q in emitters:
            self.rotate_to_z(_letter(x[q], z[q]), q)
        keep = emitters[0]
        for q in emitters[1:]:
            self.gate("CNOT", q, keep)
        if e == 2:
            self.gate("X", j)
        self.gate("CNOT", keep, j)

    def process_photon(self, j, absorbed):
        disentangled, best = self.absorption_candidates(j, absorbed)
        # the entanglement held by the emitters does not drop when photon j
        # leaves: a fresh emitter has to take part
        if self.h[j] >= self.h[j + 1] or best is None:
            e = self.free_emitter(absorbed)
            if e is not None:
                letter = "X"
                if disentangled:
                    letter = _ANTI[self.single_qubit_stabilizer(j, absorbed)[0]]
                self.reverse_measurement(e, j, letter)
                _, best = self.absorption_candidates(j, absorbed)
            elif best is None and disentangled:
                # no emitter can take part: prepare the photon by local gates
                letter, negative = self.single_qubit_stabilizer(j, absorbed)
                self.rotate_to_z(letter, j)
                if negative:
                    self.gate("X", j)
                return
            elif best is None:
                raise PipelineError("time-reversed", f"no free emitter to absorb photon {j}")
        self.absorb(j, best)

    def release_emitters(self):
        photons = list(range(self.np))
        done = []
        for k in range(self.ne):
            q = self.emitter_qubit(k)
            rest = [self.emitter_qubit(i) for i in range(k + 1, self.ne)]
            rows = _Rows(self.t)
            piv = rows.rref(self.cols(photons) + self.cols(done) + self.cols([q]) + self.cols(rest))
            r = next(r for r, c in piv.items() if c in (q, self.nq + q))
            support = [p for p in [q] + rest if rows.x[r, p] or rows.z[r, p]]
            for p in support:
                self.rotate_to_z(_letter(rows.x[r, p], rows.z[r, p]), p)
            for p in support[1:]:
                self.gate("CNOT", p, q)
            if int(rows.e[r]) == 2:
                self.gate("X", q)
            done.append(q)

    def run(self):
        absorbed = set()
        for j in range(self.np - 1, -1, -1):
            self.process_photon(j, absorbed)
            absorbed.add(j)
        self.release_emitters()
        return self.ops


def _wire(q, n_photons):
    return f"p{q}" if q < n_photons else f"e{q - n_photons}"


def forward_circuit(ops, n_photons, n_emitters):
    """Turn a reverse operation list into the forward :class:`CircuitDAG`."""
    c = CircuitDAG(n_emitters, n_photons)
    for op in reversed(ops):
        kind, qubits = op[0], op[1]
        wires = [_wire(q, n_photons) for q in qubits]
        if kind == COMPOSITE:
            c.add_measurement(wires[0], wires[1], op[2])
        elif kind == "CNOT" and wires[0][0] == "e" and wires[1][0] == "p":
            c.add_gate(GateSpec("EmissionCNOT", wires))
        else:
            c.add_gate(GateSpec(INVERSE.get(kind, kind), wires))
    return c


def time_reversed_solve(target, n_emitters=None, verify=True):
    """Synthesize a generation circuit for ``target``.

    Parameters
    ----------
    target : GraphState or CliffordTableau
        Photon ``j`` of the circuit is node ``j``.
    n_emitters : int, optional
        Defaults to the maximum of the height function (at least one).
    verify : bool
        Simulate the circuit and check it reproduces ``target``.

    Returns
    -------
    circuit : CircuitDAG
    n_emitters : int
    """
    t = graph_to_stabilizer(target) if isinstance(target, GraphState) else target
    if n_emitters is None:
        n_emitters = max(1, max(height_function(t)))
    ops = _ReversePass(t, n_emitters).run()
    circuit = forward_circuit(ops, t.n, n_emitters)
    if verify:
        check_circuit(circuit, t)
    return circuit, n_emitters


def check_circuit(circuit, target, atol=1e-9):
    """Raise :class:`PipelineError` unless ``circuit`` prepares ``target`` exactly."""
    from ..circuit.simulate import simulate
    from ..metrics import fidelity_stabilizer

    t = graph_to_stabilizer(target) if isinstance(target, GraphState) else target
    out = simulate(circuit, "stabilizer", seed=0)
    f = fidelity_stabilizer(out, t)
    if f < 1 - atol:
        raise PipelineError("verify", f"circuit reaches fidelity {f:.6g} instead of 1")
    return f


class TimeReversedSolver(BaseSolver):
    """Deterministic synthesis with the minimal emitter count.

    Parameters
    ----------
    cost : CostFunction or dict, optional
        Used to score the single output circuit; defaults to infidelity.
    noise : NoiseModel, optional
        Noise applied when scoring.
    backend : str
        ``auto`` picks dense below the dense cap and the branch ensemble above.
    """

    def __init__(self, cost=None, noise=None, backend="auto"):
        self.cost = cost
        self.noise = noise
        self.backend = backend

    def _solve(self, target):
        circuit, ne = time_reversed_solve(target)
        self.n_emitters_ = ne
        cost = as_cost(self.cost)
        values, total, state = score(circuit, target, cost, as_noise(self.noise), self.backend)
        return SolverResult([CandidateCircuit(circuit, metrics=values, cost=total, state=state)])
