"""
Stochastic circuit search: random search, an evolutionary loop with
tournament selection and elitism, and the hybrid variant seeded with the
deterministic circuit.

Candidates are gate lists over a fixed emission skeleton.  Skeleton gates
(the emissions and, for the hybrid, the deterministic measurements) are
protected; mutations add, remove or replace the remaining gates at random
positions.  Every candidate respects ``validate`` by construction.
"""


from ..circuit.dag import COMPOSITE, CircuitDAG, GateSpec
from ..exceptions import CapacityError, ParameterError
from .base import BaseSolver, CandidateCircuit, SolverResult, as_cost, as_noise, score
from .height import min_emitters
from .time_reversed import time_reversed_solve

MAX_QUBITS = 10
SINGLE = ("H", "S", "Sdag", "X", "Y", "Z")
MUTATIONS = ("add", "remove", "replace")


class _Genome:
    __slots__ = ("gates", "protected")

    def __init__(self, gates, protected):
        self.gates = tuple(gates)
        self.protected = tuple(protected)


def _build(genome, n_emitters, n_photons):
    """Circuit from a gate list; composite classical bits are numbered in order."""
    c = CircuitDAG(n_emitters, n_photons)
    for g in genome.gates:
        if g.kind == COMPOSITE:
            c.add_measurement(g.wires[0], g.wires[1], g.correction)
        else:
            c.add_gate(g)
    return c


def emission_skeleton(n_photons, n_emitters):
    """Round-robin emissions, then one measurement per used emitter onto its last photon."""
    gates = []
    last = {}
    for j in range(n_photons):
        k = j % n_emitters
        gates.append(GateSpec("EmissionCNOT", (f"e{k}", f"p{j}")))
        last[k] = j
    for k in sorted(last):
        gates.append(GateSpec(COMPOSITE, (f"e{k}", f"p{last[k]}", "c0"), "Z"))
    return _Genome(gates, [True] * len(gates))


def _genome_from_circuit(circuit):
    gates, protected = [], []
    for g in circuit.gates():
        if g.kind == COMPOSITE:
            g = GateSpec(COMPOSITE, (g.wires[0], g.wires[1], "c0"), g.correction)
        gates.append(g)
        protected.append(g.kind in ("EmissionCNOT", COMPOSITE))
    return _Genome(gates, protected)


class _Mutator:
    def __init__(self, n_emitters, n_photons, two_qubit=("CNOT", "CZ"), allow_measurements=False):
        self.emitters = [f"e{k}" for k in range(n_emitters)]
        self.photons = [f"p{j}" for j in range(n_photons)]
        self.two_qubit = two_qubit if n_emitters > 1 else ()
        self.allow_measurements = allow_measurements

    def random_gate(self, rng):
        # uniform over gate families, then uniform operands
        families = ["single"] + (["two"] if self.two_qubit else []) + (["measure"] if self.allow_measurements else [])
        fam = families[rng.integers(len(families))]
        if fam == "single":
            wires = self.emitters + self.photons
            return GateSpec(SINGLE[rng.integers(len(SINGLE))], (wires[rng.integers(len(wires))],))
        if fam == "two":
            a, b = rng.choice(len(self.emitters), 2, replace=False)
            kind = self.two_qubit[rng.integers(len(self.two_qubit))]
            return GateSpec(kind, (self.emitters[a], self.emitters[b]))
        e = self.emitters[rng.integers(len(self.emitters))]
        p = self.photons[rng.integers(len(self.photons))]
        return GateSpec(COMPOSITE, (e, p, "c0"), "XYZ"[rng.integers(3)])

    def __call__(self, genome, rng):
        free = [i for i, p in enumerate(genome.protected) if not p]
        op = MUTATIONS[rng.integers(3)]
        if op != "add" and not free:
            op = "add"
        gates, prot = list(genome.gates), list(genome.protected)
        if op == "add":
            pos = int(rng.integers(len(gates) + 1))
            gates.insert(pos, self.random_gate(rng))
            prot.insert(pos, False)
        elif op == "remove":
            i = free[rng.integers(len(free))]
            del gates[i], prot[i]
        else:
            i = free[rng.integers(len(free))]
            gates[i] = self.random_gate(rng)
        return _Genome(gates, prot)


class RandomSearchSolver(BaseSolver):
    """Mutate every member, keep the best ``population`` of parents and children.

    Parameters
    ----------
    seed : int
        Required.
    population : int
    iterations : int
        Zero returns the scored starting population.
    n_emitters : int, optional
        Defaults to the height-function minimum.
    cost, noise, backend
        Scoring setup; the default cost is infidelity on the exact branch
        ensemble.
    max_qubits : int
        Capacity guard on photons plus emitters.
    """

    def __init__(self, seed=None, population=16, iterations=50, n_emitters=None, cost=None, noise=None,
                 backend="mixed", max_qubits=MAX_QUBITS):
        self.seed = seed
        self.population = population
        self.iterations = iterations
        self.n_emitters = n_emitters
        self.cost = cost
        self.noise = noise
        self.backend = backend
        self.max_qubits = max_qubits

    # -- shared machinery ----------------------------------------------------------------

    def _setup(self, target):
        if self.population < 1:
            raise ParameterError("population must be at least 1")
        if self.iterations < 0:
            raise ParameterError("iterations must be non-negative")
        rng = self._rng()
        ne = self.n_emitters if self.n_emitters is not None else min_emitters(target)
        if ne < 1:
            raise ParameterError("need at least one emitter")
        if target.n + ne > self.max_qubits:
            raise CapacityError(f"{target.n} photons + {ne} emitters exceeds the search guard of {self.max_qubits} qubits")
        self.n_emitters_ = ne
        self._cost = as_cost(self.cost)
        self._noise = as_noise(self.noise)
        self._cache = {}
        self._seen = {}
        self._target = target
        self._mutate = _Mutator(ne, target.n)
        return rng

    def _evaluate(self, genome):
        if genome.gates in self._seen:
            return self._seen[genome.gates]
        circuit = _build(genome, self.n_emitters_, self._target.n)
        key = circuit.canonical_key()
        if key not in self._cache:
            values, total, state = score(circuit, self._target, self._cost, self._noise, self.backend)
            self._cache[key] = CandidateCircuit(circuit, metrics=values, cost=total, state=state)
        self._seen[genome.gates] = self._cache[key]
        return self._cache[key]

    def _initial(self, target, rng):
        skel = emission_skeleton(target.n, self.n_emitters_)
        pop = [skel]
        while len(pop) < self.population:
            pop.append(self._mutate(skel, rng))
        return pop

    def _rank(self, genomes):
        scored = [(self._evaluate(g).cost, i, g) for i, g in enumerate(genomes)]
        scored.sort(key=lambda t: (t[0], t[1]))
        return [g for _, _, g in scored]

    def _finish(self, genomes, best, history):
        seen, out = set(), []
        for g in [best] + list(genomes):
            cand = self._evaluate(g)
            key = cand.circuit.canonical_key()
            if key not in seen:
                seen.add(key)
                out.append(cand)
        self.history_ = history
        return SolverResult(out, history)

    def _step(self, pop, rng):
        children = [self._mutate(g, rng) for g in pop]
        # children first so that equal-cost moves drift instead of stalling
        return self._rank(children + pop)[: self.population]

    def _solve(self, target):
        rng = self._setup(target)
        pop = self._rank(self._initial(target, rng))
        best = pop[0]
        history = [self._evaluate(best).cost]
        for _ in range(self.iterations):
            pop = self._step(pop, rng)
            lead = min(pop, key=lambda g: self._evaluate(g).cost)
            if self._evaluate(lead).cost < self._evaluate(best).cost:
                best = lead
            history.append(self._evaluate(best).cost)
        return self._finish(pop, best, history)


class EvolutionarySolver(RandomSearchSolver):
    """Tournament selection with elitism.

    Each generation keeps the ``elite`` best members and fills the rest with
    mutants of tournament winners (``tournament`` members drawn uniformly).
    With ``population=1`` no elite survives and the search is a random walk;
    the best circuit seen is tracked separately either way.
    """

    def __init__(self, seed=None, population=16, iterations=50, tournament=3, elite=2, n_emitters=None,
                 cost=None, noise=None, backend="mixed", max_qubits=MAX_QUBITS):
        super().__init__(seed, population, iterations, n_emitters, cost, noise, backend, max_qubits)
        self.tournament = tournament
        self.elite = elite

    def _step(self, pop, rng):
        n_elite = min(self.elite, self.population - 1)
        out = list(pop[:n_elite])
        while len(out) < self.population:
            picks = rng.choice(len(pop), size=min(self.tournament, len(pop)), replace=False)
            parent = pop[int(min(picks))]  # pop is ranked, lower index is fitter
            out.append(self._mutate(parent, rng))
        return self._rank(out)


class HybridSolver(EvolutionarySolver):
    """Evolutionary search whose population starts as copies of the deterministic circuit.

    Emissions and measurements of the seed are protected, so the search only
    trims or rewrites its local and emitter-emitter gates.  With elitism the
    returned cost never exceeds the seed's.
    """

    def _initial(self, target, rng):
        circuit, ne = time_reversed_solve(target, n_emitters=self.n_emitters_)
        seed = _genome_from_circuit(circuit)
        self.seed_circuit_ = circuit
        return [seed] * self.population

