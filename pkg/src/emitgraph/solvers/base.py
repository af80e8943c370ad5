"""Shared solver plumbing: configuration, ranked results and the estimator base."""

import json
import warnings
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from sklearn.base import BaseEstimator

from ..circuit import simulate, to_qasm, validate
from ..convert import graph_to_stabilizer
from ..densitymat import DENSE_CAP
from ..exceptions import ParameterError, ValidationError
from ..graphstate import GraphState, LocalCliffordLayer
from ..metrics import CostFunction, evaluate_cost, metric_values
from ..noise import NoiseModel
from ..tableau import CliffordTableau


def check_target(target):
    """Coerce ``target`` to a :class:`GraphState` or :class:`CliffordTableau`.

    Accepts graph states, tableaux, networkx graphs (nodes ``0..n-1``) and the
    graph JSON dictionary.
    """
    if isinstance(target, (GraphState, CliffordTableau)):
        if target.n < 1:
            raise ParameterError("target has no qubits")
        return target
    if isinstance(target, nx.Graph):
        return GraphState.from_networkx(target)
    if isinstance(target, dict):
        return GraphState.from_dict(target)
    raise ParameterError(f"cannot use {type(target).__name__} as a target")


def default_cost():
    return CostFunction({"infidelity": 1.0})


def as_cost(cost):
    if cost is None:
        return default_cost()
    if isinstance(cost, CostFunction):
        return cost
    return CostFunction.from_dict(cost)


def as_noise(noise):
    if noise is None or isinstance(noise, NoiseModel):
        return noise
    return NoiseModel.from_list(noise)


@dataclass
class SolverConfig:
    """Settings shared by every solver; unused fields are ignored.

    Loaded from the run-config JSON with :meth:`from_dict`.
    """

    backend: str = "auto"
    cost: object = None
    seed: int = None
    population: int = 16
    iterations: int = 50
    tournament: int = 3
    elite: int = 2
    n_emitters: int = None
    budget: int = None
    ordering: str = "identity"
    n_orderings: int = 8
    orbit_mode: str = "isoclass"
    noise: object = None

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown solver settings: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass
class CandidateCircuit:
    """One ranked circuit.

    ``circuit`` already ends with ``correction``; ``provenance`` is the
    :class:`OrbitEntry` that produced it, if any.
    """

    circuit: object
    correction: LocalCliffordLayer = field(default_factory=lambda: LocalCliffordLayer({}))
    metrics: dict = field(default_factory=dict)
    cost: float = float("nan")
    provenance: object = None
    state: object = field(default=None, repr=False)

    def to_dict(self, rank=None):
        d = {
            "rank": rank,
            "cost": self.cost,
            "metrics": self.metrics,
            "qasm": to_qasm(self.circuit),
            "provenance": self.provenance.to_dict() if self.provenance is not None else None,
        }
        return d


class SolverResult(list):
    """Candidates sorted ascending by cost (stable)."""

    def __init__(self, entries=(), history=None):
        super().__init__(sorted(entries, key=lambda c: c.cost))
        self.history = list(history or [])

    @property
    def best(self):
        return self[0] if self else None

    def to_jsonl(self, fh):
        for rank, entry in enumerate(self):
            fh.write(json.dumps(entry.to_dict(rank)) + "\n")


def evaluation_backend(circuit, backend="auto", cap=DENSE_CAP):
    if backend != "auto":
        return backend
    return "dense" if circuit.n_photons + circuit.n_emitters <= cap else "mixed"


def score(circuit, target, cost, noise=None, backend="auto", seed=0):
    """Simulate ``circuit`` and return ``(metrics, cost, state)``.

    Leftover emitter entanglement is traced out silently; it shows up in the
    fidelity.
    """
    report = validate(circuit)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))
    state = None
    if cost.needs_state:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            state = simulate(circuit, evaluation_backend(circuit, backend), noise=noise, seed=seed, check=False)
    values = metric_values(cost, circuit, state, target)
    return values, evaluate_cost(cost, circuit, values=values), state


def target_tableau(target):
    return graph_to_stabilizer(target) if isinstance(target, GraphState) else target


class BaseSolver(BaseEstimator):
    """Estimator-style solver: parameters in ``__init__``, work in ``fit``.

    ``fit(target)`` stores the ranked :class:`SolverResult` in ``result_``
    and the best candidate in ``best_``.
    """

    def fit(self, target):
        target = check_target(target)
        self.target_ = target
        self.result_ = self._solve(target)
        self.best_ = self.result_.best
        return self

    def _solve(self, target):
        raise NotImplementedError

    def _rng(self):
        if getattr(self, "seed", None) is None:
            raise ParameterError(f"{type(self).__name__} needs an explicit seed")
        return np.random.default_rng(self.seed)
