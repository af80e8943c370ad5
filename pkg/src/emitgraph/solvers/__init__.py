"""State-to-circuit solvers."""

from .alternate import AlternateTargetSolver, alternative_targets, dedupe_circuits, solve_alternates
from .base import BaseSolver, CandidateCircuit, SolverConfig, SolverResult, check_target
from .evolutionary import EvolutionarySolver, HybridSolver, RandomSearchSolver, emission_skeleton
from .height import height_function, min_emitters
from .time_reversed import TimeReversedSolver, check_circuit, time_reversed_solve

SOLVERS = {
    "time-reversed": TimeReversedSolver,
    "random": RandomSearchSolver,
    "evolutionary": EvolutionarySolver,
    "hybrid": HybridSolver,
    "alternate": AlternateTargetSolver,
}


def make_solver(name, config=None):
    """Build the solver registered under ``name`` from a :class:`SolverConfig`."""
    config = config or SolverConfig()
    try:
        cls = SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}") from None
    params = cls().get_params()
    values = {
        "cost": config.cost,
        "noise": config.noise,
        "seed": config.seed,
        "population": config.population,
        "iterations": config.iterations,
        "tournament": config.tournament,
        "elite": config.elite,
        "n_emitters": config.n_emitters,
        "budget": config.budget,
        "ordering": config.ordering,
        "n_orderings": config.n_orderings,
        "orbit_mode": config.orbit_mode,
    }
    if config.backend != "auto":
        values["backend"] = config.backend
    return cls(**{k: v for k, v in values.items() if k in params})


__all__ = [
    "SOLVERS",
    "AlternateTargetSolver",
    "BaseSolver",
    "CandidateCircuit",
    "EvolutionarySolver",
    "HybridSolver",
    "RandomSearchSolver",
    "SolverConfig",
    "SolverResult",
    "TimeReversedSolver",
    "alternative_targets",
    "check_circuit",
    "check_target",
    "dedupe_circuits",
    "emission_skeleton",
    "height_function",
    "make_solver",
    "min_emitters",
    "solve_alternates",
    "time_reversed_solve",
]
