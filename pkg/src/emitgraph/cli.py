"""
Command-line front end.

Exit codes: 0 success, 1 other library error, 2 usage or parse error,
3 capacity exceeded, 4 validation failure, 5 solver pipeline error.
"""

import argparse
import csv
import json
import sys
import time
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .circuit import from_qasm, simulate
from .convert import density_to_graph, graph_to_density, graph_to_stabilizer, stabilizer_to_density, stabilizer_to_graph
from .densitymat import DensityMatrix
from .exceptions import (
    CapacityError,
    ConversionMismatchError,
    EmitGraphError,
    ParameterError,
    PipelineError,
    QasmParseError,
    UnsupportedGateError,
    ValidationError,
)
from .graphops import dump_orbit, lc_orbit
from .graphstate import GraphState, linear_cluster, repeater_graph
from .metrics import CostFunction, metric_report
from .noise import NoiseModel
from .solvers import SOLVERS, SolverConfig, make_solver
from .tableau import CliffordTableau, MixedStabilizerState

EXIT_ERROR, EXIT_USAGE, EXIT_CAPACITY, EXIT_VALIDATION, EXIT_PIPELINE = 1, 2, 3, 4, 5


def _version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _read(path):
    with open(path) as fh:
        return fh.read()


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_json(path, what):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{what} {path} is not valid JSON: {exc}") from None


def _load_graph(path):
    data = _load_json(path, "target")
    try:
        return GraphState.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"{path} is not a graph target: {exc}") from None


def _load_noise(path):
    if path is None:
        return None
    data = _load_json(path, "noise model")
    if isinstance(data, dict):
        data = data.get("rules", [])
    return NoiseModel.from_list(data)


def _state_text(state):
    if isinstance(state, DensityMatrix):
        return state.to_csv()
    if isinstance(state, CliffordTableau):
        return state.to_text()
    if isinstance(state, MixedStabilizerState):
        return "".join(f"# p={p!r}\n{t.to_text()}" for p, t in state.branches)
    raise TypeError(type(state).__name__)


# -- commands --------------------------------------------------------------------------


def cmd_simulate(args):
    circuit = from_qasm(_read(args.circuit))
    noise = _load_noise(args.noise)
    state = simulate(circuit, args.backend, noise=noise, seed=args.seed, allow_large=args.allow_large)
    if args.out:
        _write(args.out, _state_text(state))
    target = _load_graph(args.target) if args.target else None
    report = metric_report(circuit, state, target)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _solver_config(args):
    cfg = SolverConfig.from_dict(_load_json(args.config, "config")) if args.config else SolverConfig()
    if args.cost:
        cfg.cost = CostFunction.from_dict(_load_json(args.cost, "cost"))
    if args.noise:
        cfg.noise = _load_noise(args.noise)
    elif isinstance(cfg.noise, list):
        cfg.noise = NoiseModel.from_list(cfg.noise)
    if isinstance(cfg.cost, dict):
        cfg.cost = CostFunction.from_dict(cfg.cost)
    for name in ("seed", "budget", "iterations", "population", "ordering", "orbit_mode"):
        value = getattr(args, name)
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def cmd_solve(args):
    target = _load_graph(args.target)
    cfg = _solver_config(args)
    if args.budget is not None and args.budget < 1:
        raise PipelineError("orbit", f"budget must be positive, got {args.budget}")
    solver = make_solver(args.solver, cfg).fit(target)
    result = solver.result_
    if args.out:
        with open(args.out, "w") as fh:
            result.to_jsonl(fh)
    best = result.best
    print(json.dumps({"solver": args.solver, "candidates": len(result), "best_cost": best.cost,
                      "best_metrics": best.metrics}, sort_keys=True))
    return 0


def cmd_orbit(args):
    g = _load_graph(args.target)
    orbit = lc_orbit(g, max_entries=args.max, mode=args.mode)
    if args.out:
        with open(args.out, "w") as fh:
            dump_orbit(orbit, fh)
    print(json.dumps({"entries": len(orbit), "truncated": orbit.truncated, "mode": orbit.mode}))
    return 0


def _fit_r2(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2:
        return float("nan")
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = np.sum((y - y.mean()) ** 2)
    return float(1 - np.sum(resid ** 2) / ss) if ss > 0 else 1.0


def run_bench(family, lo, hi, repeats=3, orbit_mode="isoclass", cost=None):
    """Time the alternate-target pipeline over a graph family.

    ``linear`` sizes are node counts; ``repeater`` sizes are the parameter
    ``m`` (``2m`` core nodes, each with one leaf).  Each timing is the best
    of ``repeats`` runs.
    """
    from .solvers import AlternateTargetSolver

    if lo > hi:
        raise ParameterError(f"--min {lo} exceeds --max {hi}")
    if lo < 1:
        raise ParameterError("sizes must be positive")
    cost = cost or CostFunction({"unitaries": 1.0})
    rows = []
    for size in range(lo, hi + 1):
        g = linear_cluster(size) if family == "linear" else repeater_graph(size)
        best_t = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            solver = AlternateTargetSolver(cost=cost, orbit_mode=orbit_mode).fit(g)
            best_t = min(best_t, time.perf_counter() - t0)
        rows.append({
            "size": size,
            "n": g.n,
            "seconds": best_t,
            "alternatives": solver.n_alternatives_,
            "best_cost": solver.best_.cost,
            "log_seconds": float(np.log(best_t)),
            "log_n": float(np.log(g.n)),
        })
    return rows


def cmd_bench(args):
    cost = CostFunction.from_dict(_load_json(args.cost, "cost")) if args.cost else None
    rows = run_bench(args.family, args.min, args.max, args.repeats, args.orbit_mode, cost)
    fields = ["size", "n", "seconds", "alternatives", "best_cost", "log_seconds", "log_n"]
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    if args.gnuplot:
        _write(args.gnuplot, _gnuplot_script(args.out, args.family))
    n = [r["n"] for r in rows]
    ls = [r["log_seconds"] for r in rows]
    print(json.dumps({
        "family": args.family,
        "rows": len(rows),
        "r2_semilog": _fit_r2(n, ls),
        "r2_loglog": _fit_r2(np.log(n), ls),
    }))
    return 0


def _gnuplot_script(csv_path, family):
    return (
        "set datafile separator ','\n"
        f"set title '{family} family runtime'\n"
        "set multiplot layout 1,2\n"
        "set logscale y\nset xlabel 'n'\nset ylabel 'seconds'\n"
        f"plot '{csv_path}' using 2:3 skip 1 with linespoints title 'semi-log'\n"
        "set logscale xy\n"
        f"plot '{csv_path}' using 2:3 skip 1 with linespoints title 'log-log'\n"
        "unset multiplot\n"
    )


def cmd_convert(args):
    src = args.src
    if args.from_ == "graph":
        g = _load_graph(src)
        tab, rho = None, None
    elif args.from_ == "qasm-state":
        circuit = from_qasm(_read(src))
        tab = simulate(circuit, "stabilizer", seed=args.seed)
        g, rho = None, None
    else:
        rho = DensityMatrix.from_csv(_read(src))
        g, tab = None, None

    if args.to == "graph":
        if g is None:
            g = stabilizer_to_graph(tab) if tab is not None else density_to_graph(rho, delta=args.delta)
        text = g.to_json() + "\n"
    elif args.to == "stabilizer":
        if tab is None:
            tab = graph_to_stabilizer(g if g is not None else density_to_graph(rho, delta=args.delta))
        text = tab.to_text()
    else:
        if rho is None:
            rho = graph_to_density(g) if g is not None else stabilizer_to_density(tab)
        text = rho.to_csv()
    _write(args.out, text)
    return 0


# -- parser ------------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="emitgraph", description="Emitter-based photonic graph-state circuits.")
    p.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate an OpenQASM circuit")
    s.add_argument("circuit")
    s.add_argument("--backend", choices=["dense", "stabilizer", "mixed"], default="dense")
    s.add_argument("--noise")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="state file (CSV for dense, tableau text otherwise)")
    s.add_argument("--target", help="graph JSON to compare against")
    s.add_argument("--allow-large", action="store_true", help="lift the dense qubit cap")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("solve", help="synthesize circuits for a graph target")
    s.add_argument("target")
    s.add_argument("--solver", choices=sorted(SOLVERS), required=True)
    s.add_argument("--cost")
    s.add_argument("--noise")
    s.add_argument("--config", help="solver run-config JSON")
    s.add_argument("--budget", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--iterations", type=int)
    s.add_argument("--population", type=int)
    s.add_argument("--ordering", choices=["identity", "exhaustive", "sampled"])
    s.add_argument("--orbit-mode", dest="orbit_mode", choices=["isoclass", "labeled"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("orbit", help="enumerate the local-complementation orbit")
    s.add_argument("target")
    s.add_argument("--max", type=int)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--labeled", dest="mode", action="store_const", const="labeled")
    mode.add_argument("--isoclass", dest="mode", action="store_const", const="isoclass")
    s.set_defaults(mode="labeled")
    s.add_argument("--out")
    s.set_defaults(func=cmd_orbit)

    s = sub.add_parser(
        "bench",
        help="time the alternate-target pipeline",
        description="Sizes are node counts for 'linear' and the core parameter m for 'repeater' "
        "(2m fully connected core nodes, each with one leaf; emission order alternates leaf, core).",
    )
    s.add_argument("--family", choices=["linear", "repeater"], required=True)
    s.add_argument("--min", type=int, required=True)
    s.add_argument("--max", type=int, required=True)
    s.add_argument("--repeats", type=int, default=3)
    s.add_argument("--orbit-mode", dest="orbit_mode", choices=["isoclass", "labeled"], default="isoclass")
    s.add_argument("--cost")
    s.add_argument("--gnuplot", help="also write a gnuplot script")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("convert", help="convert between state representations")
    s.add_argument("src")
    s.add_argument("--from", dest="from_", choices=["graph", "qasm-state", "density"], required=True)
    s.add_argument("--to", choices=["graph", "stabilizer", "density"], required=True)
    s.add_argument("--delta", type=float, default=0.49)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_convert)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QasmParseError, UnsupportedGateError, ParameterError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValidationError, ConversionMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except EmitGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
