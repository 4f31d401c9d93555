"""Command-line interface: ``sparechain {analyze,simulate,compare,optimize,sweep} CONFIG``.

Exit status is 0 on success, 1 on a configuration or input error and 2 when
the coupled fixed point does not converge.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig
from .engine import solve_direct, solve_indirect
from .exceptions import ConfigError, NonConvergenceError, SparePolicyError
from .markov import states
from .metrics import cost_breakdown, cost_breakdown_direct, resilience, resilience_direct
from .optimizer import optimize, optimize_direct, sweep_failure_rate
from .simulator import SimStats, compare, run_monte_carlo

log = logging.getLogger("sparechain")

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 1, 2

UNITS = {"costs": "M$/day", "durations": "days", "parking stock": "batches",
         "plane stock": "satellites", "failure rate": "1/year"}


def _finite(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _finite(obj.tolist())
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_finite(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(report: dict, out):
    text = dumps(report)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
        log.info("wrote %s", out)


def write_histogram_csv(path, pmf_descending):
    """``state,probability`` rows, highest state first."""
    pmf = np.asarray(pmf_descending, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["state", "probability"])
        for s, p in zip(states(pmf.size - 1), pmf):
            w.writerow([int(s), repr(float(p))])


def _distribution(pi) -> dict:
    pi = np.asarray(pi, dtype=float)
    return {"states": states(pi.size - 1).tolist(), "probability": pi.tolist()}


def analysis_report(config: ScenarioConfig, strategy: str) -> tuple[dict, bool]:
    """JSON-ready report of one stationary analysis and whether it converged."""
    nbar = config.geometry.n_sat_nominal
    if strategy == "direct":
        sol = solve_direct(config)
        costs = cost_breakdown_direct(sol, config)
        report = {
            "strategy": "direct",
            "policy": {"q": config.direct.q, "r": config.direct.r},
            "distributions": {"plane_q": _distribution(sol.pi_q), "plane_r": _distribution(sol.pi_r),
                              "plane_time_average": _distribution(sol.pi_rc)},
            "durations": {"cycle_days": sol.tau_rc,
                          "inter_order_days": sol.k_io * config.stochastic.tau_mc,
                          "lead_time_days": sol.k_lt * config.stochastic.tau_mc},
            "costs": costs.to_dict(),
            "metrics": resilience_direct(sol, nbar).to_dict(),
            "convergence": {"converged": True, "stationary_residual": sol.residual},
        }
        return report, True

    sol = solve_indirect(config)
    costs = cost_breakdown(sol, config)
    park = sol.parking
    tau_mc = config.stochastic.tau_mc
    valid = sol.valid
    report = {
        "strategy": "indirect",
        "policy": config.design(),
        "distributions": {
            "plane_q": _distribution(sol.inplane.pi_q), "plane_r": _distribution(sol.inplane.pi_r),
            "plane_time_average": _distribution(sol.inplane.pi_rc),
            "parking_q": _distribution(park.pi_q), "parking_r": _distribution(park.pi_r),
            "parking_time_average": _distribution(park.pi_rc),
        },
        "kappa": sol.kappa.tolist(),
        "chi": sol.chi.tolist(),
        "durations": {
            "tau_c_days": sol.tau_c, "tau_p_days": sol.tau_p, "k_c": sol.k_c, "k_p": sol.k_p,
            "plane_cycle_days": sol.inplane.tau_rc, "parking_cycle_days": park.tau_rc,
            "inter_order_days": park.k_io * tau_mc, "lead_time_days": park.k_lt * tau_mc,
        },
        "costs": costs.to_dict(),
        "metrics": resilience(sol, nbar).to_dict(),
        "convergence": {
            "converged": sol.converged, "iterations": sol.iterations,
            "kappa_change": sol.residual, "tolerance": config.solver.tol,
            "valid": valid,
            "validity_threshold": 1.0 / park.pi_rc.size,
        },
    }
    if not sol.converged:
        report["convergence"]["explanation"] = (
            f"availability did not settle within {config.solver.max_iter} iterations; "
            f"parking stockout {sol.stockout_p:.4f} vs validity threshold "
            f"{1.0 / park.pi_rc.size:.4f} ({'inside' if valid else 'outside'} the trusted range)")
    return report, sol.converged


def cmd_analyze(args) -> int:
    config = ScenarioConfig.load(args.config)
    report, converged = analysis_report(config, args.strategy)
    report["units"] = UNITS
    _emit(report, args.out)
    if not converged:
        log.error(report["convergence"]["explanation"])
        return EXIT_NONCONVERGED
    return EXIT_OK


def _simulate(config, args) -> SimStats:
    return run_monte_carlo(config, args.years, args.reps, args.seed, args.warmup, n_jobs=args.jobs)


def _hist_paths(out):
    stem = Path(out)
    base = stem.with_suffix("")
    return base.with_name(base.name + "_hist_c.csv"), base.with_name(base.name + "_hist_p.csv")


def cmd_simulate(args) -> int:
    config = ScenarioConfig.load(args.config)
    stats = _simulate(config, args)
    report = stats.to_dict()
    report["units"] = UNITS
    _emit(report, args.out)
    if args.out is not None:
        path_c, path_p = _hist_paths(args.out)
        write_histogram_csv(path_c, stats.histogram_c[::-1])
        write_histogram_csv(path_p, stats.histogram_p[::-1])
    return EXIT_OK


def cmd_compare(args) -> int:
    config = ScenarioConfig.load(args.config)
    sol = solve_indirect(config)
    if args.sim is not None:
        try:
            data = json.loads(Path(args.sim).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read simulation report {args.sim}: {exc}") from exc
        data.pop("units", None)
        stats = SimStats.from_dict(data)
    else:
        stats = _simulate(config, args)
    nbar = config.geometry.n_sat_nominal
    err = compare(sol, stats, nbar)
    analysis = resilience(sol, nbar)
    rows = []
    for name, a, s, e, kind in (
            ("mean_c", analysis.mean_c, stats.mean_c, err.rel_err_mean_c, "relative"),
            ("mean_p", analysis.mean_p, stats.mean_p, err.rel_err_mean_p, "relative"),
            ("shortage_c", analysis.shortage_c, stats.shortage_c, err.rel_err_shortage_c,
             "relative"),
            ("stockout_p", analysis.stockout_p, stats.stockout_p, err.abs_err_stockout_pp,
             "percentage points")):
        rows.append({"metric": name, "analysis": a, "simulation": s, "error": e, "error_kind": kind})
    report = {"rows": rows, "valid": err.valid, "converged": sol.converged,
              "n_replications": stats.n_replications, "horizon_years": stats.horizon_years,
              "seed": stats.seed, "units": UNITS}
    _emit(report, args.out)
    return EXIT_OK if sol.converged else EXIT_NONCONVERGED


def write_history_csv(path, history):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["generation", "best_cost", "feasible_count"])
        for h in history:
            w.writerow([h.generation, repr(h.best_cost) if math.isfinite(h.best_cost) else "",
                        h.feasible_count])


def cmd_optimize(args) -> int:
    config = ScenarioConfig.load(args.config)
    if args.strategy == "direct":
        result = optimize_direct(config, n_jobs=args.jobs)
    else:
        result = optimize(config, n_jobs=args.jobs)
    report = {"strategy": args.strategy, "best": result.best.to_dict(),
              "evaluations": result.evaluations, "units": UNITS}
    _emit(report, args.out)
    if args.history is not None:
        write_history_csv(args.history, result.history)
    if not result.best.feasible:
        log.warning("no feasible design found; reported design is the least penalized")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = ScenarioConfig.load(args.config)
    try:
        rates = [float(r) for r in args.rates.split(",") if r.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --rates list: {exc}") from exc
    if not rates:
        raise ConfigError("--rates is empty")
    rows = sweep_failure_rate(config, rates, n_jobs=args.jobs)
    _emit({"rows": [r.to_dict() for r in rows], "units": UNITS}, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparechain", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="scenario JSON file")
        sp.add_argument("--out", help="output JSON path (default: stdout)")
        sp.set_defaults(func=func)
        return sp

    def sim_flags(sp):
        sp.add_argument("--years", type=float, help="horizon in years")
        sp.add_argument("--reps", type=int, help="number of replications")
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--warmup", type=float, help="warm-up years discarded")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")

    sp = common("analyze", cmd_analyze, "stationary analysis of one policy")
    sp.add_argument("--strategy", choices=("indirect", "direct"), default="indirect")

    sp = common("simulate", cmd_simulate, "Monte Carlo simulation (also writes histogram CSVs)")
    sim_flags(sp)

    sp = common("compare", cmd_compare, "analysis against simulation")
    sim_flags(sp)
    sp.add_argument("--sim", help="reuse a JSON report written by 'simulate'")

    sp = common("optimize", cmd_optimize, "design optimization")
    sp.add_argument("--strategy", choices=("indirect", "direct"), default="indirect")
    sp.add_argument("--history", help="per-generation CSV path")
    sp.add_argument("--jobs", type=int, default=1)

    sp = common("sweep", cmd_sweep, "re-optimize both strategies over failure rates")
    sp.add_argument("--rates", required=True, help="comma-separated failure rates per year")
    sp.add_argument("--jobs", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"sparechain: did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ConfigError as exc:
        print(f"sparechain: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SparePolicyError, ValueError) as exc:
        print(f"sparechain: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
