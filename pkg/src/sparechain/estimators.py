"""Estimator-style wrappers.

Each class takes its knobs in ``__init__`` (so ``get_params``/``set_params``
and ``sklearn.base.clone`` work) and does its work in ``fit(X)``, where ``X``
is a scenario: a :class:`~sparechain.config.ScenarioConfig`, a mapping in the
config format, or a path to a JSON config file. Fitted state lives in
attributes with a trailing underscore.
"""
from __future__ import annotations

from dataclasses import replace
from os import PathLike

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import optimizer as _opt
from .config import GaParams, ScenarioConfig
from .engine import solve_direct, solve_indirect
from .exceptions import ConfigError, NonConvergenceError
from .metrics import cost_breakdown, cost_breakdown_direct, resilience, resilience_direct
from .simulator import compare, run_monte_carlo


def check_scenario(X) -> ScenarioConfig:
    """Coerce ``X`` into a validated :class:`ScenarioConfig`."""
    if isinstance(X, ScenarioConfig):
        return X
    if isinstance(X, dict):
        return ScenarioConfig.from_dict(X)
    if isinstance(X, (str, PathLike)):
        return ScenarioConfig.load(X)
    if X is None:
        return ScenarioConfig.baseline()
    raise ConfigError(f"cannot interpret {type(X).__name__} as a scenario")


class IndirectStrategy(BaseEstimator):
    """Stationary analysis of the two-echelon (parking orbit) strategy.

    Design arguments left as ``None`` keep the scenario's values.
    """

    def __init__(self, q_c=None, r_c=None, q_p=None, r_p=None, n_orbit_p=None, h_p=None,
                 strict=False):
        self.q_c = q_c
        self.r_c = r_c
        self.q_p = q_p
        self.r_p = r_p
        self.n_orbit_p = n_orbit_p
        self.h_p = h_p
        self.strict = strict

    def _config(self, X):
        return check_scenario(X).with_design(self.q_c, self.r_c, self.q_p, self.r_p,
                                             self.n_orbit_p, self.h_p)

    def fit(self, X=None, y=None):
        cfg = self._config(X)
        sol = solve_indirect(cfg)
        if self.strict and not sol.converged:
            raise NonConvergenceError(
                f"fixed point not reached after {sol.iterations} iterations")
        self.config_ = cfg
        self.solution_ = sol
        self.costs_ = cost_breakdown(sol, cfg)
        self.metrics_ = resilience(sol, cfg.geometry.n_sat_nominal)
        self.converged_ = sol.converged
        return self

    def transform(self, X=None):
        """Time-averaged plane and parking distributions, descending state order."""
        check_is_fitted(self, "solution_")
        sol = self.solution_ if X is None else solve_indirect(self._config(X))
        return sol.inplane.pi_rc, sol.parking.pi_rc

    def predict(self, X=None) -> float:
        """Total cost rate in M$/day."""
        check_is_fitted(self, "costs_")
        if X is None:
            return self.costs_.c_total
        cfg = self._config(X)
        return cost_breakdown(solve_indirect(cfg), cfg).c_total

    def score(self, X=None, y=None) -> float:
        return -self.predict(X)


class DirectStrategy(BaseEstimator):
    """Single-echelon strategy: launch ``q`` spares straight into each plane when it holds ``<= r``."""

    def __init__(self, q=None, r=None):
        self.q = q
        self.r = r

    def _config(self, X):
        return check_scenario(X).with_direct(self.q, self.r)

    def fit(self, X=None, y=None):
        cfg = self._config(X)
        self.config_ = cfg
        self.solution_ = solve_direct(cfg)
        self.costs_ = cost_breakdown_direct(self.solution_, cfg)
        self.metrics_ = resilience_direct(self.solution_, cfg.geometry.n_sat_nominal)
        return self

    def transform(self, X=None):
        check_is_fitted(self, "solution_")
        return self.solution_.pi_rc if X is None else solve_direct(self._config(X)).pi_rc

    def predict(self, X=None) -> float:
        check_is_fitted(self, "costs_")
        if X is None:
            return self.costs_.c_total
        cfg = self._config(X)
        return cost_breakdown_direct(solve_direct(cfg), cfg).c_total

    def score(self, X=None, y=None) -> float:
        return -self.predict(X)


class MonteCarloSimulator(BaseEstimator):
    """Monte Carlo replications of the indirect strategy; ``None`` falls back to the scenario."""

    def __init__(self, horizon_years=None, n_replications=None, seed=None, warmup_years=None,
                 n_jobs=1):
        self.horizon_years = horizon_years
        self.n_replications = n_replications
        self.seed = seed
        self.warmup_years = warmup_years
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        cfg = check_scenario(X)
        self.config_ = cfg
        self.stats_ = run_monte_carlo(cfg, self.horizon_years, self.n_replications, self.seed,
                                      self.warmup_years, n_jobs=self.n_jobs)
        return self

    def transform(self, X=None):
        """Empirical plane and parking histograms, descending state order."""
        check_is_fitted(self, "stats_")
        return np.asarray(self.stats_.histogram_c)[::-1], np.asarray(self.stats_.histogram_p)[::-1]

    def score(self, analysis, y=None):
        """Error report of ``analysis`` (an :class:`IndirectStrategy` or solution) against the runs."""
        check_is_fitted(self, "stats_")
        if isinstance(analysis, IndirectStrategy):
            check_is_fitted(analysis, "solution_")
            analysis = analysis.solution_
        return compare(analysis, self.stats_, self.config_.geometry.n_sat_nominal)


class PolicyOptimizer(BaseEstimator):
    """GA search over indirect designs (or exhaustive search over direct ``(q, r)``)."""

    def __init__(self, strategy="indirect", population=None, generations=None, seed=None,
                 crossover_rate=None, mutation_rate=None, tournament_size=None,
                 penalty_weight=None, bounds=None, n_jobs=1):
        self.strategy = strategy
        self.population = population
        self.generations = generations
        self.seed = seed
        self.crossover_rate = crossover_rate
        self.mutation_rate = mutation_rate
        self.tournament_size = tournament_size
        self.penalty_weight = penalty_weight
        self.bounds = bounds
        self.n_jobs = n_jobs

    def _ga_params(self, cfg) -> GaParams:
        names = ("population", "generations", "seed", "crossover_rate", "mutation_rate",
                 "tournament_size", "penalty_weight")
        overrides = {n: getattr(self, n) for n in names if getattr(self, n) is not None}
        return replace(cfg.optimizer.ga, **overrides)

    def fit(self, X=None, y=None):
        if self.strategy not in ("indirect", "direct"):
            raise ValueError(f"strategy must be 'indirect' or 'direct', got {self.strategy!r}")
        cfg = check_scenario(X)
        ga = self._ga_params(cfg)
        # the penalty weight is read from the scenario during evaluation
        cfg = replace(cfg, optimizer=replace(cfg.optimizer, ga=ga))
        if self.strategy == "indirect":
            result = _opt.optimize(cfg, ga, self.bounds, n_jobs=self.n_jobs)
        else:
            result = _opt.optimize_direct(cfg, self.bounds, ga, n_jobs=self.n_jobs)
        self.config_ = cfg
        self.result_ = result
        self.best_ = result.best
        self.history_ = result.history
        return self

    def predict(self, X=None) -> dict:
        """Best design found."""
        check_is_fitted(self, "best_")
        return dict(self.best_.design)

    def score(self, X=None, y=None) -> float:
        check_is_fitted(self, "best_")
        return -self.best_.c_total
