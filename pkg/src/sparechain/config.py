"""Scenario configuration: the single input artifact.

A scenario is strict JSON with a top-level ``"schema": 1``. Every section is
optional and falls back to the baseline mega-constellation case; unknown keys
are rejected so that a misspelled parameter never silently takes its default.

Example::

    {
      "schema": 1,
      "geometry": {"h_c": 1200, "h_p": 735, "inclination_deg": 50,
                   "n_orbit_c": 40, "n_orbit_p": 1, "n_sat_nominal": 40},
      "stochastic": {"lambda_sat_per_year": 0.05, "mu_lv": 20, "tau_lv": 20, "tau_mc": 0.5},
      "policy": {"q_c": 4, "r_c": 40, "q_p": 23, "r_p": 2}
    }
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .exceptions import ConfigError, SparePolicyError
from .metrics import CostParams
from .orbital import ConstellationGeometry, EarthConstants

SCHEMA_VERSION = 1

DESIGN_GENES = ("q_c", "r_c", "q_p", "r_p", "n_orbit_p", "h_p")


@dataclass(frozen=True)
class StochasticParams:
    lambda_sat_per_year: float = 0.05
    mu_lv: float = 20.0  # days
    tau_lv: float = 20.0  # days
    tau_mc: float = 0.5  # days

    def __post_init__(self):
        if not self.lambda_sat_per_year > 0:
            raise ConfigError("lambda_sat_per_year must be > 0 (a failure-free chain has no "
                              "unique stationary distribution)")
        if not self.mu_lv > 0:
            raise ConfigError("mu_lv must be > 0")
        if self.tau_lv < 0:
            raise ConfigError("tau_lv must be >= 0")
        if not self.tau_mc > 0:
            raise ConfigError("tau_mc must be > 0")
        # snap the processing delay onto the step grid
        k_lv = math.floor(self.tau_lv / self.tau_mc + 0.5)
        object.__setattr__(self, "tau_lv", k_lv * self.tau_mc)


@dataclass(frozen=True)
class IndirectPolicy:
    q_c: int = 4
    r_c: int = 40
    q_p: int = 23
    r_p: int = 2

    def __post_init__(self):
        _require_int(self, ("q_c", "r_c", "q_p", "r_p"))
        if self.q_c < 1 or self.q_p < 1 or self.r_c < 0 or self.r_p < 0:
            raise ConfigError(f"invalid policy {self}")


@dataclass(frozen=True)
class DirectParams:
    """Direct strategy: a small launcher resupplies each plane."""

    q: int = 2
    r: int = 39
    mu_lv: float = 10.0
    tau_lv: float = 10.0
    c_lv_full: float = 7.5  # M$
    m_payload: float = 300.0  # kg

    def __post_init__(self):
        _require_int(self, ("q", "r"))
        if self.q < 1 or self.r < 0:
            raise ConfigError(f"invalid direct policy q={self.q}, r={self.r}")
        if not self.mu_lv > 0 or self.tau_lv < 0:
            raise ConfigError("direct lead-time parameters out of range")
        if self.c_lv_full < 0 or not self.m_payload > 0:
            raise ConfigError("direct launch cost/payload out of range")


@dataclass(frozen=True)
class GaParams:
    population: int = 64
    generations: int = 120
    crossover_rate: float = 0.9
    mutation_rate: float = 0.15
    tournament_size: int = 3
    seed: int = 20240811
    penalty_weight: float = 10.0
    polish: bool = True  # coordinate search from the GA's best design

    def __post_init__(self):
        if self.population < 4:
            raise ConfigError("GA population must be >= 4")
        if self.generations < 0 or self.tournament_size < 1:
            raise ConfigError("GA generations/tournament size out of range")
        if not (0 <= self.crossover_rate <= 1 and 0 <= self.mutation_rate <= 1):
            raise ConfigError("GA rates must lie in [0, 1]")
        if self.penalty_weight < 0:
            raise ConfigError("penalty weight must be >= 0")


def _default_bounds():
    return {"q_c": (1, 20), "r_c": (35, 45), "q_p": (1, 40), "r_p": (0, 10),
            "n_orbit_p": (1, 20), "h_p": (500, 1100)}


def _default_direct_bounds():
    return {"q": (1, 20), "r": (35, 45)}


@dataclass(frozen=True)
class OptimizerParams:
    bounds: dict = field(default_factory=_default_bounds)
    direct_bounds: dict = field(default_factory=_default_direct_bounds)
    epsilon_1: float = 0.25
    epsilon_2: Any = "auto"  # "auto" -> 1 / (q_p + r_p + 1) per candidate
    ga: GaParams = field(default_factory=GaParams)

    def __post_init__(self):
        object.__setattr__(self, "bounds", _check_bounds(self.bounds, DESIGN_GENES))
        object.__setattr__(self, "direct_bounds", _check_bounds(self.direct_bounds, ("q", "r")))
        if not (self.epsilon_2 == "auto" or isinstance(self.epsilon_2, (int, float))):
            raise ConfigError("epsilon_2 must be a number or \"auto\"")

    def epsilon_2_for(self, q_p: int, r_p: int) -> float:
        if self.epsilon_2 == "auto":
            return 1.0 / (q_p + r_p + 1)
        return float(self.epsilon_2)


@dataclass(frozen=True)
class SimParams:
    horizon_years: float = 20.0
    n_replications: int = 20
    seed: int = 20240811
    warmup_years: float = 2.0

    def __post_init__(self):
        if not self.horizon_years > self.warmup_years >= 0:
            raise ConfigError("need horizon_years > warmup_years >= 0")
        if self.n_replications < 1:
            raise ConfigError("n_replications must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SolverParams:
    tol: float = 1e-10
    max_iter: int = 200


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: ConstellationGeometry = field(default_factory=lambda: ConstellationGeometry(
        h_c=1200.0, h_p=735.0, inclination=math.radians(50.0),
        n_orbit_c=40, n_orbit_p=1, n_sat_nominal=40))
    constants: EarthConstants = field(default_factory=EarthConstants)
    stochastic: StochasticParams = field(default_factory=StochasticParams)
    policy: IndirectPolicy = field(default_factory=IndirectPolicy)
    direct: DirectParams = field(default_factory=DirectParams)
    costs: CostParams = field(default_factory=CostParams)
    optimizer: OptimizerParams = field(default_factory=OptimizerParams)
    sim: SimParams = field(default_factory=SimParams)
    solver: SolverParams = field(default_factory=SolverParams)

    @classmethod
    def baseline(cls, **overrides) -> "ScenarioConfig":
        """Baseline case: 40x40 constellation at 1200 km, failure rate 0.05/yr."""
        return replace(cls(), **overrides) if overrides else cls()

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("scenario must be a JSON object")
        data = dict(data)
        schema = data.pop("schema", None)
        if schema != SCHEMA_VERSION:
            raise ConfigError(f"unsupported or missing schema version {schema!r}; expected 1")
        _reject_unknown(data, [f.name for f in fields(cls)], "scenario")
        kwargs = {}
        try:
            if "geometry" in data:
                geo = dict(data["geometry"])
                _reject_unknown(geo, ["h_c", "h_p", "inclination_deg", "n_orbit_c",
                                      "n_orbit_p", "n_sat_nominal"], "geometry")
                base = cls().geometry
                kwargs["geometry"] = ConstellationGeometry(
                    h_c=float(geo.get("h_c", base.h_c)),
                    h_p=float(geo.get("h_p", base.h_p)),
                    inclination=math.radians(float(geo.get("inclination_deg",
                                                           math.degrees(base.inclination)))),
                    n_orbit_c=_as_int(geo.get("n_orbit_c", base.n_orbit_c), "n_orbit_c"),
                    n_orbit_p=_as_int(geo.get("n_orbit_p", base.n_orbit_p), "n_orbit_p"),
                    n_sat_nominal=_as_int(geo.get("n_sat_nominal", base.n_sat_nominal),
                                          "n_sat_nominal"),
                )
            for name, klass in (("constants", EarthConstants), ("stochastic", StochasticParams),
                                ("policy", IndirectPolicy), ("direct", DirectParams),
                                ("costs", CostParams), ("sim", SimParams),
                                ("solver", SolverParams)):
                if name in data:
                    kwargs[name] = _build(klass, data[name], name)
            if "optimizer" in data:
                opt = dict(data["optimizer"])
                _reject_unknown(opt, [f.name for f in fields(OptimizerParams)], "optimizer")
                if "ga" in opt:
                    opt["ga"] = _build(GaParams, opt["ga"], "optimizer.ga")
                for key in ("bounds", "direct_bounds"):
                    if key in opt:
                        defaults = (_default_bounds() if key == "bounds"
                                    else _default_direct_bounds())
                        defaults.update({k: tuple(v) for k, v in dict(opt[key]).items()})
                        opt[key] = defaults
                kwargs["optimizer"] = OptimizerParams(**opt)
        except ConfigError:
            raise
        except (SparePolicyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        geo = self.geometry
        out = {
            "schema": SCHEMA_VERSION,
            "geometry": {"h_c": geo.h_c, "h_p": geo.h_p,
                         "inclination_deg": math.degrees(geo.inclination),
                         "n_orbit_c": geo.n_orbit_c, "n_orbit_p": geo.n_orbit_p,
                         "n_sat_nominal": geo.n_sat_nominal},
        }
        for name in ("constants", "stochastic", "policy", "direct", "costs", "sim", "solver"):
            out[name] = dataclasses.asdict(getattr(self, name))
        opt = self.optimizer
        out["optimizer"] = {
            "bounds": {k: list(v) for k, v in opt.bounds.items()},
            "direct_bounds": {k: list(v) for k, v in opt.direct_bounds.items()},
            "epsilon_1": opt.epsilon_1, "epsilon_2": opt.epsilon_2,
            "ga": dataclasses.asdict(opt.ga),
        }
        return out

    def with_design(self, q_c=None, r_c=None, q_p=None, r_p=None, n_orbit_p=None,
                    h_p=None) -> "ScenarioConfig":
        """Copy with some indirect design variables replaced."""
        pol = self.policy
        policy = IndirectPolicy(
            q_c=pol.q_c if q_c is None else int(q_c), r_c=pol.r_c if r_c is None else int(r_c),
            q_p=pol.q_p if q_p is None else int(q_p), r_p=pol.r_p if r_p is None else int(r_p))
        geometry = replace(
            self.geometry,
            n_orbit_p=self.geometry.n_orbit_p if n_orbit_p is None else int(n_orbit_p),
            h_p=self.geometry.h_p if h_p is None else float(h_p))
        return replace(self, policy=policy, geometry=geometry)

    def with_direct(self, q=None, r=None) -> "ScenarioConfig":
        d = self.direct
        return replace(self, direct=replace(d, q=d.q if q is None else int(q),
                                            r=d.r if r is None else int(r)))

    def with_failure_rate(self, lambda_sat_per_year: float) -> "ScenarioConfig":
        return replace(self, stochastic=replace(self.stochastic,
                                                lambda_sat_per_year=lambda_sat_per_year))

    def design(self) -> dict:
        pol, geo = self.policy, self.geometry
        return {"q_c": pol.q_c, "r_c": pol.r_c, "q_p": pol.q_p, "r_p": pol.r_p,
                "n_orbit_p": geo.n_orbit_p, "h_p": geo.h_p}


def _reject_unknown(data: dict, allowed, section: str):
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")


def _as_int(value, name):
    if isinstance(value, bool) or not float(value).is_integer():
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return int(value)


def _require_int(obj, names):
    for name in names:
        value = getattr(obj, name)
        object.__setattr__(obj, name, _as_int(value, name))


def _build(klass, data, section):
    if not isinstance(data, dict):
        raise ConfigError(f"section {section} must be an object")
    _reject_unknown(data, [f.name for f in fields(klass)], section)
    return klass(**data)


def _check_bounds(bounds: dict, genes) -> dict:
    bounds = dict(bounds)
    _reject_unknown(bounds, genes, "bounds")
    missing = [g for g in genes if g not in bounds]
    if missing:
        raise ConfigError(f"missing bounds for {', '.join(missing)}")
    out = {}
    for gene in genes:
        lo, hi = bounds[gene]
        lo, hi = _as_int(lo, gene), _as_int(hi, gene)
        if lo > hi:
            raise ConfigError(f"bounds for {gene} are empty: [{lo}, {hi}]")
        out[gene] = (lo, hi)
    return out
