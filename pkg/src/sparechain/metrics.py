"""Cost rates and resilience figures computed from stationary solutions.

All cost rates are in M$/day. Per-year inputs are divided by 365.25.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .markov import mean_state, states
from .orbital import DAYS_PER_YEAR, fuel_mass, hohmann_delta_v

USD_PER_MUSD = 1e6


@dataclass(frozen=True)
class CostParams:
    c_build: float = 0.5  # M$/satellite
    c_hold_c: float = 0.5  # M$/satellite/year
    c_hold_p: float = 0.5  # M$/satellite/year
    c_fuel: float = 0.001  # M$/kg
    c_trans: float = 0.5  # M$ per transfer
    c_lv_unit: float = 6500.0  # $/kg
    c_lv_full: float = 67.0  # M$
    m_payload: float = 18500.0  # kg
    m_sat: float = 150.0  # kg
    m_bus: float = 100.0  # kg
    v_ex: float = 2.16  # km/s
    rideshare: bool = False

    def __post_init__(self):
        for name, value in asdict(self).items():
            if name == "rideshare":
                continue
            if value < 0:
                raise ValueError(f"cost parameter {name} must be non-negative, got {value}")
        if not self.m_payload > 0:
            raise ValueError("payload capacity must be positive")
        if not self.v_ex > 0:
            raise ValueError("exhaust velocity must be positive")


@dataclass(frozen=True)
class CostBreakdown:
    c_build: float
    c_hold: float
    c_trans: float | None
    c_launch: float

    @property
    def c_total(self) -> float:
        return self.c_build + self.c_hold + (self.c_trans or 0.0) + self.c_launch

    def to_dict(self) -> dict:
        return {"c_build": self.c_build, "c_hold": self.c_hold, "c_trans": self.c_trans,
                "c_launch": self.c_launch, "c_total": self.c_total, "unit": "M$/day"}


@dataclass(frozen=True)
class ResilienceMetrics:
    shortage_c: float
    stockout_p: float | None
    mean_c: float
    mean_p: float | None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BatchMass:
    """Mass budget of one parking-orbit launch."""

    delta_v: float
    m_dry: float  # one batch: q_c satellites plus a transfer bus
    m_fuel: float  # one batch
    m_total: float  # q_p batches


def expected_shortage(pi_rc_c, n_nominal: int) -> float:
    """Time-averaged number of operational slots left empty in a plane."""
    pi = np.asarray(pi_rc_c, dtype=float)
    deficit = np.clip(n_nominal - states(pi.size - 1), 0, None)
    return float(deficit @ pi)


def stockout_probability(pi_rc_p) -> float:
    """Long-run fraction of time a parking orbit is empty (last entry, descending order)."""
    return float(np.asarray(pi_rc_p, dtype=float)[-1])


def mean_stock(pi_rc) -> float:
    return mean_state(pi_rc)


def expected_excess(pi_rc_c, n_nominal: int) -> float:
    pi = np.asarray(pi_rc_c, dtype=float)
    excess = np.clip(states(pi.size - 1) - n_nominal, 0, None)
    return float(excess @ pi)


def batch_mass(q_c: int, q_p: int, a_p: float, a_c: float, costs: CostParams, constants) -> BatchMass:
    dv = hohmann_delta_v(a_p, a_c, constants)
    m_dry = q_c * costs.m_sat + costs.m_bus
    m_fuel = fuel_mass(m_dry, dv, costs.v_ex)
    return BatchMass(delta_v=dv, m_dry=m_dry, m_fuel=m_fuel, m_total=(m_fuel + m_dry) * q_p)


def launch_price(m_total: float, costs: CostParams) -> float:
    """Price (M$) of one parking-orbit launch."""
    if costs.rideshare:
        return min(costs.c_lv_unit * m_total / USD_PER_MUSD, costs.c_lv_full)
    return costs.c_lv_full


def cost_breakdown(solution, config) -> CostBreakdown:
    """Operating cost rates of the indirect strategy.

    ``solution`` is a :class:`~sparechain.engine.CoupledSolution` and
    ``config`` the :class:`~sparechain.config.ScenarioConfig` it was solved for.
    """
    geo, costs, pol = config.geometry, config.costs, config.policy
    inplane, parking = solution.inplane, solution.parking
    mass = batch_mass(pol.q_c, pol.q_p, geo.a_p(config.constants), geo.a_c(config.constants),
                      costs, config.constants)

    c_build = costs.c_build * geo.n_orbit_p * pol.q_c * pol.q_p / parking.tau_rc
    hold_c = costs.c_hold_c * geo.n_orbit_c * expected_excess(inplane.pi_rc, geo.n_sat_nominal)
    hold_p = costs.c_hold_p * geo.n_orbit_p * pol.q_c * mean_state(parking.pi_rc)
    c_hold = (hold_c + hold_p) / DAYS_PER_YEAR
    transferred = mean_state(inplane.pi_q) - mean_state(inplane.pi_r)  # satellites per contact
    c_trans = (geo.n_orbit_c / (inplane.tau_rc * pol.q_c)
               * (costs.c_fuel * mass.m_fuel + costs.c_trans) * transferred)
    c_launch = geo.n_orbit_p / parking.tau_rc * launch_price(mass.m_total, costs)
    return CostBreakdown(c_build=c_build, c_hold=c_hold, c_trans=c_trans, c_launch=c_launch)


def cost_breakdown_direct(solution, config) -> CostBreakdown:
    """Operating cost rates of the direct strategy: no parking orbits, no transfers."""
    geo, costs, direct = config.geometry, config.costs, config.direct
    c_build = costs.c_build * geo.n_orbit_c * direct.q / solution.tau_rc
    c_hold = (costs.c_hold_c * geo.n_orbit_c
              * expected_excess(solution.pi_rc, geo.n_sat_nominal)) / DAYS_PER_YEAR
    c_launch = geo.n_orbit_c / solution.tau_rc * direct.c_lv_full
    return CostBreakdown(c_build=c_build, c_hold=c_hold, c_trans=None, c_launch=c_launch)


def resilience(solution, n_nominal: int) -> ResilienceMetrics:
    return ResilienceMetrics(
        shortage_c=expected_shortage(solution.inplane.pi_rc, n_nominal),
        stockout_p=stockout_probability(solution.parking.pi_rc),
        mean_c=mean_state(solution.inplane.pi_rc),
        mean_p=mean_state(solution.parking.pi_rc),
    )


def resilience_direct(solution, n_nominal: int) -> ResilienceMetrics:
    return ResilienceMetrics(
        shortage_c=expected_shortage(solution.pi_rc, n_nominal),
        stockout_p=None, mean_c=mean_state(solution.pi_rc), mean_p=None,
    )
