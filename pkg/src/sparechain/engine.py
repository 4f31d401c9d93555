"""Coupled plane/parking solve for the indirect strategy, and the direct strategy.

The plane chain needs the parking availability ``kappa`` seen at contacts; the
parking chain needs the plane batch demand ``chi``. :func:`solve_indirect`
alternates the two solves, starting from full availability, until ``kappa``
stops moving.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import inplane, parking
from .markov import stationary_residual
from .orbital import alignment_periods, quantize_periods
from .stochastic import FailureModel, LeadTimeModel, failure_matrix, lead_time_grid

log = logging.getLogger(__name__)


@dataclass
class EchelonSolution:
    """Stationary distributions of one echelon (descending state order)."""

    pi_q: np.ndarray
    pi_r: np.ndarray
    pi_rc: np.ndarray
    tau_rc: float  # days
    residual: float = 0.0
    pi_io: np.ndarray | None = None
    pi_lt: np.ndarray | None = None
    k_io: float | None = None
    k_lt: float | None = None


@dataclass
class CoupledSolution:
    inplane: EchelonSolution
    parking: parking.ParkingCycleSolution
    kappa: np.ndarray
    chi: np.ndarray
    iterations: int
    residual: float
    converged: bool
    k_c: int
    k_p: int
    tau_c: float
    tau_p: float
    grid: object
    alpha: float
    residual_history: list = field(default_factory=list)

    @property
    def stockout_p(self) -> float:
        return float(self.parking.pi_rc[-1])

    @property
    def valid(self) -> bool:
        """Stockout heuristic: the i.i.d.-parking assumption is trusted below ``1/(N_sat_p+1)``."""
        return self.stockout_p < 1.0 / self.parking.pi_rc.size


@dataclass
class IndirectInputs:
    """Everything :func:`solve_indirect` derives from a scenario before iterating."""

    inplane_policy: inplane.InplanePolicy
    parking_policy: parking.ParkingPolicy
    P_f: np.ndarray
    P_fc: np.ndarray
    k_c: int
    k_p: int
    tau_c: float
    tau_p: float
    tau_mc: float
    grid: object
    alpha: float


def prepare_indirect(config) -> IndirectInputs:
    stoch, geo, pol = config.stochastic, config.geometry, config.policy
    tau_c, tau_p = alignment_periods(geo, config.constants)
    k_c, k_p = quantize_periods(tau_c, tau_p, stoch.tau_mc)
    ip = inplane.InplanePolicy(pol.q_c, pol.r_c)
    pp = parking.ParkingPolicy(pol.q_p, pol.r_p)
    fm = FailureModel.from_yearly(stoch.lambda_sat_per_year, stoch.tau_mc, geo.n_sat_nominal)
    lt = LeadTimeModel(stoch.mu_lv, stoch.tau_lv, stoch.tau_mc)
    P_f = failure_matrix(ip.n_sat, fm)
    return IndirectInputs(
        inplane_policy=ip, parking_policy=pp, P_f=P_f,
        P_fc=np.linalg.matrix_power(P_f, k_c), k_c=k_c, k_p=k_p, tau_c=tau_c, tau_p=tau_p,
        tau_mc=stoch.tau_mc, grid=lead_time_grid(lt, k_p), alpha=lt.alpha,
    )


def sweep(inputs: IndirectInputs, kappa, pi0_c=None, pi0_p=None):
    """One pass: plane chain under ``kappa``, then parking chain under the resulting demand."""
    ip, pp = inputs.inplane_policy, inputs.parking_policy
    P_qc = inplane.replenishment_matrix(kappa, ip)
    pi_q, pi_r, _ = inplane.solve_cycle(inputs.P_f, P_qc, inputs.k_c, P_fc=inputs.P_fc, pi0=pi0_c)
    residual_c = stationary_residual(P_qc @ inputs.P_fc, pi_q)
    pi_rc = inplane.cycle_average(pi_q, inputs.P_f, inputs.k_c)
    chi = inplane.demand_pmf(pi_r, ip)
    P_fp = parking.demand_failure_matrix(chi, pp)
    park = parking.solve_parking(P_fp, pp, inputs.grid, inputs.alpha, inputs.tau_mc,
                                 ip.j_max, pi0=pi0_p)
    plane = EchelonSolution(pi_q=pi_q, pi_r=pi_r, pi_rc=pi_rc,
                            tau_rc=inputs.k_c * inputs.tau_mc, residual=residual_c)
    return plane, park, chi


def solve_indirect(config, tol: float | None = None, max_iter: int | None = None) -> CoupledSolution:
    """Fixed-point solve of the coupled chains.

    Non-convergence is reported through ``converged=False`` rather than raised,
    so that callers such as the optimizer can penalize the design.
    """
    tol = config.solver.tol if tol is None else tol
    max_iter = config.solver.max_iter if max_iter is None else max_iter
    inputs = prepare_indirect(config)
    kappa = np.ones(inputs.inplane_policy.j_max + 1)
    history = []
    pi_c = pi_p = None
    converged = False
    for k in range(1, max_iter + 1):
        plane, park, chi = sweep(inputs, kappa, pi_c, pi_p)
        pi_c, pi_p = plane.pi_q, park.pi_q
        delta = float(np.abs(park.kappa - kappa).max())
        history.append(delta)
        log.debug("fixed-point iteration %d: |dkappa| = %.3e", k, delta)
        if delta <= tol:
            converged = True
            break
        kappa = park.kappa
    # kappa is the availability the returned plane solution was computed under
    if not converged:
        log.warning("fixed point did not converge in %d iterations (|dkappa| = %.3e)",
                    max_iter, history[-1])
    return CoupledSolution(
        inplane=plane, parking=park, kappa=kappa, chi=chi, iterations=k, residual=history[-1],
        converged=converged, k_c=inputs.k_c, k_p=inputs.k_p, tau_c=inputs.tau_c,
        tau_p=inputs.tau_p, grid=inputs.grid, alpha=inputs.alpha, residual_history=history,
    )


def direct_inputs(config):
    """Failure matrix, policy, grid and ``alpha`` for the direct strategy (review every step)."""
    stoch, geo, d = config.stochastic, config.geometry, config.direct
    policy = parking.ParkingPolicy(d.q, d.r)
    fm = FailureModel.from_yearly(stoch.lambda_sat_per_year, stoch.tau_mc, geo.n_sat_nominal)
    lt = LeadTimeModel(d.mu_lv, d.tau_lv, stoch.tau_mc)
    return failure_matrix(policy.n_sat, fm), policy, lead_time_grid(lt, 1), lt.alpha


def solve_direct(config) -> EchelonSolution:
    """Direct strategy, solved as a parking chain reviewed every step under satellite failures."""
    P_f, policy, grid, alpha = direct_inputs(config)
    sol = parking.solve_parking(P_f, policy, grid, alpha, config.stochastic.tau_mc, j_max=0)
    return EchelonSolution(
        pi_q=sol.pi_q, pi_r=sol.pi_r, pi_rc=sol.pi_rc, tau_rc=sol.tau_rc, residual=sol.residual,
        pi_io=sol.pi_io, pi_lt=sol.pi_lt, k_io=sol.k_io, k_lt=sol.k_lt,
    )
