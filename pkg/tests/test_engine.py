from dataclasses import replace

import numpy as np
import pytest

from oracles import inplane_augmented, parking_augmented
from sparechain import inplane, parking
from sparechain.config import ScenarioConfig
from sparechain.engine import direct_inputs, prepare_indirect, solve_direct, solve_indirect, sweep
from sparechain.markov import stationary_residual
from sparechain.metrics import expected_shortage


@pytest.fixture(scope="module")
def baseline():
    cfg = ScenarioConfig.baseline()
    return cfg, solve_indirect(cfg)


def test_baseline_converges(baseline):
    _, sol = baseline
    assert sol.converged
    assert sol.iterations == 8  # regression lock
    assert sol.residual < 1e-10
    assert sol.residual_history[0] > sol.residual_history[-1]
    assert (sol.k_c, sol.k_p) == (828, 21)


def test_extra_sweep_is_fixed_point(baseline):
    cfg, sol = baseline
    _, park, chi = sweep(prepare_indirect(cfg), sol.kappa)
    assert np.abs(park.kappa - sol.kappa).max() < 1e-10
    assert np.abs(chi - sol.chi).max() < 1e-9


def test_baseline_stationarity(baseline):
    cfg, sol = baseline
    inputs = prepare_indirect(cfg)
    P_qc = inplane.replenishment_matrix(sol.kappa, inputs.inplane_policy)
    assert stationary_residual(P_qc @ inputs.P_fc, sol.inplane.pi_q) < 1e-12
    assert sol.parking.residual < 1e-12


def test_abundant_supply_limit():
    cfg = ScenarioConfig.baseline()
    cfg = replace(cfg, stochastic=replace(cfg.stochastic, mu_lv=0.05, tau_lv=0.0))
    cfg = cfg.with_design(q_p=60, r_p=10)
    sol = solve_indirect(cfg)
    assert sol.converged
    assert np.all(sol.kappa > 1 - 1e-3)


def test_small_coupled_system_against_step_chains():
    cfg = ScenarioConfig.baseline().with_design(q_c=2, r_c=3, q_p=2, r_p=1)
    cfg = replace(cfg, geometry=replace(cfg.geometry, n_sat_nominal=3, n_orbit_c=4),
                  stochastic=replace(cfg.stochastic, lambda_sat_per_year=3.0, mu_lv=2.0,
                                     tau_lv=2.0, tau_mc=5.0))
    sol = solve_indirect(cfg)
    assert sol.converged
    inputs = prepare_indirect(cfg)
    P_qc = inplane.replenishment_matrix(sol.kappa, inputs.inplane_policy)
    plane = inplane_augmented(inputs.P_f, P_qc, sol.k_c)
    assert np.abs(plane - sol.inplane.pi_rc).max() < 1e-10
    P_fp = parking.demand_failure_matrix(sol.chi, inputs.parking_policy)
    k_lv = int(round(cfg.stochastic.tau_lv / cfg.stochastic.tau_mc))
    avg, contact = parking_augmented(P_fp, 2, 1, k_lv, sol.alpha, sol.k_p)
    assert np.abs(avg - sol.parking.pi_rc).max() < 1e-10
    assert np.abs(contact - sol.parking.pi_rc_E).max() < 1e-10


def test_nonconvergence_is_flagged_not_raised():
    cfg = ScenarioConfig.baseline()
    sol = solve_indirect(cfg, max_iter=2)
    assert not sol.converged and sol.iterations == 2


def test_direct_baseline():
    cfg = ScenarioConfig.baseline()
    sol = solve_direct(cfg)
    s_c = expected_shortage(sol.pi_rc, cfg.geometry.n_sat_nominal)
    assert s_c == pytest.approx(0.0591, rel=0.05)
    _, _, grid, alpha = direct_inputs(cfg)
    assert (grid.k_p, grid.k_left, grid.k_right) == (1, 0, 1)
    assert sol.k_lt == pytest.approx(grid.m_lv + 1 / (1 - alpha), rel=1e-8)
