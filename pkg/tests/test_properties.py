import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparechain import inplane, parking
from sparechain.markov import is_column_stochastic, stationary_distribution, stationary_residual
from sparechain.stochastic import (FailureModel, LeadTimeGrid, LeadTimeModel, failure_matrix,
                                   lead_time_pmf, lead_time_survival)

FAST = settings(max_examples=40, deadline=None)


def simplex(n):
    return st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n).map(
        lambda w: np.asarray(w) / np.sum(w))


@st.composite
def parking_case(draw):
    q_p = draw(st.integers(1, 5))
    r_p = draw(st.integers(0, 5))
    k_p = draw(st.integers(1, 6))
    k_lv = draw(st.integers(0, 15))
    alpha = draw(st.floats(0.05, 0.9))
    chi = draw(simplex(draw(st.integers(2, 4))))
    chi[0] = min(chi[0], 0.8)
    chi /= chi.sum()
    m = k_lv // k_p
    grid = LeadTimeGrid(m, k_lv - m * k_p, (m + 1) * k_p - k_lv, k_p)
    return parking.ParkingPolicy(q_p, r_p), chi, grid, alpha


@FAST
@given(n_max=st.integers(1, 60), nbar=st.integers(1, 50), lam=st.floats(1e-6, 3.0))
def test_failure_matrix_is_stochastic(n_max, nbar, lam):
    P = failure_matrix(n_max, FailureModel(lam, nbar))
    assert is_column_stochastic(P, 1e-12)
    assert np.all(np.triu(P, 1) == 0)  # failures only lower the stock


@FAST
@given(q_c=st.integers(1, 6), r_c=st.integers(0, 20), drops=st.lists(st.floats(0, 1), max_size=8))
def test_plane_replenishment_and_demand(q_c, r_c, drops):
    pol = inplane.InplanePolicy(q_c, r_c)
    steps = np.resize(np.asarray(drops or [0.0]), pol.j_max)
    kappa = np.concatenate([[1.0], np.minimum.accumulate(1.0 - 0.5 * steps)])
    P = inplane.replenishment_matrix(kappa, pol)
    assert is_column_stochastic(P, 1e-12)
    pi = np.random.default_rng(q_c + r_c).dirichlet(np.ones(pol.n_sat + 1))
    chi = inplane.demand_pmf(pi, pol)
    assert abs(chi.sum() - 1) < 1e-10 and chi.min() >= 0


@FAST
@given(parking_case())
def test_parking_matrices_and_distributions(case):
    pol, chi, grid, alpha = case
    P = parking.demand_failure_matrix(chi, pol)
    proj = parking.threshold_projectors(pol)
    P_qp = parking.replenishment_matrix(pol)
    for M in (P, P_qp, parking.delivery_to_reorder_matrix(P, proj),
              parking.reorder_to_delivery_matrix(P, P_qp, grid, alpha)):
        assert is_column_stochastic(M, 1e-12)
    assert abs(parking.delivery_weights(grid, alpha).sum() - 1) < 1e-12
    sol = parking.solve_parking(P, pol, grid, alpha, 0.5, j_max=4)
    for pi in (sol.pi_q, sol.pi_r, sol.pi_io, sol.pi_lt, sol.pi_rc, sol.pi_rc_E,
               sol.conditional.pi_io_E, sol.conditional.pi_lt_E):
        assert abs(pi.sum() - 1) < 1e-10 and pi.min() >= 0
    k = sol.kappa
    assert k[0] == 1.0 and np.all(np.diff(k) <= 0) and k.min() >= 0
    assert sol.k_lt == pytest.approx(grid.k_left + grid.m_lv * grid.k_p + 1 / (1 - alpha),
                                     rel=1e-10)


@FAST
@given(pi=st.integers(1, 12).flatmap(lambda n: simplex(n + 1)), j_max=st.integers(0, 15))
def test_availability_shape(pi, j_max):
    k = parking.availability(pi, j_max)
    assert k.shape == (j_max + 1,) and k[0] == 1.0
    assert np.all(np.diff(k) <= 0)


@FAST
@given(mu=st.floats(0.5, 200), k_lv=st.integers(0, 50), tau_mc=st.floats(0.1, 3))
def test_lead_time_telescoping(mu, k_lv, tau_mc):
    lt = LeadTimeModel(mu, k_lv * tau_mc, tau_mc)
    horizon = lt.k_lv + int(60 / (1 - lt.alpha)) + 1
    pmf = np.array([lead_time_pmf(k, lt) for k in range(horizon)])
    surv = np.array([lead_time_survival(l, lt) for l in range(horizon + 1)])
    assert np.allclose(pmf, surv[:-1] - surv[1:], atol=1e-15)
    assert abs(pmf.sum() + surv[-1] - 1) < 1e-10
    # expected steps until delivery equals k_lv + 1/(1 - alpha)
    assert surv[:-1].sum() == pytest.approx(lt.k_lv + 1 / (1 - lt.alpha), rel=1e-10)


@FAST
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1))
def test_stationary_distribution(n, seed):
    M = np.random.default_rng(seed).dirichlet(np.ones(n), size=n).T
    pi, _ = stationary_distribution(M)
    assert abs(pi.sum() - 1) < 1e-10
    assert stationary_residual(M, pi) < 1e-12
