import numpy as np
import pytest

from oracles import eig_stationary, inplane_augmented
from sparechain import inplane
from sparechain.exceptions import InvalidAvailabilityError
from sparechain.markov import index_of, mean_state, point_mass
from sparechain.stochastic import FailureModel, failure_matrix

POL = inplane.InplanePolicy(q_c=2, r_c=3)


def test_demand_of_state():
    assert inplane.demand_of_state(4, POL) == 0
    assert inplane.demand_of_state(3, POL) == 1
    assert inplane.demand_of_state(0, POL) == 2
    assert POL.j_max == 2


def test_replenishment_full_availability():
    P = inplane.replenishment_matrix(np.ones(3), POL)
    for x in range(6):
        target = x if x > 3 else x + inplane.demand_of_state(x, POL) * 2
        assert target > 3 or x > 3
        assert P[index_of(target, 5), index_of(x, 5)] == 1.0


def test_replenishment_nothing_available():
    assert np.array_equal(inplane.replenishment_matrix(np.array([1.0, 0, 0]), POL), np.eye(6))


def test_replenishment_partial_column():
    kappa = np.array([1.0, 0.7, 0.2])
    P = inplane.replenishment_matrix(kappa, POL)
    col = P[:, index_of(3, 5)]
    assert col[index_of(5, 5)] == pytest.approx(0.7)
    assert col[index_of(3, 5)] == pytest.approx(0.3)
    col0 = P[:, index_of(0, 5)]
    assert col0[index_of(4, 5)] == pytest.approx(0.2)
    assert col0[index_of(2, 5)] == pytest.approx(0.5)
    assert col0[index_of(0, 5)] == pytest.approx(0.3)
    assert np.abs(P.sum(0) - 1).max() < 1e-15


@pytest.mark.parametrize("kappa", [np.array([0.9, 0.5, 0.1]), np.array([1.0, 0.2, 0.3]),
                                   np.array([1.0, 0.5])])
def test_bad_kappa(kappa):
    with pytest.raises(InvalidAvailabilityError):
        inplane.replenishment_matrix(kappa, POL)


def test_solve_cycle_tiny_eigensolve():
    pol = inplane.InplanePolicy(1, 1)
    P_f = failure_matrix(2, FailureModel(0.1, 2))
    P_q = inplane.replenishment_matrix(np.ones(pol.j_max + 1), pol)
    pi_q, pi_r, _ = inplane.solve_cycle(P_f, P_q, 1)
    assert np.abs(pi_q - eig_stationary(P_q @ P_f)).max() < 1e-12
    assert np.abs(pi_r - P_f @ pi_q).max() < 1e-15
    assert mean_state(pi_r) <= mean_state(pi_q)


def test_cycle_average_against_step_chain():
    rng = np.random.default_rng(7)
    pol = inplane.InplanePolicy(3, 5)
    P_f = failure_matrix(pol.n_sat, FailureModel(0.05, 6))
    kappa = np.sort(rng.random(pol.j_max + 1))[::-1]
    kappa[0] = 1.0
    P_q = inplane.replenishment_matrix(kappa, pol)
    for k_c in (1, 4, 9):
        pi_q, pi_r, _ = inplane.solve_cycle(P_f, P_q, k_c)
        avg = inplane.cycle_average(pi_q, P_f, k_c)
        assert np.abs(avg - inplane_augmented(P_f, P_q, k_c)).max() < 1e-10
        assert mean_state(pi_r) - 1e-12 <= mean_state(avg) <= mean_state(pi_q) + 1e-12
    pi_q, _, _ = inplane.solve_cycle(P_f, P_q, 1)
    assert np.array_equal(inplane.cycle_average(pi_q, P_f, 1), pi_q)


def test_cycle_average_by_explicit_propagation():
    P_f = failure_matrix(5, FailureModel(0.2, 4))
    pi = point_mass(5, 5)
    steps = [np.linalg.matrix_power(P_f, j) @ pi for j in range(6)]
    assert np.allclose(inplane.cycle_average(pi, P_f, 6), np.mean(steps, axis=0), atol=1e-15)


def test_demand_pmf():
    pi = np.array([0.1, 0.2, 0.3, 0.15, 0.15, 0.1])  # states 5..0
    chi = inplane.demand_pmf(pi, POL)
    assert chi[0] == pytest.approx(0.1 + 0.2)  # states 5 and 4
    # enumeration oracle
    ref = np.zeros(POL.j_max + 1)
    for i, p in enumerate(pi):
        ref[inplane.demand_of_state(5 - i, POL)] += p
    assert np.allclose(chi, ref, atol=1e-15)
    assert np.array_equal(inplane.demand_pmf(point_mass(5, 5), POL), [1.0, 0.0, 0.0])
