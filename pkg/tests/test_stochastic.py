import math

import numpy as np
import pytest

from sparechain.exceptions import SparePolicyError
from sparechain.stochastic import (FailureModel, LeadTimeModel, failure_matrix, failure_pmf,
                                   lead_time_grid, lead_time_pmf, lead_time_survival)


def test_failure_pmf_values():
    m = FailureModel(0.1, 2)
    assert failure_pmf(1, 2, m) == pytest.approx(0.2 * math.exp(-0.2), rel=1e-12)
    assert failure_pmf(1, 2, m) == pytest.approx(0.163746, abs=1e-6)
    assert failure_pmf(3, 5, m) == 0.0  # more failures than operational satellites
    # spares above nominal do not fail
    assert failure_pmf(1, 7, m) == failure_pmf(1, 2, m)


def test_failure_pmf_small_rate_limit():
    assert failure_pmf(0, 30, FailureModel(1e-12, 40)) == pytest.approx(1.0, abs=1e-9)


def test_failure_matrix_tiny():
    P = failure_matrix(2, FailureModel(0.1, 2))
    e = math.exp(-0.2)
    assert np.allclose(P[:, 0], [e, 0.2 * e, 1 - 1.2 * e], atol=1e-15)
    assert P[2, 2] == 1.0


def test_failure_matrix_structure():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 60))
        nbar = int(rng.integers(1, 60))
        P = failure_matrix(n, FailureModel(float(rng.uniform(1e-6, 0.5)), nbar))
        assert np.abs(P.sum(0) - 1).max() < 1e-12
        assert P.min() >= 0
        assert np.all(np.triu(P, 1) == 0)  # stock never increases


def test_failure_rate_conversion():
    m = FailureModel.from_yearly(0.05, 0.5, 40)
    assert m.lambda_sat_step == pytest.approx(0.05 * 0.5 / 365.25)
    with pytest.raises(SparePolicyError):
        FailureModel(0.0, 40)


def test_lead_time_pmf():
    lt = LeadTimeModel(20.0, 20.0, 0.5)
    assert lt.k_lv == 40
    assert all(lead_time_pmf(k, lt) == 0.0 for k in range(40))
    assert lead_time_pmf(40, lt) == pytest.approx(1 - lt.alpha)
    lt0 = LeadTimeModel(20.0, 0.0, 0.5)
    assert lead_time_pmf(0, lt0) == pytest.approx(1 - math.exp(-0.5 / 20))
    # body plus geometric tail closed form
    body = math.fsum(lead_time_pmf(k, lt) for k in range(400))
    assert body + lt.alpha ** (400 - 40) == pytest.approx(1.0, abs=1e-12)


def test_lead_time_survival():
    lt = LeadTimeModel(20.0, 20.0, 0.5)
    assert lead_time_survival(0, lt) == 1.0
    assert lead_time_survival(40, lt) == 1.0
    assert lead_time_survival(41, lt) == pytest.approx(lt.alpha)
    for l in range(201):
        diff = lead_time_survival(l, lt) - lead_time_survival(l + 1, lt)
        assert diff == pytest.approx(lead_time_pmf(l, lt), abs=1e-15)


def test_tau_lv_snapped_to_grid():
    lt = LeadTimeModel(20.0, 20.2, 0.5)
    assert lt.k_lv == 40 and lt.tau_lv == 20.0


@pytest.mark.parametrize("tau_lv, tau_p, expected", [
    (20, 8, (2, 8, 8, 16)),
    (0, 8, (0, 0, 16, 16)),
])
def test_lead_time_grid(tau_lv, tau_p, expected):
    lt = LeadTimeModel(20.0, tau_lv, 0.5)
    g = lead_time_grid(lt, int(round(tau_p / 0.5)))
    assert (g.m_lv, g.k_left, g.k_right, g.k_p) == expected
    assert g.k_left + g.k_right == g.k_p


def test_lead_time_grid_unit_period():
    lt = LeadTimeModel(10.0, 10.0, 0.5)
    g = lead_time_grid(lt, 1)
    assert (g.m_lv, g.k_left, g.k_right) == (lt.k_lv, 0, 1)


def test_lead_time_grid_invariants():
    for k_lv in range(0, 60):
        for k_p in range(1, 25):
            g = lead_time_grid(LeadTimeModel(5.0, k_lv * 0.5, 0.5), k_p)
            assert 0 <= g.k_left < k_p
            assert g.m_lv * k_p + g.k_left == k_lv
            assert g.k_left + g.k_right == k_p


def test_lead_time_validation():
    with pytest.raises(SparePolicyError):
        LeadTimeModel(0.0, 20.0, 0.5)
    with pytest.raises(SparePolicyError):
        LeadTimeModel(20.0, -1.0, 0.5)
