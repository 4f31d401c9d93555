from dataclasses import replace

import pytest

from sparechain.config import GaParams, ScenarioConfig
from sparechain.optimizer import (DesignVector, evaluate_design, optimize, optimize_direct,
                                  sweep_failure_rate)

X_STAR = DesignVector(4, 40, 23, 2, 1, 735)
SMALL_GA = GaParams(population=8, generations=3, seed=3)


@pytest.fixture(scope="module")
def cfg():
    return ScenarioConfig.baseline()


def narrow(cfg, **bounds):
    b = dict(cfg.optimizer.bounds)
    b.update(bounds)
    return replace(cfg, optimizer=replace(cfg.optimizer, bounds=b))


def test_x_star_feasible(cfg):
    e = evaluate_design(X_STAR, cfg)
    assert e.feasible and e.converged
    assert e.shortage_c == pytest.approx(0.2387, rel=0.05)
    assert e.stockout_p == pytest.approx(0.0286, rel=0.05)
    assert e.g2 == pytest.approx(e.stockout_p - 1 / 26)
    assert e.fitness == e.c_total  # no penalty when feasible


def test_heavy_design_violates_payload(cfg):
    e = evaluate_design(dict(q_c=20, r_c=40, q_p=40, r_p=2, n_orbit_p=1, h_p=735), cfg)
    assert e.g3 > 0 and not e.feasible
    assert e.fitness > e.c_total


def test_infinite_thresholds(cfg):
    loose = replace(cfg, optimizer=replace(cfg.optimizer, epsilon_1=float("inf"),
                                           epsilon_2=float("inf")))
    e = evaluate_design(dict(q_c=1, r_c=35, q_p=1, r_p=0, n_orbit_p=1, h_p=735), loose)
    assert e.converged and e.g1 <= 0 and e.g2 <= 0


def test_invalid_design_is_penalized(cfg):
    e = evaluate_design(dict(q_c=4, r_c=40, q_p=23, r_p=2, n_orbit_p=1, h_p=1250), cfg)
    assert not e.converged and not e.feasible and e.cost is None


def test_single_point_bounds(cfg):
    point = {g: (v, v) for g, v in X_STAR.to_dict().items()}
    res = optimize(narrow(cfg, **point), SMALL_GA)
    assert res.best.design == X_STAR.to_dict()


def test_ga_stays_in_bounds_and_is_deterministic(cfg):
    box = narrow(cfg, q_c=(3, 5), r_c=(39, 41), q_p=(20, 24), r_p=(1, 3), n_orbit_p=(1, 2),
                 h_p=(700, 760))
    a = optimize(box, SMALL_GA)
    b = optimize(box, SMALL_GA)
    assert a.history == b.history and a.best.design == b.best.design
    for g, (lo, hi) in box.optimizer.bounds.items():
        assert lo <= a.best.design[g] <= hi
    assert [h.generation for h in a.history] == list(range(SMALL_GA.generations + 1))
    assert a.best.feasible
    assert a.best.c_total <= a.ga_best.c_total


def test_polish_can_be_disabled(cfg):
    box = narrow(cfg, q_c=(3, 5), r_c=(39, 41), q_p=(20, 24), r_p=(1, 3), n_orbit_p=(1, 2),
                 h_p=(700, 760))
    res = optimize(box, replace(SMALL_GA, polish=False))
    assert res.best is res.ga_best


def test_direct_exhaustive(cfg):
    res = optimize_direct(cfg)
    assert res.best.design == {"q": 2, "r": 39}
    assert res.best.feasible
    assert res.evaluations == 20 * 11


def test_single_rate_sweep_matches_optimize(cfg):
    box = narrow(cfg, q_c=(4, 4), r_c=(40, 40), q_p=(22, 23), r_p=(2, 2), n_orbit_p=(1, 1),
                 h_p=(735, 735))
    (row,) = sweep_failure_rate(box, [0.05], ga_params=SMALL_GA)
    assert row.indirect_cost == optimize(box, SMALL_GA).best.c_total
    assert row.direct_cost == optimize_direct(box).best.c_total
    assert row.savings == pytest.approx(1 - row.indirect_cost / row.direct_cost)


@pytest.mark.slow
def test_savings_positive_and_growing(cfg):
    ga = GaParams(population=24, generations=12, seed=1)
    rows = sweep_failure_rate(cfg, [0.05, 0.2, 0.4], ga_params=ga)
    assert all(r.savings > 0 for r in rows)
    assert all(r.indirect_feasible and r.direct_feasible for r in rows)
    assert rows[-1].savings >= rows[0].savings


def test_parallel_evaluation_matches_serial(cfg):
    box = narrow(cfg, q_c=(3, 5), r_c=(39, 41), q_p=(20, 24), r_p=(1, 3), n_orbit_p=(1, 1),
                 h_p=(730, 740))
    ga = replace(SMALL_GA, polish=False)
    a = optimize(box, ga)
    b = optimize(box, ga, n_jobs=2)
    assert a.history == b.history and a.best.design == b.best.design
