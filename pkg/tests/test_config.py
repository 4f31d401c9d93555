import json
import math

import pytest

from sparechain.config import ScenarioConfig
from sparechain.exceptions import ConfigError


def test_baseline_defaults():
    cfg = ScenarioConfig.baseline()
    assert cfg.design() == {"q_c": 4, "r_c": 40, "q_p": 23, "r_p": 2, "n_orbit_p": 1,
                            "h_p": 735.0}
    assert math.degrees(cfg.geometry.inclination) == pytest.approx(50.0)
    assert (cfg.direct.q, cfg.direct.r) == (2, 39)
    assert cfg.optimizer.epsilon_2_for(23, 2) == pytest.approx(1 / 26)


def test_round_trip(tmp_path):
    cfg = ScenarioConfig.baseline().with_design(q_p=10, h_p=700)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    again = ScenarioConfig.load(path)
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()


def test_minimal_config():
    assert ScenarioConfig.from_dict({"schema": 1}) == ScenarioConfig.baseline()


@pytest.mark.parametrize("data", [
    {},
    {"schema": 2},
    {"schema": 1, "polcy": {}},
    {"schema": 1, "policy": {"q_c": 4, "rc": 40}},
    {"schema": 1, "policy": {"q_c": 0}},
    {"schema": 1, "policy": {"q_c": 2.5}},
    {"schema": 1, "stochastic": {"lambda_sat_per_year": 0.0}},
    {"schema": 1, "geometry": {"h_p": 1300}},
    {"schema": 1, "sim": {"horizon_years": 1, "warmup_years": 2}},
    {"schema": 1, "optimizer": {"ga": {"population": 2}}},
    {"schema": 1, "optimizer": {"bounds": {"q_c": [5, 2]}}},
    {"schema": 1, "optimizer": {"epsilon_2": "sometimes"}},
])
def test_rejects_bad_configs(data):
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(data)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        ScenarioConfig.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ScenarioConfig.load(bad)


def test_copies():
    cfg = ScenarioConfig.baseline()
    assert cfg.with_failure_rate(0.2).stochastic.lambda_sat_per_year == 0.2
    assert cfg.with_direct(q=3).direct.q == 3
    assert cfg.with_design(n_orbit_p=2).geometry.n_orbit_p == 2
    assert cfg.policy.q_c == 4  # frozen originals untouched
