"""Tests for settings, configuration files and error conversion."""

import json
from pathlib import Path

import pytest
from pydantic import ValidationError

from core.config import Settings, load_scenario_file, load_sweep_file
from core.exceptions import ConfigValidationError, NavigationError, to_navigation_error
from core.models import PlannerConfig, PlannerId, ScenarioConfig, SweepConfig


CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


class TestSettings:
    """Environment-driven ambient settings."""

    def test_defaults(self):
        s = Settings(_env_file=None)
        assert s.log_level == "INFO"
        assert s.log_dir == "logs"
        assert s.master_seed == 0

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("NAV_MASTER_SEED", "5")
        monkeypatch.setenv("NAV_LOG_LEVEL", "debug")
        s = Settings(_env_file=None)
        assert s.master_seed == 5
        assert s.log_level == "DEBUG"

    def test_invalid_log_level(self):
        with pytest.raises(ValidationError):
            Settings(_env_file=None, log_level="loud")

    def test_negative_seed(self):
        with pytest.raises(ValidationError):
            Settings(_env_file=None, master_seed=-1)


class TestScenarioFiles:
    """Scenario JSON loading."""

    def test_shipped_scenarios(self):
        default = load_scenario_file(CONFIG_DIR / "scenario_default.json")
        assert default == ScenarioConfig()
        walled = load_scenario_file(CONFIG_DIR / "scenario_walled.json")
        assert walled.boundary_walls
        assert len(walled.walls) == 1

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps({"n_obstacles": 3, "obstacle_count": 3}))
        with pytest.raises(ConfigValidationError) as exc_info:
            load_scenario_file(path)
        assert "obstacle_count" in exc_info.value.details["fields"]
        assert exc_info.value.details["path"] == str(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text("{ not json")
        with pytest.raises(ConfigValidationError):
            load_scenario_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigValidationError):
            load_scenario_file(tmp_path / "absent.json")

    def test_start_outside_workspace(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps({"robot_start": [0.1, 5.0]}))
        with pytest.raises(ConfigValidationError):
            load_scenario_file(path)

    def test_not_an_object(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(ConfigValidationError):
            load_scenario_file(path)


class TestSweepFiles:
    """Sweep protocol loading."""

    def test_full_protocol(self):
        config = load_sweep_file(CONFIG_DIR / "full_sweep.json")
        assert config.planners == list(PlannerId)
        assert config.m_values == [10, 25, 50, 100, 200, 400]
        assert config.n_scenarios == 50
        assert config.planner == PlannerConfig()
        assert not config.record_timing

    def test_timing_protocol(self):
        config = load_sweep_file(CONFIG_DIR / "timing_sweep.json")
        assert config.record_timing
        assert config.m_values == [10, 50, 100, 200, 400]

    def test_smoke_protocol(self):
        config = load_sweep_file(CONFIG_DIR / "smoke_sweep.json")
        assert config.scenario.n_obstacles == 10
        assert not config.record_timing

    def test_duplicate_m_values(self, tmp_path):
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps({"m_values": [10, 10]}))
        with pytest.raises(ConfigValidationError):
            load_sweep_file(path)

    def test_replay_model_not_allowed(self):
        with pytest.raises(ValidationError):
            PlannerConfig(planning_obstacle_model="replay")

    def test_resolved_config_round_trips(self):
        config = SweepConfig(planners=[PlannerId.DWA], m_values=[1])
        assert SweepConfig.model_validate(config.model_dump(mode="json")) == config


class TestErrorConversion:
    """Foreign exceptions mapped onto the error hierarchy."""

    def test_validation_error(self):
        with pytest.raises(ValidationError) as exc_info:
            ScenarioConfig(n_obstacles=-1)
        error = to_navigation_error(exc_info.value)
        assert isinstance(error, ConfigValidationError)
        assert error.details["fields"] == ["n_obstacles"]

    def test_value_error(self):
        assert isinstance(to_navigation_error(ValueError("bad")), ConfigValidationError)

    def test_os_error(self):
        error = to_navigation_error(PermissionError("denied"))
        assert type(error) is NavigationError

    def test_passthrough(self):
        original = NavigationError("kept")
        assert to_navigation_error(original) is original

    def test_fallback(self):
        error = to_navigation_error(RuntimeError("boom"))
        assert error.message == "Unexpected error: boom"
