"""Tests for the navigation_bench command-line interface."""

import json

import pandas as pd
import pytest

import navigation_bench
from core.config import settings
from core.experiment_harness import episode_streams
from core.models import PlannerConfig


SMALL_SCENARIO = {"n_obstacles": 5, "episode_cap": 6, "seed": 1}


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "log_dir", str(tmp_path / "logs"))


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(SMALL_SCENARIO))
    return path


@pytest.fixture
def sweep_file(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps({
        "scenario": SMALL_SCENARIO,
        "planners": ["vo_planner", "dwa"],
        "m_values": [2, 4],
        "n_scenarios": 2,
        "record_timing": False,
        "bootstrap_resamples": 50,
    }))
    return path


class TestRunCommand:
    """Single episodes."""

    def test_prints_record_json(self, scenario_file, capsys):
        code = navigation_bench.main(["run", "--scenario", str(scenario_file), "--planner", "mcts_vo_tree",
                                      "--m", "3", "--seed", "7"])
        assert code == navigation_bench.EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert record["planner"] == "mcts_vo_tree"
        assert record["m"] == 3
        assert record["planner_config"]["simulations"] == 3
        assert record["n_steps"] == len(record["steps"])

    def test_seed_flag_is_recorded(self, scenario_file, capsys):
        navigation_bench.main(["run", "--scenario", str(scenario_file), "--planner", "dwa", "--seed", "7"])
        record = json.loads(capsys.readouterr().out)
        assert record["scenario"]["seed"] == 7
        assert record["scenario_seed"] == episode_streams(7, 0).scenario_seed

    def test_scenario_seed_used_without_flag(self, scenario_file, capsys):
        navigation_bench.main(["run", "--scenario", str(scenario_file), "--planner", "dwa"])
        record = json.loads(capsys.readouterr().out)
        assert record["scenario"]["seed"] == SMALL_SCENARIO["seed"]
        assert record["scenario_seed"] == episode_streams(SMALL_SCENARIO["seed"], 0).scenario_seed

    def test_same_seed_same_record(self, scenario_file, capsys):
        args = ["run", "--scenario", str(scenario_file), "--planner", "dwa", "--seed", "2"]
        navigation_bench.main(args)
        first = json.loads(capsys.readouterr().out)
        navigation_bench.main(args)
        second = json.loads(capsys.readouterr().out)
        assert [s["action"] for s in first["steps"]] == [s["action"] for s in second["steps"]]

    def test_invalid_m_names_flag(self, scenario_file, capsys):
        code = navigation_bench.main(["run", "--scenario", str(scenario_file), "--planner", "mcts", "--m", "0"])
        assert code == navigation_bench.EXIT_VALIDATION
        assert "--m" in capsys.readouterr().err

    def test_unknown_planner(self, scenario_file, capsys):
        code = navigation_bench.main(["run", "--scenario", str(scenario_file), "--planner", "astar"])
        assert code == navigation_bench.EXIT_VALIDATION
        assert "--planner" in capsys.readouterr().err

    def test_missing_scenario(self, tmp_path, capsys):
        code = navigation_bench.main(["run", "--scenario", str(tmp_path / "none.json"), "--planner", "dwa"])
        assert code == navigation_bench.EXIT_VALIDATION
        assert "--scenario" in capsys.readouterr().err

    def test_missing_output_directory(self, scenario_file, tmp_path):
        code = navigation_bench.main(["run", "--scenario", str(scenario_file), "--planner", "dwa",
                                      "--out", str(tmp_path / "no" / "such" / "record.json")])
        assert code == navigation_bench.EXIT_VALIDATION

    def test_placement_failure_is_runtime_error(self, tmp_path):
        path = tmp_path / "crowded.json"
        path.write_text(json.dumps({
            "workspace": [0.0, 0.0, 2.0, 2.0], "robot_start": [1.0, 1.0], "goal": [1.8, 1.8],
            "n_obstacles": 5, "obstacle_radius": 0.5,
        }))
        code = navigation_bench.main(["run", "--scenario", str(path), "--planner", "dwa"])
        assert code == navigation_bench.EXIT_RUNTIME

    def test_no_command(self):
        assert navigation_bench.main([]) == navigation_bench.EXIT_VALIDATION


class TestSweepCommand:
    """The m-sweep."""

    def test_writes_summary_and_raw(self, sweep_file, tmp_path, capsys):
        out = tmp_path / "results"
        code = navigation_bench.main(["sweep", "--config", str(sweep_file), "--out", str(out)])
        assert code == navigation_bench.EXIT_OK
        summary = pd.read_csv(out / "summary.csv")
        assert len(summary) == 4
        assert set(summary["planner"]) == {"vo_planner", "dwa"}
        assert len((out / "raw.jsonl").read_text().splitlines()) == 8
        assert (out / "config.json").exists()
        assert "SWEEP SUMMARY" in capsys.readouterr().out

    def test_records_carry_master_seed(self, sweep_file, tmp_path):
        out = tmp_path / "results"
        navigation_bench.main(["sweep", "--config", str(sweep_file), "--out", str(out), "--seed", "9"])
        records = [json.loads(line) for line in (out / "raw.jsonl").read_text().splitlines()]
        assert {r["scenario"]["seed"] for r in records} == {9}

    def test_print_config(self, sweep_file, tmp_path, capsys):
        out = tmp_path / "results"
        code = navigation_bench.main(["sweep", "--config", str(sweep_file), "--out", str(out),
                                      "--seed", "11", "--print-config"])
        assert code == navigation_bench.EXIT_OK
        resolved = json.loads(capsys.readouterr().out)
        assert resolved["master_seed"] == 11
        assert resolved["planner"]["exploration_constant"] == 1.0
        assert resolved["planner"]["cone_construction"] == "intersection"
        assert resolved["planner"]["epsilon0"] == 0.2
        assert resolved["planner"]["goal_cone_delta"] == 1.0
        assert resolved["dwa"]["w_goal"] == 1.0
        assert not out.exists()

    def test_invalid_config(self, tmp_path, capsys):
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps({"planners": ["mcts", "mcts"]}))
        code = navigation_bench.main(["sweep", "--config", str(path)])
        assert code == navigation_bench.EXIT_VALIDATION
        assert "--config" in capsys.readouterr().err

    def test_external_summary_joins_plots(self, sweep_file, tmp_path):
        external = tmp_path / "nmpc.csv"
        pd.DataFrame({"planner": ["nmpc"], "m": [2], "mean_rho": [-3.0]}).to_csv(external, index=False)
        out = tmp_path / "results"
        code = navigation_bench.main(["sweep", "--config", str(sweep_file), "--out", str(out),
                                      "--external", str(external)])
        assert code == navigation_bench.EXIT_OK
        assert "nmpc" in pd.read_csv(out / "plot_mean_rho.csv").columns


class TestReplayCommand:
    """Trajectory export."""

    def test_run_then_replay(self, scenario_file, tmp_path):
        record_path = tmp_path / "record.json"
        assert navigation_bench.main(["run", "--scenario", str(scenario_file), "--planner", "vo_planner",
                                      "--out", str(record_path)]) == navigation_bench.EXIT_OK
        csv_path = tmp_path / "trajectory.csv"
        code = navigation_bench.main(["replay", "--record", str(record_path), "--out", str(csv_path)])
        assert code == navigation_bench.EXIT_OK
        frame = pd.read_csv(csv_path)
        assert list(frame.columns[:5]) == ["t", "x", "y", "heading", "reward"]

    def test_missing_record(self, tmp_path, capsys):
        code = navigation_bench.main(["replay", "--record", str(tmp_path / "none.json"),
                                      "--out", str(tmp_path / "t.csv")])
        assert code == navigation_bench.EXIT_VALIDATION
        assert "--record" in capsys.readouterr().err

    def test_index_out_of_range(self, scenario_file, tmp_path):
        record_path = tmp_path / "record.json"
        navigation_bench.main(["run", "--scenario", str(scenario_file), "--planner", "dwa", "--out", str(record_path)])
        code = navigation_bench.main(["replay", "--record", str(record_path), "--index", "3",
                                      "--out", str(tmp_path / "t.csv")])
        assert code == navigation_bench.EXIT_VALIDATION


class TestOracleCommand:
    """Kernel self-check."""

    def test_passes(self, capsys):
        code = navigation_bench.main(["oracle-check", "--samples", "15", "--seed", "4"])
        assert code == navigation_bench.EXIT_OK
        output = capsys.readouterr().out
        assert "soundness violations" in output
        assert "PASS" in output

    def test_tangent_cone(self):
        assert navigation_bench.main(["oracle-check", "--samples", "10", "--cone", "tangent"]) == navigation_bench.EXIT_OK

    def test_default_cone_is_the_planners(self, capsys):
        code = navigation_bench.main(["oracle-check", "--samples", "10"])
        assert code == navigation_bench.EXIT_OK
        assert f"PASS ({PlannerConfig().cone_construction.value})" in capsys.readouterr().out
