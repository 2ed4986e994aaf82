"""Tests for the reactive VO planner and the dynamic window approach."""

import math
import time

import numpy as np
import pytest

from core.baseline_planners import DWAPlanner, VOPlanner, dwa_decide, vo_planner_decide
from core.geometry import angle_diff
from core.mcts_planner import safe_velocities
from core.mdp_world import StepParams
from core.models import DWAConfig, PlannerConfig, PlannerId
from core.state import VelocityAction
from tests.helpers import make_robot, make_world


PARAMS = StepParams(t_s=1.0)


def _random_states(rng, count, n_obstacles=12):
    for _ in range(count):
        positions = [tuple(p) for p in rng.uniform(2.0, 8.0, size=(n_obstacles, 2))]
        yield make_world(obstacles=positions, goal=tuple(rng.uniform(1.0, 9.0, size=2)))


class TestVOPlanner:
    """One-shot sampling from the safe set."""

    def test_greedy_heading_stays_in_goal_cone(self):
        state = make_world(goal=(9.0, 6.0))
        rng = np.random.default_rng(0)
        for _ in range(200):
            action = vo_planner_decide(state, rng, epsilon0=0.0, delta=0.5)
            assert abs(angle_diff(action.heading, state.goal_bearing)) <= 0.5 + 1e-9

    def test_inside_extended_ball_holds_position(self):
        state = make_world(obstacles=[(5.5, 5.0)])
        action = vo_planner_decide(state, np.random.default_rng(1), 0.2, 1.0)
        assert action == VelocityAction(0.0, state.robot.heading)

    @staticmethod
    def _check_safe_and_reachable(count: int, seed: int):
        rng = np.random.default_rng(seed)
        cfg = PlannerConfig()
        planner = VOPlanner(cfg, PARAMS)
        for state in _random_states(rng, count):
            action = planner.decide(state, rng).action
            assert safe_velocities(state, cfg, 1.0).admits(action)
            assert action.speed <= state.robot.v_max + 1e-12
            if action.speed > 0.0:
                assert abs(angle_diff(action.heading, state.robot.heading)) <= 1.9 + 1e-9

    def test_actions_are_safe_and_reachable(self):
        self._check_safe_and_reachable(300, seed=2)

    @pytest.mark.slow
    def test_actions_are_safe_over_many_states(self):
        self._check_safe_and_reachable(10_000, seed=4)

    def test_identifier(self):
        assert VOPlanner(PlannerConfig(), PARAMS).planner_id == PlannerId.VO_PLANNER

    @pytest.mark.slow
    def test_decision_is_fast(self):
        rng = np.random.default_rng(3)
        planner = VOPlanner(PlannerConfig(), PARAMS)
        states = list(_random_states(rng, 50, n_obstacles=40))
        start = time.perf_counter()
        for state in states:
            planner.decide(state, rng)
        assert (time.perf_counter() - start) / len(states) < 0.01


class TestDWAPlanner:
    """Dynamic window scoring."""

    @pytest.fixture
    def planner(self):
        return DWAPlanner(DWAConfig(), PARAMS)

    def test_empty_scene_full_speed_towards_goal(self, planner):
        state = make_world(goal=(9.0, 5.0))
        action = planner.decide(state, None).action
        assert action.speed == pytest.approx(0.3)
        grid = np.linspace(-1.9, 1.9, 12)
        assert abs(action.heading) == pytest.approx(np.min(np.abs(grid)))

    def test_obstacle_ahead_excludes_forward(self, planner):
        state = make_world(obstacles=[(5.75, 5.0)], goal=(9.0, 5.0))
        scores = planner.score_actions(state, [VelocityAction(0.3, 0.0), VelocityAction(0.3, 1.5)])
        assert scores[0] == -np.inf
        assert np.isfinite(scores[1])

    def test_leaving_workspace_is_excluded(self, planner):
        state = make_world(robot=make_robot(position=(9.5, 5.0)), goal=(9.0, 2.0))
        scores = planner.score_actions(state, [VelocityAction(0.3, 0.0), VelocityAction(0.3, math.pi / 2)])
        assert scores[0] == -np.inf
        assert np.isfinite(scores[1])

    def test_mirror_symmetric_scene(self, planner):
        state = make_world(obstacles=[(6.0, 5.6), (6.0, 4.4)], goal=(9.0, 5.0))
        headings = np.linspace(-1.9, 1.9, 12)
        actions = [VelocityAction(0.3, h) for h in headings]
        scores = planner.score_actions(state, actions)
        np.testing.assert_allclose(scores, scores[::-1], atol=1e-9)

    def test_fallback_when_everything_collides(self, planner):
        state = make_world(obstacles=[(5.0, 5.0)])
        decision = planner.decide(state, None)
        assert decision.action == VelocityAction(0.0, state.robot.heading)
        assert decision.diagnostics["fallback"]

    def test_actions_respect_kinematics(self):
        rng = np.random.default_rng(4)
        cfg = DWAConfig()
        for state in _random_states(rng, 100):
            action = dwa_decide(state, cfg)
            assert action.speed <= state.robot.v_max + 1e-12
            assert abs(angle_diff(action.heading, state.robot.heading)) <= 1.9 + 1e-9

    def test_weights_shift_choice(self):
        state = make_world(goal=(9.0, 5.0))
        slow = DWAPlanner(DWAConfig(w_goal=1.0, w_clear=0.0, w_vel=0.0), PARAMS).decide(state, None).action
        fast = DWAPlanner(DWAConfig(w_goal=0.0, w_clear=0.0, w_vel=1.0), PARAMS).decide(state, None).action
        assert fast.speed == pytest.approx(0.3)
        # Pure heading score ties across speeds; the lowest index is the fastest.
        assert slow.speed == pytest.approx(0.3)
        assert abs(slow.heading) < abs(fast.heading)

    @pytest.mark.slow
    def test_decision_is_fast(self, planner):
        rng = np.random.default_rng(5)
        states = list(_random_states(rng, 50, n_obstacles=40))
        start = time.perf_counter()
        for state in states:
            planner.decide(state, None)
        assert (time.perf_counter() - start) / len(states) < 0.01
