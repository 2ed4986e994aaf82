"""Reactive baselines: one-shot VO sampling and the dynamic window approach."""

from typing import List, Optional

import numpy as np

from core.geometry import angle_diff, point_segment_distance
from core.logging_config import get_logger
from core.mcts_planner import choose_rollout_action, safe_velocities
from core.mdp_world import StepParams, action_space
from core.models import DWAConfig, PlannerConfig, PlannerId
from core.planner_base import Decision, Planner
from core.state import VelocityAction, WorldState


logger = get_logger("baseline_planners")


class VOPlanner(Planner):
    """
    Samples one action from the safe velocity set with the rollout policy of the
    VO-pruned MCTS; no lookahead.
    """

    planner_id = PlannerId.VO_PLANNER

    def __init__(self, config: PlannerConfig, params: StepParams):
        self.config = config
        self.params = params

    def _choose(self, state: WorldState, rng: np.random.Generator) -> Decision:
        safe = safe_velocities(state, self.config, self.params.t_s)
        action = choose_rollout_action(
            state, safe, self.config.epsilon0, self.config.goal_cone_delta, rng
        )
        return Decision(action, 0.0, {"stationary": safe.is_stationary})


def vo_planner_decide(
    state: WorldState,
    rng: np.random.Generator,
    epsilon0: float,
    delta: float,
    t_s: float = 1.0,
) -> VelocityAction:
    config = PlannerConfig(epsilon0=epsilon0, goal_cone_delta=delta)
    return VOPlanner(config, StepParams(t_s=t_s)).decide(state, rng).action


class DWAPlanner(Planner):
    """
    Dynamic window approach over the discretised action set.

    Each action is simulated for one step with obstacles held at their current
    positions. Actions whose path hits an obstacle or a wall or leaves the
    workspace are excluded; the rest are scored by
    w_goal*heading + w_clear*clearance + w_vel*speed, each term in [0, 1].
    """

    planner_id = PlannerId.DWA

    def __init__(self, config: DWAConfig, params: StepParams, n_speeds: int = 5, n_angles: int = 12):
        self.config = config
        self.params = params
        self.n_speeds = n_speeds
        self.n_angles = n_angles

    def score_actions(self, state: WorldState, actions: List[VelocityAction]) -> np.ndarray:
        """Objective per action; excluded actions score -inf."""
        cfg = self.config
        robot = state.robot
        t_s = self.params.t_s
        speeds = np.array([a.speed for a in actions])
        headings = np.array([a.heading for a in actions])

        times = np.linspace(0.0, t_s, cfg.trajectory_samples + 1)
        directions = np.stack([np.cos(headings), np.sin(headings)], axis=-1)
        paths = robot.position.as_array() + (speeds[:, None, None] * times[None, :, None]) * directions[:, None, :]

        feasible = np.ones(len(actions), dtype=bool)
        ws = state.workspace
        r = robot.radius
        ends = paths[:, -1, :]
        feasible &= (ends[:, 0] - r >= ws.x_min) & (ends[:, 0] + r <= ws.x_max)
        feasible &= (ends[:, 1] - r >= ws.y_min) & (ends[:, 1] + r <= ws.y_max)

        clearance = np.full(len(actions), cfg.clearance_cap)
        obstacles = state.obstacles
        if len(obstacles):
            gaps = paths[:, :, None, :] - obstacles.positions[None, None, :, :]
            surface = np.hypot(gaps[..., 0], gaps[..., 1]) - (r + obstacles.radii)[None, None, :]
            closest = surface.min(axis=(1, 2))
            feasible &= closest >= 0.0
            clearance = np.minimum(clearance, closest)
        for wall in state.walls:
            surface = point_segment_distance(paths, wall.a.as_array(), wall.b.as_array()) - r
            closest = surface.min(axis=1)
            feasible &= closest >= 0.0
            clearance = np.minimum(clearance, closest)

        goal_bearing = state.goal_bearing
        heading_score = 1.0 - np.abs([angle_diff(h, goal_bearing) for h in headings]) / np.pi
        clearance_score = np.clip(clearance, 0.0, None) / cfg.clearance_cap
        speed_score = speeds / robot.v_max if robot.v_max > 0.0 else np.zeros(len(actions))

        scores = cfg.w_goal * heading_score + cfg.w_clear * clearance_score + cfg.w_vel * speed_score
        return np.where(feasible, scores, -np.inf)

    def _choose(self, state: WorldState, rng: Optional[np.random.Generator] = None) -> Decision:
        actions = action_space(state.robot, self.params.t_s, self.n_speeds, self.n_angles)
        scores = self.score_actions(state, actions)
        if not np.any(np.isfinite(scores)):
            logger.warning(f"Every DWA action collides at step {state.step_index}; holding position")
            return Decision(VelocityAction(0.0, state.robot.heading), 0.0, {"fallback": True})
        best = int(np.argmax(scores))
        return Decision(actions[best], 0.0, {"fallback": False, "score": float(scores[best])})


def dwa_decide(state: WorldState, cfg: DWAConfig, t_s: float = 1.0) -> VelocityAction:
    return DWAPlanner(cfg, StepParams(t_s=t_s)).decide(state, None).action
