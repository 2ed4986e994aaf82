"""
Navigation MDP.

Discretised action space, deterministic robot transition, stochastic obstacle
motion, the goal/out-of-bounds/collision/distance reward, and terminality.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import InvalidStateError, KinematicViolationError, ReplayError
from core.geometry import Vec2, angle_diff
from core.models import ObstacleModelKind, ScenarioConfig, TerminalCause
from core.state import ObstacleField, ObstacleState, RobotState, VelocityAction, Workspace, WorldState
from core.vo_kernel import SafeVelocitySet


HEADING_NOISE = 0.05  # rad, uniform noise on an obstacle's heading
KINEMATIC_TOL = 1e-9


@dataclass(frozen=True)
class StepParams:
    """Constants of the transition and reward. `episode_cap=None` disables the step limit."""
    t_s: float = 1.0
    reward_goal: float = 100.0
    episode_cap: Optional[int] = 100

    def __post_init__(self):
        if self.t_s <= 0.0:
            raise InvalidStateError(f"t_s must be positive, got {self.t_s}")

    @classmethod
    def from_scenario(cls, scenario: ScenarioConfig) -> "StepParams":
        return cls(t_s=scenario.t_s, reward_goal=scenario.reward_goal, episode_cap=scenario.episode_cap)


@dataclass(frozen=True)
class StepOutcome:
    next_state: WorldState
    reward: float
    terminal: bool
    cause: TerminalCause

    def __post_init__(self):
        if self.terminal != (self.cause != TerminalCause.NONE):
            raise InvalidStateError(f"terminal={self.terminal} inconsistent with cause={self.cause}")


def action_space(robot: RobotState, t_s: float, n_speeds: int, n_angles: int) -> List[VelocityAction]:
    """
    Discretised velocity commands.

    `n_speeds` equally spaced speeds on [0, v_max] crossed with `n_angles`
    equally spaced headings on the reachable arc. The zero-speed entries are
    in-place rotations. Ordered by speed descending, then heading ascending;
    that order is the action index used for tie-breaking.
    """
    if n_speeds < 2 or n_angles < 1:
        raise InvalidStateError(f"Need n_speeds >= 2 and n_angles >= 1, got {n_speeds}, {n_angles}")
    speeds = np.linspace(0.0, robot.v_max, n_speeds)[::-1]
    span = robot.heading_span(t_s)
    if n_angles == 1:
        offsets = np.zeros(1)
    elif span >= math.pi:
        offsets = np.linspace(-math.pi, math.pi, n_angles, endpoint=False)
    else:
        offsets = np.linspace(-span, span, n_angles)
    headings = robot.heading + offsets
    return [VelocityAction(float(v), float(h)) for v in speeds for h in headings]


def restrict_actions(actions: Sequence[VelocityAction], safe: SafeVelocitySet) -> List[VelocityAction]:
    """Keep the actions the safe set admits; zero-speed actions are always kept."""
    if safe.is_stationary:
        return [a for a in actions if a.speed == 0.0]
    return [a for a in actions if safe.admits(a)]


def reward(
    s: WorldState,
    a: VelocityAction,
    s_next: WorldState,
    reward_goal: float,
    d_max: float,
) -> Tuple[float, TerminalCause]:
    """Reward of a transition; the first matching case wins: goal, out of bounds, collision, distance."""
    if d_max <= 0.0:
        raise InvalidStateError(f"d_max must be positive, got {d_max}")
    cause = terminal_cause(s_next)
    if cause == TerminalCause.GOAL_REACHED:
        return reward_goal, cause
    if cause != TerminalCause.NONE:
        return -reward_goal, cause
    return -s_next.goal_distance / d_max, cause


def terminal_cause(state: WorldState) -> TerminalCause:
    """Goal, out-of-bounds or collision status of a state, checked in that order."""
    robot = state.robot
    p = robot.position
    if p.distance_to(state.goal) < robot.radius:
        return TerminalCause.GOAL_REACHED
    if not state.workspace.contains_disc(p, robot.radius):
        return TerminalCause.OUT_OF_BOUNDS
    obstacles = state.obstacles
    if len(obstacles):
        gaps = np.hypot(obstacles.positions[:, 0] - p.x, obstacles.positions[:, 1] - p.y)
        if np.any(gaps < robot.radius + obstacles.radii):
            return TerminalCause.COLLISION
    return TerminalCause.NONE


def robot_step(robot: RobotState, a: VelocityAction, t_s: float) -> RobotState:
    """Move straight along the commanded heading; the robot turns instantly to it."""
    span = robot.heading_span(t_s)
    if span < math.pi and abs(angle_diff(a.heading, robot.heading)) > span + KINEMATIC_TOL:
        raise KinematicViolationError(
            "Action heading outside the reachable arc",
            {"heading": a.heading, "current": robot.heading, "span": span}
        )
    if a.speed > robot.v_max + KINEMATIC_TOL:
        raise KinematicViolationError(
            "Action speed exceeds v_max", {"speed": a.speed, "v_max": robot.v_max}
        )
    if a.speed == 0.0 and a.heading == robot.heading:
        return robot
    position = robot.position + Vec2.from_polar(a.speed * t_s, a.heading)
    return RobotState(position, a.heading, robot.radius, robot.v_max, robot.omega_max)


def _move_obstacles(
    positions: np.ndarray,
    radii: np.ndarray,
    v_max: np.ndarray,
    waypoints: np.ndarray,
    speed_u: np.ndarray,
    heading_noise: np.ndarray,
    waypoint_draws: np.ndarray,
    t_s: float,
    workspace: Workspace,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Shared obstacle motion.

    `speed_u` in [-1/2, 1/2] scales v_max, `heading_noise` is added to the
    bearing of the waypoint, `waypoint_draws` in [0, 1)^2 place a new waypoint
    for every obstacle that reached its current one.
    """
    speed = speed_u * v_max
    to_goal = waypoints - positions
    heading = np.arctan2(to_goal[:, 1], to_goal[:, 0]) + heading_noise
    moved = positions + (speed * t_s)[:, None] * np.stack([np.cos(heading), np.sin(heading)], axis=-1)
    reached = np.hypot(*(waypoints - moved).T) < radii
    if np.any(reached):
        origin = np.array([workspace.x_min, workspace.y_min])
        size = np.array([workspace.width, workspace.height])
        waypoints = np.where(reached[:, None], origin + waypoint_draws * size, waypoints)
    return moved, waypoints


def obstacle_step(o: ObstacleState, rng: np.random.Generator, t_s: float, workspace: Workspace) -> ObstacleState:
    """One step of a single obstacle: signed speed in [-v/2, v/2] along the noisy waypoint bearing."""
    speed_u = rng.uniform(-0.5, 0.5, size=1)
    noise = rng.uniform(-HEADING_NOISE, HEADING_NOISE, size=1)
    draws = rng.random((1, 2))
    moved, waypoints = _move_obstacles(
        o.position.as_array()[None, :], np.array([o.radius]), np.array([o.v_max]),
        o.goal_waypoint.as_array()[None, :], speed_u, noise, draws, t_s, workspace,
    )
    return ObstacleState(
        position=Vec2.from_iterable(moved[0]),
        radius=o.radius,
        v_max=o.v_max,
        goal_waypoint=Vec2.from_iterable(waypoints[0]),
    )


@dataclass(frozen=True)
class ObstacleNoise:
    """
    Pre-generated obstacle randomness, one row per step.

    Shapes: speed_u (T, N), heading_noise (T, N), waypoint_draws (T, N, 2).
    Every planner run on a scenario consumes the same table.
    """
    speed_u: np.ndarray
    heading_noise: np.ndarray
    waypoint_draws: np.ndarray

    @classmethod
    def generate(cls, seed: int, n_steps: int, n_obstacles: int) -> "ObstacleNoise":
        rng = np.random.default_rng(seed)
        return cls(
            speed_u=rng.uniform(-0.5, 0.5, size=(n_steps, n_obstacles)),
            heading_noise=rng.uniform(-HEADING_NOISE, HEADING_NOISE, size=(n_steps, n_obstacles)),
            waypoint_draws=rng.random((n_steps, n_obstacles, 2)),
        )

    @property
    def n_steps(self) -> int:
        return self.speed_u.shape[0]


class ObstacleModel(ABC):
    """How obstacles move during a transition."""

    kind: ObstacleModelKind

    @abstractmethod
    def advance(self, state: WorldState, t_s: float) -> ObstacleField:
        """Obstacle field after one step from `state`."""


class FrozenObstacleModel(ObstacleModel):
    """Obstacles hold their position."""

    kind = ObstacleModelKind.FROZEN

    def advance(self, state: WorldState, t_s: float) -> ObstacleField:
        return state.obstacles


class StochasticObstacleModel(ObstacleModel):
    """Random waypoint-seeking motion, drawn from a noise table or a generator."""

    kind = ObstacleModelKind.STOCHASTIC

    def __init__(self, rng: Optional[np.random.Generator] = None, noise: Optional[ObstacleNoise] = None):
        if (rng is None) == (noise is None):
            raise InvalidStateError("StochasticObstacleModel needs exactly one of rng or noise")
        self.rng = rng
        self.noise = noise

    def advance(self, state: WorldState, t_s: float) -> ObstacleField:
        field = state.obstacles
        n = len(field)
        if n == 0:
            return field
        if self.noise is not None:
            step = state.step_index
            if step >= self.noise.n_steps:
                raise InvalidStateError(
                    f"Obstacle noise table has {self.noise.n_steps} steps, step {step} requested"
                )
            speed_u = self.noise.speed_u[step]
            heading_noise = self.noise.heading_noise[step]
            draws = self.noise.waypoint_draws[step]
        else:
            speed_u = self.rng.uniform(-0.5, 0.5, size=n)
            heading_noise = self.rng.uniform(-HEADING_NOISE, HEADING_NOISE, size=n)
            draws = self.rng.random((n, 2))
        moved, waypoints = _move_obstacles(
            field.positions, field.radii, field.v_max, field.waypoints,
            speed_u, heading_noise, draws, t_s, state.workspace,
        )
        return field.with_motion(moved, waypoints)


class ReplayObstacleModel(ObstacleModel):
    """Obstacles follow recorded positions; `trajectory[k]` holds the positions at step k."""

    kind = ObstacleModelKind.REPLAY

    def __init__(self, trajectory: Sequence[np.ndarray]):
        self.trajectory = [np.asarray(p, dtype=float).reshape(-1, 2) for p in trajectory]

    def advance(self, state: WorldState, t_s: float) -> ObstacleField:
        step = state.step_index + 1
        if step >= len(self.trajectory):
            raise ReplayError(f"No recorded obstacle positions for step {step}")
        positions = self.trajectory[step]
        if positions.shape != state.obstacles.positions.shape:
            raise ReplayError(
                "Recorded obstacle count does not match the state",
                {"recorded": positions.shape[0], "state": len(state.obstacles)}
            )
        return state.obstacles.with_motion(positions, state.obstacles.waypoints)


def make_planning_model(kind: ObstacleModelKind, rng: np.random.Generator) -> ObstacleModel:
    """Obstacle model the planner assumes inside its own simulations."""
    if kind == ObstacleModelKind.FROZEN:
        return FrozenObstacleModel()
    if kind == ObstacleModelKind.STOCHASTIC:
        return StochasticObstacleModel(rng=rng)
    raise InvalidStateError(f"Obstacle model {kind.value} cannot be used for planning")


def world_step(s: WorldState, a: VelocityAction, obstacle_model: ObstacleModel, params: StepParams) -> StepOutcome:
    """Advance robot and obstacles by one step and score the transition."""
    robot = robot_step(s.robot, a, params.t_s)
    obstacles = obstacle_model.advance(s, params.t_s)
    s_next = WorldState(
        robot=robot,
        obstacles=obstacles,
        goal=s.goal,
        workspace=s.workspace,
        walls=s.walls,
        step_index=s.step_index + 1,
        last_action=a,
    )
    r, cause = reward(s, a, s_next, params.reward_goal, s.workspace.diagonal)
    if cause == TerminalCause.NONE and params.episode_cap is not None and s_next.step_index >= params.episode_cap:
        cause = TerminalCause.STEP_LIMIT
    return StepOutcome(s_next, r, cause != TerminalCause.NONE, cause)
