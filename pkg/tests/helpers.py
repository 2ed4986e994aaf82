"""Builders shared by the test suites."""

from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from core.geometry import Vec2, WallSegment
from core.models import EpisodeRecord, PlannerConfig, PlannerId, ScenarioConfig, StepLog, TerminalCause
from core.state import ObstacleField, RobotState, Workspace, WorldState


def make_robot(
    position: Tuple[float, float] = (5.0, 5.0),
    heading: float = 0.0,
    radius: float = 0.3,
    v_max: float = 0.3,
    omega_max: float = 1.9,
) -> RobotState:
    return RobotState(Vec2(*position), heading, radius, v_max, omega_max)


def make_obstacles(
    positions: Sequence[Tuple[float, float]] = (),
    radius: float = 0.2,
    v_max: float = 0.2,
    waypoints: Optional[Sequence[Tuple[float, float]]] = None,
) -> ObstacleField:
    n = len(positions)
    if n == 0:
        return ObstacleField.empty()
    return ObstacleField(
        positions=np.array(positions, dtype=float),
        radii=np.full(n, radius),
        v_max=np.full(n, v_max),
        waypoints=np.array(waypoints if waypoints is not None else positions, dtype=float),
    )


def make_world(
    robot: Optional[RobotState] = None,
    obstacles: Sequence[Tuple[float, float]] = (),
    goal: Tuple[float, float] = (9.0, 9.0),
    workspace: Tuple[float, float, float, float] = (0.0, 0.0, 10.0, 10.0),
    walls: Iterable[Tuple[Tuple[float, float], Tuple[float, float]]] = (),
    step_index: int = 0,
    obstacle_radius: float = 0.2,
    obstacle_v_max: float = 0.2,
) -> WorldState:
    return WorldState(
        robot=robot or make_robot(),
        obstacles=make_obstacles(obstacles, obstacle_radius, obstacle_v_max),
        goal=Vec2(*goal),
        workspace=Workspace(*workspace),
        walls=tuple(WallSegment(Vec2(*a), Vec2(*b)) for a, b in walls),
        step_index=step_index,
    )


def make_record(
    rho: float,
    outcome: TerminalCause = TerminalCause.STEP_LIMIT,
    planner: PlannerId = PlannerId.MCTS,
    m: int = 10,
    planning_times: Sequence[float] = (0.1,),
    scenario_index: int = 0,
) -> EpisodeRecord:
    """Hand-built record whose rho is set directly, for aggregation tests."""
    steps = [
        StepLog(step=k, state=[1.0, 1.0, 0.0], action=(0.0, 0.0), reward=0.0, planning_time=t)
        for k, t in enumerate(planning_times)
    ]
    return EpisodeRecord(
        scenario_index=scenario_index,
        scenario_seed=0,
        noise_seed=0,
        planner_seed=0,
        planner=planner,
        m=m,
        discount=0.7,
        steps=steps,
        final_state=[1.0, 1.0, 0.0],
        outcome=outcome,
        rho=rho,
        n_steps=len(steps),
        scenario=ScenarioConfig(n_obstacles=0),
        planner_config=PlannerConfig(),
    )
