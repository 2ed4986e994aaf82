"""Configuration and result records for planners and experiments."""

import math
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# Enums
class TerminalCause(str, Enum):
    """Why a step ended the episode; NONE for non-terminal steps."""
    GOAL_REACHED = "goal_reached"
    OUT_OF_BOUNDS = "out_of_bounds"
    COLLISION = "collision"
    STEP_LIMIT = "step_limit"
    NONE = "none"


class PlannerVariant(str, Enum):
    """Where velocity-obstacle pruning is applied inside MCTS."""
    PLAIN = "plain"
    VO_TREE = "vo_tree"
    VO_ROLLOUT = "vo_rollout"
    VO_BOTH = "vo_both"

    @property
    def prunes_tree(self) -> bool:
        return self in (PlannerVariant.VO_TREE, PlannerVariant.VO_BOTH)

    @property
    def prunes_rollout(self) -> bool:
        return self in (PlannerVariant.VO_ROLLOUT, PlannerVariant.VO_BOTH)


class PlannerId(str, Enum):
    """Planner identifiers used on the command line and in result files."""
    MCTS = "mcts"
    MCTS_VO_TREE = "mcts_vo_tree"
    MCTS_VO_ROLLOUT = "mcts_vo_rollout"
    MCTS_VO2 = "mcts_vo2"
    VO_PLANNER = "vo_planner"
    DWA = "dwa"

    @property
    def variant(self) -> Optional[PlannerVariant]:
        return {
            PlannerId.MCTS: PlannerVariant.PLAIN,
            PlannerId.MCTS_VO_TREE: PlannerVariant.VO_TREE,
            PlannerId.MCTS_VO_ROLLOUT: PlannerVariant.VO_ROLLOUT,
            PlannerId.MCTS_VO2: PlannerVariant.VO_BOTH,
        }.get(self)

    @property
    def is_reactive(self) -> bool:
        return self.variant is None


class ObstacleModelKind(str, Enum):
    """How obstacles move when a state is stepped."""
    FROZEN = "frozen"
    STOCHASTIC = "stochastic"
    REPLAY = "replay"


class ConeConstruction(str, Enum):
    """How the blocked heading arc of an obstacle is built."""
    TANGENT = "tangent"
    INTERSECTION = "intersection"


Point = Tuple[float, float]


# Configuration models
class ScenarioConfig(BaseModel):
    """One benchmark scenario: workspace, robot, obstacle population and goal."""
    model_config = ConfigDict(extra="forbid")

    workspace: Tuple[float, float, float, float] = (0.0, 0.0, 10.0, 10.0)
    n_obstacles: int = Field(default=40, ge=0)
    obstacle_radius: float = Field(default=0.2, gt=0)
    robot_radius: float = Field(default=0.3, gt=0)
    v_max: float = Field(default=0.3, gt=0)
    omega_max: float = Field(default=1.9, gt=0)
    obstacle_v_max: float = Field(default=0.2, gt=0)
    t_s: float = Field(default=1.0, gt=0)
    reward_goal: float = Field(default=100.0, gt=0)
    seed: int = 0
    robot_start: Point = (1.0, 1.0)
    goal: Point = (9.0, 9.0)
    robot_heading: Optional[float] = None  # None: face the goal
    episode_cap: int = Field(default=100, ge=1)
    walls: List[Tuple[Point, Point]] = Field(default_factory=list)
    boundary_walls: bool = False

    @field_validator("workspace")
    @classmethod
    def validate_workspace(cls, v):
        x_min, y_min, x_max, y_max = v
        if not (x_max > x_min and y_max > y_min):
            raise ValueError("workspace must be (x_min, y_min, x_max, y_max) with positive extent")
        return v

    @field_validator("walls")
    @classmethod
    def validate_walls(cls, v):
        for a, b in v:
            if math.hypot(b[0] - a[0], b[1] - a[1]) == 0.0:
                raise ValueError(f"wall endpoints coincide: {a}")
        return v

    @model_validator(mode="after")
    def validate_start_and_goal(self):
        x_min, y_min, x_max, y_max = self.workspace
        sx, sy = self.robot_start
        gx, gy = self.goal
        r = self.robot_radius
        if not (x_min + r <= sx <= x_max - r and y_min + r <= sy <= y_max - r):
            raise ValueError("robot_start must keep the robot disc inside the workspace")
        if not (x_min <= gx <= x_max and y_min <= gy <= y_max):
            raise ValueError("goal must lie inside the workspace")
        if math.hypot(gx - sx, gy - sy) < r:
            raise ValueError("robot_start already reaches the goal")
        return self

    @property
    def extended_radius(self) -> float:
        """Obstacle radius inflated by the robot radius and one step of obstacle travel."""
        return self.obstacle_radius + self.robot_radius + self.obstacle_v_max * self.t_s


class PlannerConfig(BaseModel):
    """MCTS parameters. Reactive planners read epsilon0, goal_cone_delta and the grid sizes."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    simulations: int = Field(default=50, ge=1)
    gamma: float = Field(default=0.7, ge=0.0, lt=1.0)
    exploration_constant: float = Field(default=1.0, gt=0)
    epsilon0: float = Field(default=0.2, ge=0.0, le=1.0)
    goal_cone_delta: float = Field(default=1.0, gt=0)
    depth_cap: int = Field(default=100, ge=1)
    variant: PlannerVariant = PlannerVariant.PLAIN
    n_speeds: int = Field(default=5, ge=2)
    n_angles: int = Field(default=12, ge=1)
    planning_obstacle_model: ObstacleModelKind = ObstacleModelKind.FROZEN
    safety_margin: float = Field(default=0.0, ge=0.0)
    cone_construction: ConeConstruction = ConeConstruction.INTERSECTION

    @field_validator("planning_obstacle_model")
    @classmethod
    def validate_planning_model(cls, v):
        if v == ObstacleModelKind.REPLAY:
            raise ValueError("the planner cannot use the replay obstacle model")
        return v


class DWAConfig(BaseModel):
    """Dynamic-window objective weights; a tuning surface."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    w_goal: float = Field(default=1.0, ge=0.0)
    w_clear: float = Field(default=0.5, ge=0.0)
    w_vel: float = Field(default=0.3, ge=0.0)
    clearance_cap: float = Field(default=2.0, gt=0)
    trajectory_samples: int = Field(default=10, ge=1)


class SweepConfig(BaseModel):
    """Full m-sweep protocol. `model_dump()` is the resolved configuration."""
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    planners: List[PlannerId] = Field(default_factory=lambda: list(PlannerId))
    m_values: List[int] = Field(default_factory=lambda: [10, 25, 50, 100, 200, 400])
    n_scenarios: int = Field(default=50, ge=1)
    master_seed: int = Field(default=0, ge=0)
    jobs: int = Field(default=1, ge=1)
    planner: PlannerConfig = Field(default_factory=PlannerConfig)
    dwa: DWAConfig = Field(default_factory=DWAConfig)
    record_timing: bool = True
    bootstrap_resamples: int = Field(default=10000, ge=1)
    bootstrap_seed: int = 0

    @field_validator("planners")
    @classmethod
    def validate_planners(cls, v):
        if not v:
            raise ValueError("at least one planner is required")
        if len(set(v)) != len(v):
            raise ValueError("planner identifiers must be unique")
        return v

    @field_validator("m_values")
    @classmethod
    def validate_m_values(cls, v):
        if not v or any(m < 1 for m in v):
            raise ValueError("m_values must be a non-empty list of positive integers")
        if len(set(v)) != len(v):
            raise ValueError("m_values must be unique")
        return v


# Result records
class StepLog(BaseModel):
    """
    One environment step.

    `state` is the pre-step snapshot: robot x, y, heading, then x, y for each
    obstacle in scenario order. `action` is (speed, heading).
    """
    model_config = ConfigDict(extra="forbid")

    step: int
    state: List[float]
    action: Tuple[float, float]
    reward: float
    planning_time: float
    cause: TerminalCause = TerminalCause.NONE


class EpisodeRecord(BaseModel):
    """Per-episode trace with the configuration that produced it."""
    model_config = ConfigDict(extra="forbid")

    scenario_index: int
    scenario_seed: int
    noise_seed: int
    planner_seed: int
    planner: PlannerId
    m: int
    discount: float
    steps: List[StepLog]
    final_state: List[float]
    outcome: TerminalCause
    rho: float
    n_steps: int
    tplan_violations: int = 0
    scenario: ScenarioConfig
    planner_config: PlannerConfig
    dwa_config: Optional[DWAConfig] = None

    @model_validator(mode="after")
    def validate_steps(self):
        if self.n_steps != len(self.steps):
            raise ValueError(f"n_steps={self.n_steps} but {len(self.steps)} steps logged")
        return self

    def recompute_rho(self) -> float:
        """Discounted return from the logged rewards."""
        total = 0.0
        weight = 1.0
        for step in self.steps:
            total += weight * step.reward
            weight *= self.discount
        return total

    @property
    def mean_planning_time(self) -> float:
        if not self.steps:
            return 0.0
        return sum(s.planning_time for s in self.steps) / len(self.steps)


class MetricsSummary(BaseModel):
    """Aggregate metrics for one (planner, m) group."""
    planner: str
    m: int
    mean_rho: float
    std_rho: float
    rho_ci_low: float
    rho_ci_high: float
    eta: float
    success_rate: float
    timeout_rate: float
    out_of_bounds_rate: float
    mean_tplan: float
    std_tplan: float
    n: int
