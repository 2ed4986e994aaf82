"""Immutable value types for the navigation MDP state."""

import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import InvalidStateError
from core.geometry import Arc, Vec2, WallSegment, wrap_angle


MIN_HALF_SPAN = 1e-9


@dataclass(frozen=True)
class VelocityAction:
    """Speed/heading command: move at `speed` along `heading` for one time step."""
    speed: float
    heading: float

    def __post_init__(self):
        if not (math.isfinite(self.speed) and math.isfinite(self.heading)):
            raise InvalidStateError(f"Action must be finite, got ({self.speed}, {self.heading})")
        if self.speed < 0.0:
            raise InvalidStateError(f"Action speed must be non-negative, got {self.speed}")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def is_stationary(self) -> bool:
        return self.speed == 0.0

    def as_tuple(self) -> Tuple[float, float]:
        return (self.speed, self.heading)


@dataclass(frozen=True)
class RobotState:
    """Disc robot pose and kinematic limits."""
    position: Vec2
    heading: float
    radius: float
    v_max: float
    omega_max: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise InvalidStateError(f"Robot radius must be positive, got {self.radius}")
        if self.v_max < 0.0 or self.omega_max < 0.0:
            raise InvalidStateError(
                "Robot speed limits must be non-negative",
                {"v_max": self.v_max, "omega_max": self.omega_max}
            )
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    def heading_span(self, t_s: float) -> float:
        """Largest heading change reachable in one step, capped at pi."""
        return min(self.omega_max * t_s, math.pi)

    def kinematic_arc(self, t_s: float) -> Arc:
        # A robot that cannot turn keeps a hairline arc around its heading.
        return Arc.centered(self.heading, max(self.heading_span(t_s), MIN_HALF_SPAN))


@dataclass(frozen=True)
class ObstacleState:
    """One moving disc obstacle. `goal_waypoint` is private to the simulator."""
    position: Vec2
    radius: float
    v_max: float
    goal_waypoint: Vec2

    def __post_init__(self):
        if not self.radius > 0.0:
            raise InvalidStateError(f"Obstacle radius must be positive, got {self.radius}")
        if self.v_max < 0.0:
            raise InvalidStateError(f"Obstacle v_max must be non-negative, got {self.v_max}")


def _frozen(values, shape_tail: Tuple[int, ...], name: str) -> np.ndarray:
    array = np.array(values, dtype=float).reshape((-1,) + shape_tail)
    if not np.all(np.isfinite(array)):
        raise InvalidStateError(f"Obstacle {name} must be finite")
    array.flags.writeable = False
    return array


class ObstacleField:
    """
    Column-oriented collection of obstacles backed by read-only arrays.

    Successor fields share the radius and speed columns with their parent and
    get fresh position/waypoint arrays, so stepping never mutates a parent.
    """

    __slots__ = ("positions", "radii", "v_max", "waypoints")

    def __init__(self, positions, radii, v_max, waypoints):
        self.positions = _frozen(positions, (2,), "positions")
        self.radii = _frozen(radii, (), "radii")
        self.v_max = _frozen(v_max, (), "v_max")
        self.waypoints = _frozen(waypoints, (2,), "waypoints")
        n = len(self.positions)
        if not (len(self.radii) == len(self.v_max) == len(self.waypoints) == n):
            raise InvalidStateError(
                "Obstacle columns must have the same length",
                {"positions": n, "radii": len(self.radii), "v_max": len(self.v_max),
                 "waypoints": len(self.waypoints)}
            )
        if n and (np.any(self.radii <= 0.0) or np.any(self.v_max < 0.0)):
            raise InvalidStateError("Obstacle radii must be positive and speeds non-negative")

    @classmethod
    def empty(cls) -> "ObstacleField":
        return cls(np.zeros((0, 2)), np.zeros(0), np.zeros(0), np.zeros((0, 2)))

    @classmethod
    def from_states(cls, obstacles: Sequence[ObstacleState]) -> "ObstacleField":
        if not obstacles:
            return cls.empty()
        return cls(
            [o.position.as_tuple() for o in obstacles],
            [o.radius for o in obstacles],
            [o.v_max for o in obstacles],
            [o.goal_waypoint.as_tuple() for o in obstacles],
        )

    def with_motion(self, positions: np.ndarray, waypoints: np.ndarray) -> "ObstacleField":
        moved = ObstacleField.__new__(ObstacleField)
        moved.positions = _frozen(positions, (2,), "positions")
        moved.waypoints = _frozen(waypoints, (2,), "waypoints")
        moved.radii = self.radii
        moved.v_max = self.v_max
        return moved

    def flat_positions(self) -> List[float]:
        return [float(v) for v in self.positions.ravel()]

    def __len__(self) -> int:
        return len(self.positions)

    def __getitem__(self, index: int) -> ObstacleState:
        return ObstacleState(
            position=Vec2.from_iterable(self.positions[index]),
            radius=float(self.radii[index]),
            v_max=float(self.v_max[index]),
            goal_waypoint=Vec2.from_iterable(self.waypoints[index]),
        )

    def __iter__(self) -> Iterator[ObstacleState]:
        for i in range(len(self)):
            yield self[i]

    def __repr__(self) -> str:
        return f"ObstacleField(n={len(self)})"


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned rectangular workspace."""
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise InvalidStateError(
                "Workspace must have positive width and height",
                {"bounds": (self.x_min, self.y_min, self.x_max, self.y_max)}
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains_point(self, p: Vec2) -> bool:
        return self.x_min <= p.x <= self.x_max and self.y_min <= p.y <= self.y_max

    def contains_disc(self, center: Vec2, radius: float) -> bool:
        return (
            self.x_min <= center.x - radius and center.x + radius <= self.x_max
            and self.y_min <= center.y - radius and center.y + radius <= self.y_max
        )

    def sample_points(self, rng: np.random.Generator, n: int, margin: float = 0.0) -> np.ndarray:
        low = (self.x_min + margin, self.y_min + margin)
        high = (self.x_max - margin, self.y_max - margin)
        return rng.uniform(low, high, size=(n, 2))

    def boundary_walls(self) -> Tuple[WallSegment, ...]:
        corners = [
            Vec2(self.x_min, self.y_min), Vec2(self.x_max, self.y_min),
            Vec2(self.x_max, self.y_max), Vec2(self.x_min, self.y_max),
        ]
        return tuple(WallSegment(corners[i], corners[(i + 1) % 4]) for i in range(4))


@dataclass(frozen=True)
class WorldState:
    """Robot, obstacles, goal and workspace: the MDP state."""
    robot: RobotState
    obstacles: ObstacleField
    goal: Vec2
    workspace: Workspace
    walls: Tuple[WallSegment, ...] = field(default_factory=tuple)
    step_index: int = 0
    last_action: Optional[VelocityAction] = None  # the commanded velocity v_R

    def __post_init__(self):
        if self.step_index < 0:
            raise InvalidStateError(f"step_index must be non-negative, got {self.step_index}")

    @property
    def goal_bearing(self) -> float:
        return self.robot.position.bearing_to(self.goal)

    @property
    def goal_distance(self) -> float:
        return self.robot.position.distance_to(self.goal)

    def snapshot(self) -> List[float]:
        """Flat numeric snapshot: robot x, y, heading, then x, y per obstacle."""
        robot = self.robot
        return [robot.position.x, robot.position.y, robot.heading] + self.obstacles.flat_positions()
