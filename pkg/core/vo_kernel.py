"""
Velocity-obstacle kernel.

Computes the set of safe headings for a disc robot that moves at its maximum
speed for one time step among disc obstacles that may move at their maximum
speed in any direction, and among static wall segments. Every function is a
pure function of its inputs.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import DegenerateWallError, InsideBallError, InvalidStateError
from core.geometry import (
    MERGE_TOL, TWO_PI, AngularIntervalSet, Arc, Vec2, WallSegment,
    angle_diff, clip_segment_to_disc, point_segment_distance,
)
from core.models import ConeConstruction
from core.state import ObstacleField, RobotState, VelocityAction


class BlockKind(str, Enum):
    NO_BLOCK = "no_block"
    BLOCKED = "blocked"
    INSIDE = "inside"


@dataclass(frozen=True)
class BlockResult:
    """Outcome of testing one obstacle or wall against the robot."""
    kind: BlockKind
    arc: Optional[Arc] = None

    @property
    def is_blocked(self) -> bool:
        return self.kind == BlockKind.BLOCKED


NO_BLOCK = BlockResult(BlockKind.NO_BLOCK)
INSIDE = BlockResult(BlockKind.INSIDE)


@dataclass(frozen=True)
class SafeVelocitySet:
    """Safe headings crossed with a speed interval; stationary when no heading is safe."""
    headings: AngularIntervalSet
    speed_range: Tuple[float, float]

    def __post_init__(self):
        v_lo, v_hi = self.speed_range
        if self.headings.is_empty() and (v_lo, v_hi) != (0.0, 0.0):
            raise InvalidStateError("An empty heading set must come with speed range [0, 0]")
        if not 0.0 <= v_lo <= v_hi:
            raise InvalidStateError(f"Invalid speed range {self.speed_range}")

    @classmethod
    def stationary(cls) -> "SafeVelocitySet":
        return cls(AngularIntervalSet.empty(), (0.0, 0.0))

    @property
    def is_stationary(self) -> bool:
        return self.headings.is_empty()

    def admits(self, action: VelocityAction, tol: float = 1e-9) -> bool:
        if action.speed == 0.0:
            return True
        v_lo, v_hi = self.speed_range
        return v_lo - tol <= action.speed <= v_hi + tol and self.headings.contains(action.heading)


def extended_radii(
    robot_vmax: float,
    obstacle_radius: float,
    robot_radius: float,
    obstacle_vmax: float,
    t_s: float,
    safety_margin: float = 0.0,
) -> Tuple[float, float]:
    """
    Reach radius of the robot and extended radius of an obstacle for one step.

    Returns:
        (r1, r2) with r1 = robot_vmax * t_s and
        r2 = obstacle_radius + robot_radius + obstacle_vmax * t_s + safety_margin
    """
    if t_s <= 0.0:
        raise InvalidStateError(f"t_s must be positive, got {t_s}")
    if min(robot_vmax, obstacle_radius, robot_radius, obstacle_vmax, safety_margin) < 0.0:
        raise InvalidStateError("Radii, speeds and margins must be non-negative")
    r1 = robot_vmax * t_s
    r2 = obstacle_radius + robot_radius + obstacle_vmax * t_s + safety_margin
    return r1, r2


def _clamp_unit(x: float) -> float:
    return min(1.0, max(0.0, x))


def tangent_arc(p_R: Vec2, center: Vec2, radius: float) -> Arc:
    """Headings from p_R whose rays cross the open ball B(center, radius)."""
    d = p_R.distance_to(center)
    if d <= radius:
        raise InsideBallError(
            "Point lies inside the ball; no tangent lines exist",
            distance=d, radius=radius,
        )
    half = math.asin(_clamp_unit(radius / d))
    return Arc.centered(p_R.bearing_to(center), half)


def reachable_half_width(distance: float, r1: float, r2: float) -> float:
    """
    Half-width of the bearings of B(p_i, r2) ∩ B(p_R, r1) seen from p_R.

    When the tangent points lie within r1 this is the tangent half-width,
    otherwise it is the bearing of the two circle intersections.
    """
    if distance * distance - r2 * r2 <= r1 * r1:
        return math.asin(_clamp_unit(r2 / distance))
    cos_phi = (r1 * r1 + distance * distance - r2 * r2) / (2.0 * r1 * distance)
    return math.acos(min(1.0, max(-1.0, cos_phi)))


def _half_width(distance: float, r1: float, r2: float, cone: ConeConstruction) -> float:
    if cone == ConeConstruction.INTERSECTION:
        return reachable_half_width(distance, r1, r2)
    return math.asin(_clamp_unit(r2 / distance))


def blocked_arc_obstacle(
    p_R: Vec2,
    p_i: Vec2,
    r1: float,
    r2: float,
    cone: ConeConstruction = ConeConstruction.TANGENT,
) -> BlockResult:
    """Classify one obstacle as not blocking, blocking an arc, or containing the robot."""
    if r1 < 0.0 or r2 < 0.0:
        raise InvalidStateError("r1 and r2 must be non-negative")
    d = p_R.distance_to(p_i)
    if d <= r2:
        return INSIDE
    if d > r1 + r2:
        return NO_BLOCK
    if cone == ConeConstruction.TANGENT:
        return BlockResult(BlockKind.BLOCKED, tangent_arc(p_R, p_i, r2))
    return BlockResult(BlockKind.BLOCKED, Arc.centered(p_R.bearing_to(p_i), reachable_half_width(d, r1, r2)))


def _segment_bearing_arc(p: Vec2, a: Vec2, b: Vec2) -> Arc:
    """Bearings of a segment not containing p; always narrower than pi."""
    theta_a = p.bearing_to(a)
    theta_b = p.bearing_to(b)
    diff = angle_diff(theta_b, theta_a)
    if diff >= 0.0:
        return Arc(theta_a, diff)
    return Arc(theta_b, -diff)


def _hull_arc(blocked: AngularIntervalSet) -> Arc:
    """Smallest single arc covering the set (the complement of its largest gap)."""
    arcs = blocked.arcs
    if len(arcs) == 1:
        return arcs[0]
    gaps = blocked.complement().arcs
    widest = max(gaps, key=lambda g: g.width)
    return Arc(widest.end, TWO_PI - widest.width)


def blocked_arc_wall(p_R: Vec2, wall: WallSegment, reach: float, inflate: float) -> BlockResult:
    """
    Headings that bring the robot within `inflate` of the wall during one step.

    The robot travels at most `reach - inflate`; the blocked bearings are those
    of the wall inflated by `inflate` and clipped to that travel distance.
    """
    if reach <= 0.0:
        raise InvalidStateError(f"reach must be positive, got {reach}")
    if wall.a.distance_to(wall.b) < MERGE_TOL:
        raise DegenerateWallError("Wall endpoints coincide", {"a": wall.a.as_tuple()})
    inflate = max(inflate, 0.0)

    distance = wall.distance_to(p_R)
    if distance >= reach:
        return NO_BLOCK

    if distance <= inflate:
        # Already touching the inflated wall: forbid every heading that closes in on it.
        if distance <= MERGE_TOL:
            return BlockResult(BlockKind.BLOCKED, Arc(0.0, TWO_PI))
        closest = _closest_point(p_R, wall)
        return BlockResult(BlockKind.BLOCKED, Arc.centered(p_R.bearing_to(closest), math.pi / 2.0))

    travel = reach - inflate
    arcs: List[Arc] = []
    if inflate > 0.0:
        for endpoint in (wall.a, wall.b):
            d = p_R.distance_to(endpoint)
            if d < travel + inflate:
                arcs.append(Arc.centered(p_R.bearing_to(endpoint), reachable_half_width(d, travel, inflate)))
        edges = [wall.offset(inflate), wall.offset(-inflate)]
    else:
        edges = [(wall.a, wall.b)]

    for e0, e1 in edges:
        clipped = clip_segment_to_disc(e0, e1, p_R, travel)
        if clipped is not None:
            arcs.append(_segment_bearing_arc(p_R, *clipped))

    blocked = AngularIntervalSet(arcs)
    if blocked.is_empty():
        return NO_BLOCK
    return BlockResult(BlockKind.BLOCKED, _hull_arc(blocked))


def _closest_point(p: Vec2, wall: WallSegment) -> Vec2:
    ab = wall.b - wall.a
    t = min(1.0, max(0.0, (p - wall.a).dot(ab) / ab.dot(ab)))
    return wall.a + ab * t


def compute_safe_velocities(
    robot: RobotState,
    obstacles: ObstacleField,
    walls: Sequence[WallSegment],
    t_s: float,
    safety_margin: float = 0.0,
    cone: ConeConstruction = ConeConstruction.TANGENT,
    wall_inflate: Optional[float] = None,
) -> SafeVelocitySet:
    """
    Safe velocity set for one time step.

    Starts from the kinematically reachable heading arc and removes the blocked
    arc of every obstacle and wall. If the robot is inside any extended ball,
    or nothing is left, the only safe command is to stay still.
    """
    if t_s <= 0.0:
        raise InvalidStateError(f"t_s must be positive, got {t_s}")

    p = robot.position
    r1 = robot.v_max * t_s
    arcs: List[Arc] = []

    if len(obstacles):
        r2 = obstacles.radii + robot.radius + obstacles.v_max * t_s + safety_margin
        delta = obstacles.positions - p.as_array()
        dist = np.hypot(delta[:, 0], delta[:, 1])
        if np.any(dist <= r2):
            return SafeVelocitySet.stationary()
        for i in np.flatnonzero(dist <= r1 + r2):
            d = float(dist[i])
            bearing = math.atan2(delta[i, 1], delta[i, 0])
            arcs.append(Arc.centered(bearing, _half_width(d, r1, float(r2[i]), cone)))

    if walls:
        inflate = robot.radius + safety_margin if wall_inflate is None else wall_inflate
        reach = r1 + inflate
        if reach > 0.0:
            for wall in walls:
                result = blocked_arc_wall(p, wall, reach, inflate)
                if result.is_blocked:
                    arcs.append(result.arc)

    headings = AngularIntervalSet.from_arc(robot.kinematic_arc(t_s))
    if arcs:
        headings = headings.difference(AngularIntervalSet(arcs))
    if headings.is_empty():
        return SafeVelocitySet.stationary()
    return SafeVelocitySet(headings, (0.0, robot.v_max))


def heading_samples(robot: RobotState, t_s: float, resolution: float) -> Tuple[np.ndarray, float]:
    """Evenly spaced headings covering the kinematic arc, and their spacing."""
    span = robot.heading_span(t_s)
    if span >= math.pi:
        n = max(int(math.ceil(TWO_PI / resolution)), 1)
        offsets = np.linspace(-math.pi, math.pi, n, endpoint=False)
        return robot.heading + offsets, TWO_PI / n
    if span <= 0.0:
        return np.array([robot.heading]), 0.0
    n = max(int(math.ceil(2.0 * span / resolution)), 1)
    offsets = np.linspace(-span, span, n + 1)
    return robot.heading + offsets, 2.0 * span / n


def brute_force_safe_headings(
    robot: RobotState,
    obstacles: ObstacleField,
    walls: Sequence[WallSegment],
    t_s: float,
    angular_resolution: float,
    time_resolution: float,
    safety_margin: float = 0.0,
    wall_inflate: Optional[float] = None,
) -> AngularIntervalSet:
    """
    Sampling oracle for the safe heading set.

    A sampled heading is unsafe if, at any sampled time in [0, t_s], the robot
    centre moving at v_max is strictly inside an extended ball or strictly
    closer than the inflation distance to a wall. Each safe sample contributes
    a cell of one sample spacing around it.
    """
    if angular_resolution <= 0.0 or time_resolution <= 0.0:
        raise InvalidStateError("Resolutions must be positive")

    headings, spacing = heading_samples(robot, t_s, angular_resolution)
    n_times = max(int(math.ceil(t_s / time_resolution)), 1) + 1
    times = np.linspace(0.0, t_s, n_times)
    directions = np.stack([np.cos(headings), np.sin(headings)], axis=-1)
    points = robot.position.as_array() + robot.v_max * times[None, :, None] * directions[:, None, :]

    unsafe = np.zeros(len(headings), dtype=bool)
    if len(obstacles):
        r2 = obstacles.radii + robot.radius + obstacles.v_max * t_s + safety_margin
        gaps = points[:, :, None, :] - obstacles.positions[None, None, :, :]
        dist = np.hypot(gaps[..., 0], gaps[..., 1])
        unsafe |= np.any(dist < r2[None, None, :], axis=(1, 2))
    inflate = robot.radius + safety_margin if wall_inflate is None else wall_inflate
    for wall in walls:
        dist = point_segment_distance(points, wall.a.as_array(), wall.b.as_array())
        unsafe |= np.any(dist < inflate, axis=1)

    kinematic = AngularIntervalSet.from_arc(robot.kinematic_arc(t_s))
    if spacing == 0.0:
        return kinematic if not unsafe[0] else AngularIntervalSet.empty()
    cells = [Arc.centered(float(h), spacing / 2.0) for h, bad in zip(headings, unsafe) if not bad]
    return AngularIntervalSet(cells).intersection(kinematic)
