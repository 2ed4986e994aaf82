"""Randomised soundness and completeness checks of the VO kernel against the sampling oracle."""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from core.geometry import Vec2, WallSegment, segment_segment_distance
from core.logging_config import get_logger
from core.models import ConeConstruction
from core.state import ObstacleField, RobotState
from core.vo_kernel import brute_force_safe_headings, compute_safe_velocities, heading_samples


logger = get_logger("vo_oracle")

BOUNDARY_SLACK = 1e-9


@dataclass(frozen=True)
class OracleScene:
    """Robot, obstacles and walls for one randomised check."""
    robot: RobotState
    obstacles: ObstacleField
    walls: Tuple[WallSegment, ...]
    t_s: float


@dataclass
class SceneCheck:
    soundness_violations: int = 0
    completeness_violations: int = 0
    checked_headings: int = 0


@dataclass
class OracleReport:
    """Counts over a batch of random scenes."""
    cone: ConeConstruction
    scenes: int = 0
    sound_scenes: int = 0
    complete_scenes: int = 0
    soundness_violations: int = 0
    completeness_violations: int = 0
    failing_seeds: List[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        if self.soundness_violations:
            return False
        # The tangent cone is deliberately conservative; only soundness is required of it.
        return self.cone == ConeConstruction.TANGENT or self.completeness_violations == 0


def random_scene(
    rng: np.random.Generator,
    max_obstacles: int = 10,
    max_walls: int = 2,
    extent: float = 3.0,
) -> OracleScene:
    """Uniform random scene around a robot at the origin."""
    robot = RobotState(
        position=Vec2(0.0, 0.0),
        heading=float(rng.uniform(-math.pi, math.pi)),
        radius=float(rng.uniform(0.1, 0.5)),
        v_max=float(rng.uniform(0.1, 1.0)),
        omega_max=float(rng.uniform(0.3, 4.0)),
    )
    n = int(rng.integers(0, max_obstacles + 1))
    obstacles = ObstacleField(
        positions=rng.uniform(-extent, extent, size=(n, 2)),
        radii=rng.uniform(0.05, 0.5, size=n),
        v_max=rng.uniform(0.0, 0.5, size=n),
        waypoints=np.zeros((n, 2)),
    )
    walls = []
    for _ in range(int(rng.integers(0, max_walls + 1))):
        a = Vec2(*rng.uniform(-extent, extent, size=2))
        b = a + Vec2.from_polar(float(rng.uniform(0.5, 4.0)), float(rng.uniform(-math.pi, math.pi)))
        walls.append(WallSegment(a, b))
    return OracleScene(robot, obstacles, tuple(walls), float(rng.uniform(0.5, 1.5)))


def _swept_obstacle_distances(start: np.ndarray, ends: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Exact distance from each obstacle centre (N) to each swept segment start->end (K); shape (K, N)."""
    v = ends - start
    vv = np.einsum("ij,ij->i", v, v)
    ap = centers - start
    safe_vv = np.where(vv > 0.0, vv, 1.0)
    t = np.clip((v @ ap.T) / safe_vv[:, None], 0.0, 1.0)
    t = np.where(vv[:, None] > 0.0, t, 0.0)
    closest = start + t[..., None] * v[:, None, :]
    return np.linalg.norm(centers[None, :, :] - closest, axis=-1)


def check_scene(
    scene: OracleScene,
    cone: ConeConstruction,
    angular_resolution: float = 0.01,
    time_resolution: Optional[float] = None,
    safety_margin: float = 0.0,
) -> SceneCheck:
    """
    Compare the kernel with the oracle on one scene.

    Soundness: every kernel-safe heading away from the kernel's own boundaries
    keeps the swept robot centre out of every extended ball and off every
    inflated wall (exact segment distances). Completeness: every oracle-safe
    heading at least two resolutions from an oracle boundary is kernel-safe.
    """
    robot, t_s = scene.robot, scene.t_s
    time_resolution = time_resolution or t_s / 100.0
    kernel = compute_safe_velocities(
        robot, scene.obstacles, scene.walls, t_s, safety_margin=safety_margin, cone=cone
    )
    oracle = brute_force_safe_headings(
        robot, scene.obstacles, scene.walls, t_s, angular_resolution, time_resolution,
        safety_margin=safety_margin,
    )
    check = SceneCheck()
    headings, _ = heading_samples(robot, t_s, angular_resolution / 2.0)
    check.checked_headings = len(headings)

    start = robot.position.as_array()
    r1 = robot.v_max * t_s
    inflate = robot.radius + safety_margin
    kernel_safe = [
        float(h) for h in headings
        if kernel.headings.contains(float(h), tol=0.0)
        and kernel.headings.distance_to_boundary(float(h)) >= angular_resolution
    ]
    if kernel_safe and r1 > 0.0:
        hs = np.array(kernel_safe)
        ends = start + r1 * np.stack([np.cos(hs), np.sin(hs)], axis=-1)
        if len(scene.obstacles):
            r2 = scene.obstacles.radii + robot.radius + scene.obstacles.v_max * t_s + safety_margin
            dist = _swept_obstacle_distances(start, ends, scene.obstacles.positions)
            check.soundness_violations += int(np.sum(np.any(dist < r2[None, :] - BOUNDARY_SLACK, axis=1)))
        for wall in scene.walls:
            # A robot already within the inflation may move, but never closer.
            limit = min(inflate, wall.distance_to(robot.position))
            for end in ends:
                d = segment_segment_distance(start, end, wall.a.as_array(), wall.b.as_array())
                if d < limit - BOUNDARY_SLACK:
                    check.soundness_violations += 1

    margin = 2.0 * angular_resolution
    for h in headings:
        h = float(h)
        if oracle.contains(h, tol=0.0) and oracle.distance_to_boundary(h) >= margin:
            if not kernel.headings.contains(h):
                check.completeness_violations += 1
    return check


def run_oracle_suite(
    samples: int,
    seed: int = 0,
    cone: ConeConstruction = ConeConstruction.INTERSECTION,
    angular_resolution: float = 0.01,
    max_obstacles: int = 10,
    max_walls: int = 2,
) -> OracleReport:
    """Check `samples` random scenes; each scene has its own child seed."""
    report = OracleReport(cone=cone)
    children = np.random.SeedSequence(seed).spawn(samples)
    for index, child in enumerate(children):
        scene = random_scene(np.random.default_rng(child), max_obstacles, max_walls)
        check = check_scene(scene, cone, angular_resolution)
        report.scenes += 1
        report.soundness_violations += check.soundness_violations
        report.completeness_violations += check.completeness_violations
        if check.soundness_violations == 0:
            report.sound_scenes += 1
        if check.completeness_violations == 0:
            report.complete_scenes += 1
        if check.soundness_violations or (cone == ConeConstruction.INTERSECTION and check.completeness_violations):
            report.failing_seeds.append(index)
            logger.debug(f"Scene {index}: {check}")

    logger.info(
        f"Oracle check ({cone.value}): {report.scenes} scenes, "
        f"{report.soundness_violations} soundness and "
        f"{report.completeness_violations} completeness violations"
    )
    return report
