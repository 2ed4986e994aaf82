"""
Experiment harness: scenario generation, episode execution, the m-sweep and
metric aggregation.

Randomness: one master seed per sweep. Scenario index k gets its own
SeedSequence([master_seed, k]) spawning three streams: scenario placement,
obstacle noise and planner. Every planner and every m on scenario k therefore
sees the same initial world and the same obstacle motion, and the planner
stream does not depend on m.
"""

import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.baseline_planners import DWAPlanner, VOPlanner
from core.data_persistence import ResultsStore
from core.exceptions import EmptyGroupError, PlacementFailureError, ReplayError, SweepInterruptedError
from core.geometry import Vec2, WallSegment
from core.logging_config import get_logger, planning_log
from core.mcts_planner import MCTSPlanner
from core.mdp_world import (
    ObstacleNoise, ReplayObstacleModel, StepParams, StochasticObstacleModel, world_step,
)
from core.models import (
    DWAConfig, EpisodeRecord, MetricsSummary, PlannerConfig, PlannerId, ScenarioConfig,
    StepLog, SweepConfig, TerminalCause,
)
from core.planner_base import Planner
from core.state import ObstacleField, RobotState, VelocityAction, Workspace, WorldState


logger = get_logger("experiment_harness")

MAX_PLACEMENT_ATTEMPTS = 10_000
REPLAY_TOL = 1e-9


@dataclass(frozen=True)
class EpisodeSeeds:
    scenario_seed: int
    noise_seed: int
    planner_seed: int


def episode_streams(master_seed: int, scenario_index: int) -> EpisodeSeeds:
    """Seeds of the three independent streams for one scenario index."""
    children = np.random.SeedSequence([master_seed, scenario_index]).spawn(3)
    scenario, noise, planner = (int(c.generate_state(1)[0]) for c in children)
    return EpisodeSeeds(scenario, noise, planner)


def scenario_walls(scenario: ScenarioConfig, workspace: Workspace) -> Tuple[WallSegment, ...]:
    walls = tuple(WallSegment(Vec2(*a), Vec2(*b)) for a, b in scenario.walls)
    if scenario.boundary_walls:
        walls += workspace.boundary_walls()
    return walls


def generate_scenario(base: ScenarioConfig, seed: int) -> WorldState:
    """
    Initial world for one scenario.

    Obstacle centres are uniform over the workspace (discs kept inside) and
    rejected while they fall inside the robot's extended ball or overlap the
    goal disc; waypoints are uniform over the workspace.
    """
    rng = np.random.default_rng(seed)
    workspace = Workspace(*base.workspace)
    start = Vec2(*base.robot_start)
    goal = Vec2(*base.goal)
    heading = base.robot_heading if base.robot_heading is not None else start.bearing_to(goal)
    robot = RobotState(start, heading, base.robot_radius, base.v_max, base.omega_max)

    r2 = base.extended_radius
    goal_clearance = base.obstacle_radius + base.robot_radius
    positions = np.zeros((base.n_obstacles, 2))
    attempts = 0
    for i in range(base.n_obstacles):
        while True:
            if attempts >= MAX_PLACEMENT_ATTEMPTS:
                raise PlacementFailureError(
                    f"Could not place obstacle {i} of {base.n_obstacles}", attempts=attempts
                )
            attempts += 1
            candidate = workspace.sample_points(rng, 1, margin=base.obstacle_radius)[0]
            if math.hypot(*(candidate - start.as_array())) <= r2:
                continue
            if math.hypot(*(candidate - goal.as_array())) <= goal_clearance:
                continue
            positions[i] = candidate
            break
    waypoints = workspace.sample_points(rng, base.n_obstacles)

    obstacles = ObstacleField(
        positions=positions,
        radii=np.full(base.n_obstacles, base.obstacle_radius),
        v_max=np.full(base.n_obstacles, base.obstacle_v_max),
        waypoints=waypoints,
    )
    return WorldState(robot, obstacles, goal, workspace, walls=scenario_walls(base, workspace))


def build_planner(
    planner_id: PlannerId,
    planner_config: PlannerConfig,
    params: StepParams,
    m: Optional[int] = None,
    dwa_config: Optional[DWAConfig] = None,
) -> Tuple[Planner, PlannerConfig]:
    """Planner for an identifier, plus the effective planner configuration to record."""
    variant = planner_id.variant
    if variant is not None:
        update = {"variant": variant}
        if m is not None:
            update["simulations"] = m
        config = planner_config.model_copy(update=update)
        return MCTSPlanner(config, params, planner_id), config
    if planner_id == PlannerId.VO_PLANNER:
        return VOPlanner(planner_config, params), planner_config
    return DWAPlanner(dwa_config or DWAConfig(), params, planner_config.n_speeds, planner_config.n_angles), planner_config


def run_episode(
    planner: Planner,
    scenario: ScenarioConfig,
    seeds: EpisodeSeeds,
    planner_config: PlannerConfig,
    scenario_index: int = 0,
    m: int = 0,
    dwa_config: Optional[DWAConfig] = None,
    record_timing: bool = True,
) -> EpisodeRecord:
    """
    Alternate planner decisions and environment steps until the episode ends.

    The environment moves obstacles from the pre-generated noise table, so it,
    not the planner's internal model, decides collisions.
    """
    params = StepParams.from_scenario(scenario)
    state = generate_scenario(scenario, seeds.scenario_seed)
    noise = ObstacleNoise.generate(seeds.noise_seed, scenario.episode_cap, len(state.obstacles))
    environment = StochasticObstacleModel(noise=noise)
    rng = np.random.default_rng(seeds.planner_seed)

    steps: List[StepLog] = []
    violations = 0
    cause = TerminalCause.NONE
    while True:
        decision = planner.decide(state, rng)
        t_plan = decision.planning_time
        if t_plan >= params.t_s:
            violations += 1
            logger.warning(
                f"{planner.planner_id.value}: planning took {t_plan:.3f}s at step {state.step_index}, "
                f"not below t_s={params.t_s}"
            )
        outcome = world_step(state, decision.action, environment, params)
        steps.append(StepLog(
            step=state.step_index,
            state=state.snapshot(),
            action=decision.action.as_tuple(),
            reward=outcome.reward,
            planning_time=t_plan if record_timing else 0.0,
            cause=outcome.cause,
        ))
        planning_log(
            logger, "%s m=%d scenario=%d step=%d action=(%.3f, %.3f) reward=%.4f t_plan=%.4f",
            planner.planner_id.value, m, scenario_index, state.step_index,
            decision.action.speed, decision.action.heading, outcome.reward, t_plan,
        )
        state = outcome.next_state
        if outcome.terminal:
            cause = outcome.cause
            break

    record = EpisodeRecord(
        scenario_index=scenario_index,
        scenario_seed=seeds.scenario_seed,
        noise_seed=seeds.noise_seed,
        planner_seed=seeds.planner_seed,
        planner=planner.planner_id,
        m=m,
        discount=planner_config.gamma,
        steps=steps,
        final_state=state.snapshot(),
        outcome=cause,
        rho=0.0,
        n_steps=len(steps),
        tplan_violations=violations,
        scenario=scenario,
        planner_config=planner_config,
        dwa_config=dwa_config if planner.planner_id == PlannerId.DWA else None,
    )
    record.rho = record.recompute_rho()
    logger.info(
        f"Episode {planner.planner_id.value} m={m} scenario={scenario_index}: "
        f"{cause.value} after {len(steps)} steps, rho={record.rho:.3f}"
    )
    return record


def replay_episode(record: EpisodeRecord) -> EpisodeRecord:
    """
    Re-execute a recorded episode: same initial world, the logged actions and
    the logged obstacle positions. Returns a record with recomputed rewards,
    outcome and rho; raises ReplayError when the log is inconsistent.
    """
    scenario = record.scenario
    params = StepParams.from_scenario(scenario)
    state = generate_scenario(scenario, record.scenario_seed)
    if record.steps and not np.allclose(state.snapshot(), record.steps[0].state, atol=REPLAY_TOL, rtol=0.0):
        raise ReplayError("Initial state does not match the recorded scenario", {"seed": record.scenario_seed})

    trajectory = [np.asarray(step.state[3:]) for step in record.steps] + [np.asarray(record.final_state[3:])]
    model = ReplayObstacleModel(trajectory)
    steps: List[StepLog] = []
    cause = TerminalCause.NONE
    for k, logged in enumerate(record.steps):
        if not np.allclose(state.snapshot()[:3], logged.state[:3], atol=REPLAY_TOL, rtol=0.0):
            raise ReplayError(f"Robot diverged from the log at step {k}", {"step": k})
        outcome = world_step(state, VelocityAction(*logged.action), model, params)
        steps.append(logged.model_copy(update={"reward": outcome.reward, "cause": outcome.cause}))
        state = outcome.next_state
        cause = outcome.cause
        if outcome.terminal and k != len(record.steps) - 1:
            raise ReplayError(f"Episode ends at step {k} but {len(record.steps)} steps are logged", {"step": k})

    replayed = record.model_copy(update={"steps": steps, "outcome": cause, "final_state": state.snapshot()})
    replayed.rho = replayed.recompute_rho()
    return replayed


# Sweep
@dataclass(frozen=True)
class EpisodeTask:
    planner: PlannerId
    m: int
    scenario_index: int
    seeds: EpisodeSeeds


def sweep_tasks(config: SweepConfig) -> List[EpisodeTask]:
    seeds = [episode_streams(config.master_seed, k) for k in range(config.n_scenarios)]
    return [
        EpisodeTask(planner, m, k, seeds[k])
        for planner in config.planners
        for m in config.m_values
        for k in range(config.n_scenarios)
    ]


def _run_task(task: EpisodeTask, config: SweepConfig) -> EpisodeRecord:
    scenario = config.scenario.model_copy(update={"seed": config.master_seed})
    params = StepParams.from_scenario(scenario)
    planner, effective = build_planner(task.planner, config.planner, params, task.m, config.dwa)
    return run_episode(
        planner, scenario, task.seeds, effective,
        scenario_index=task.scenario_index, m=task.m,
        dwa_config=config.dwa, record_timing=config.record_timing,
    )


def _task_order(config: SweepConfig):
    planners = {p: i for i, p in enumerate(config.planners)}
    m_values = {m: i for i, m in enumerate(config.m_values)}
    return lambda r: (planners[r.planner], m_values[r.m], r.scenario_index)


@dataclass
class SweepResult:
    records: List[EpisodeRecord]
    summary: pd.DataFrame


def sweep(config: SweepConfig, store: Optional[ResultsStore] = None) -> SweepResult:
    """
    One episode per (planner, m, scenario). Records are appended to the store
    as they finish, so an interrupted sweep keeps what it completed.
    """
    tasks = sweep_tasks(config)
    logger.info(
        f"Sweep: {len(config.planners)} planners x {len(config.m_values)} m-values x "
        f"{config.n_scenarios} scenarios = {len(tasks)} episodes, jobs={config.jobs}"
    )
    if store is not None:
        store.reset_raw()
        store.write_config(config.model_dump(mode="json"))

    records: List[EpisodeRecord] = []

    def collect(record: EpisodeRecord):
        records.append(record)
        if store is not None:
            store.append_record(record)
        if len(records) % 10 == 0 or len(records) == len(tasks):
            logger.info(f"Sweep progress: {len(records)}/{len(tasks)} episodes")

    try:
        if config.jobs > 1:
            with ProcessPoolExecutor(max_workers=config.jobs) as executor:
                futures = [executor.submit(_run_task, task, config) for task in tasks]
                try:
                    for future in as_completed(futures):
                        collect(future.result())
                except KeyboardInterrupt:
                    executor.shutdown(wait=False, cancel_futures=True)
                    raise
        else:
            for task in tasks:
                collect(_run_task(task, config))
    except KeyboardInterrupt as e:
        raise SweepInterruptedError(
            f"Sweep interrupted after {len(records)} of {len(tasks)} episodes",
            persisted=len(records) if store is not None else 0,
        ) from e

    records.sort(key=_task_order(config))
    summary = aggregate(records, config.bootstrap_resamples, config.bootstrap_seed, order=config.planners)
    if store is not None:
        store.write_records(records)
        store.write_summary(summary)
        store.write_plot_data(summary)
    return SweepResult(records, summary)


# Aggregation
def bootstrap_ci(
    values: np.ndarray,
    resamples: int = 10_000,
    seed: int = 0,
    level: float = 0.95,
) -> Tuple[float, float]:
    """Percentile bootstrap interval of the mean."""
    values = np.asarray(values, dtype=float)
    if len(values) == 1:
        return float(values[0]), float(values[0])
    rng = np.random.default_rng(seed)
    means = values[rng.integers(0, len(values), size=(resamples, len(values)))].mean(axis=1)
    tail = (1.0 - level) / 2.0 * 100.0
    low, high = np.percentile(means, [tail, 100.0 - tail])
    return float(low), float(high)


def summarize_group(records: Sequence[EpisodeRecord], resamples: int = 10_000, seed: int = 0) -> MetricsSummary:
    """Metrics of one (planner, m) group; population standard deviations."""
    if not records:
        raise EmptyGroupError("Cannot summarize an empty group of episodes")
    rho = np.array([r.rho for r in records])
    outcomes = pd.Series([r.outcome for r in records])
    t_plan = np.array([s.planning_time for r in records for s in r.steps])
    n = len(records)
    ci_low, ci_high = bootstrap_ci(rho, resamples, seed)

    def rate(cause: TerminalCause) -> float:
        return float((outcomes == cause).sum()) / n

    return MetricsSummary(
        planner=records[0].planner.value,
        m=records[0].m,
        mean_rho=float(rho.mean()),
        std_rho=float(rho.std(ddof=0)),
        rho_ci_low=ci_low,
        rho_ci_high=ci_high,
        eta=rate(TerminalCause.COLLISION),
        success_rate=rate(TerminalCause.GOAL_REACHED),
        timeout_rate=rate(TerminalCause.STEP_LIMIT),
        out_of_bounds_rate=rate(TerminalCause.OUT_OF_BOUNDS),
        mean_tplan=float(t_plan.mean()) if len(t_plan) else 0.0,
        std_tplan=float(t_plan.std(ddof=0)) if len(t_plan) else 0.0,
        n=n,
    )


def aggregate(
    records: Sequence[EpisodeRecord],
    resamples: int = 10_000,
    seed: int = 0,
    order: Optional[Sequence[PlannerId]] = None,
) -> pd.DataFrame:
    """One MetricsSummary row per (planner, m), ordered by planner then m."""
    if not records:
        raise EmptyGroupError("No episode records to aggregate")
    groups: Dict[Tuple[PlannerId, int], List[EpisodeRecord]] = {}
    for record in records:
        groups.setdefault((record.planner, record.m), []).append(record)

    rank = {p: i for i, p in enumerate(order or list(PlannerId))}
    keys = sorted(groups, key=lambda key: (rank.get(key[0], len(rank)), key[1]))
    rows = [summarize_group(groups[key], resamples, seed).model_dump() for key in keys]
    return pd.DataFrame(rows, columns=list(MetricsSummary.model_fields))
