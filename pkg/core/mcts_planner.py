"""
Monte Carlo tree search with UCT, optionally pruned by velocity obstacles.

The variant decides where the VO kernel restricts the robot: inside the tree
(admissible actions at every node), inside the rollout policy, both or neither.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from core.geometry import AngularIntervalSet, Arc
from core.logging_config import get_logger
from core.mdp_world import (
    ObstacleModel, StepParams, action_space, make_planning_model, restrict_actions, terminal_cause,
    world_step,
)
from core.models import PlannerConfig, PlannerId, PlannerVariant, TerminalCause
from core.planner_base import Decision, Planner
from core.state import VelocityAction, WorldState
from core.vo_kernel import SafeVelocitySet, compute_safe_velocities


logger = get_logger("mcts_planner")


def kinematic_velocities(state: WorldState, t_s: float) -> SafeVelocitySet:
    """Every velocity the robot can command in one step, ignoring obstacles."""
    robot = state.robot
    return SafeVelocitySet(AngularIntervalSet.from_arc(robot.kinematic_arc(t_s)), (0.0, robot.v_max))


def safe_velocities(state: WorldState, cfg: PlannerConfig, t_s: float) -> SafeVelocitySet:
    return compute_safe_velocities(
        state.robot, state.obstacles, state.walls, t_s,
        safety_margin=cfg.safety_margin, cone=cfg.cone_construction,
    )


@dataclass
class ActionStats:
    visits: int = 0
    q: float = 0.0


@dataclass
class SearchNode:
    """
    Tree node. `actions` is the admissible action list, computed once since the
    state never changes; `stats` and `children` are keyed by index into it.
    """
    state: WorldState
    visit_count: int = 0
    actions: Optional[List[VelocityAction]] = None
    stats: Dict[int, ActionStats] = field(default_factory=dict)
    children: Dict[int, "SearchNode"] = field(default_factory=dict)

    def admissible_actions(self, cfg: PlannerConfig, t_s: float) -> List[VelocityAction]:
        if self.actions is None:
            actions = action_space(self.state.robot, t_s, cfg.n_speeds, cfg.n_angles)
            if cfg.variant.prunes_tree:
                actions = restrict_actions(actions, safe_velocities(self.state, cfg, t_s))
            self.actions = actions
        return self.actions

    def stats_for(self, index: int) -> ActionStats:
        if index not in self.stats:
            self.stats[index] = ActionStats()
        return self.stats[index]


@dataclass
class Expansion:
    """One in-tree transition: the action taken, the node reached and its reward."""
    action_index: int
    child: SearchNode
    reward: float
    terminal: bool
    new_child: bool


@dataclass
class PlanDiagnostics:
    planning_time: float
    m: int
    c_p: float
    variant: PlannerVariant
    root_table: List[Dict[str, Any]]
    chosen_action: VelocityAction
    root_visits: int

    def as_dict(self) -> Dict[str, Any]:
        return {
            "planning_time": self.planning_time,
            "m": self.m,
            "c_p": self.c_p,
            "variant": self.variant.value,
            "root_visits": self.root_visits,
            "chosen_action": list(self.chosen_action.as_tuple()),
            "root_table": self.root_table,
        }


def uct_select(node: SearchNode, c_p: float) -> int:
    """
    Index of the admissible action with the best upper confidence bound.

    Unvisited actions come first in index order; otherwise the bound is
    Q + 2*c_p*sqrt(ln N(s) / N(s, a)) and ties go to the lowest index.
    """
    actions = node.actions or []
    for index in range(len(actions)):
        if node.stats.get(index) is None or node.stats[index].visits == 0:
            return index
    log_n = math.log(node.visit_count)
    visits = np.array([node.stats[i].visits for i in range(len(actions))], dtype=float)
    q = np.array([node.stats[i].q for i in range(len(actions))])
    bounds = q + 2.0 * c_p * np.sqrt(log_n / visits)
    return int(np.argmax(bounds))


def expand(
    node: SearchNode,
    cfg: PlannerConfig,
    model: ObstacleModel,
    params: StepParams,
) -> Expansion:
    """Select an action at `node`, sample its successor and attach the child if it is new."""
    actions = node.admissible_actions(cfg, params.t_s)
    index = uct_select(node, cfg.exploration_constant)
    outcome = world_step(node.state, actions[index], model, params)
    child = node.children.get(index)
    new_child = child is None
    if new_child:
        child = SearchNode(outcome.next_state)
        node.children[index] = child
    return Expansion(index, child, outcome.reward, outcome.terminal, new_child)


def choose_rollout_action(
    state: WorldState,
    admissible: SafeVelocitySet,
    epsilon0: float,
    delta: float,
    rng: np.random.Generator,
) -> VelocityAction:
    """
    Epsilon-greedy default policy.

    With probability `epsilon0` the heading is uniform over the admissible
    headings; otherwise it is uniform over the admissible part of the cone of
    half-width `delta` around the goal bearing, or over all admissible headings
    when that part is empty. The speed is uniform over the admissible range.
    """
    if admissible.is_stationary:
        return VelocityAction(0.0, state.robot.heading)
    headings = admissible.headings
    if rng.random() >= epsilon0:
        goal_cone = AngularIntervalSet.from_arc(Arc.centered(state.goal_bearing, delta)) & headings
        if goal_cone:
            headings = goal_cone
    heading = headings.sample(rng)
    v_lo, v_hi = admissible.speed_range
    return VelocityAction(float(rng.uniform(v_lo, v_hi)), heading)


def rollout(
    state: WorldState,
    cfg: PlannerConfig,
    rng: np.random.Generator,
    model: ObstacleModel,
    params: StepParams,
    max_steps: Optional[int] = None,
) -> float:
    """Discounted return of one default-policy run from `state`, counting from gamma^0."""
    if terminal_cause(state) != TerminalCause.NONE:
        return 0.0
    max_steps = cfg.depth_cap if max_steps is None else max_steps
    total = 0.0
    weight = 1.0
    for _ in range(max_steps):
        if cfg.variant.prunes_rollout:
            admissible = safe_velocities(state, cfg, params.t_s)
        else:
            admissible = kinematic_velocities(state, params.t_s)
        action = choose_rollout_action(state, admissible, cfg.epsilon0, cfg.goal_cone_delta, rng)
        outcome = world_step(state, action, model, params)
        total += weight * outcome.reward
        if outcome.terminal:
            break
        weight *= cfg.gamma
        state = outcome.next_state
    return total


def backup(path: List[Tuple[SearchNode, int, float]], leaf_value: float, gamma: float):
    """Propagate a return from leaf to root: G = r + gamma*G, then running-mean Q updates."""
    g = leaf_value
    for node, index, reward in reversed(path):
        g = reward + gamma * g
        stats = node.stats_for(index)
        stats.visits += 1
        stats.q += (g - stats.q) / stats.visits
        node.visit_count += 1


def simulate(
    root: SearchNode,
    cfg: PlannerConfig,
    rng: np.random.Generator,
    model: ObstacleModel,
    params: StepParams,
):
    """One simulation: descend with UCT, roll out from the new leaf, back up."""
    path: List[Tuple[SearchNode, int, float]] = []
    node = root
    depth = 0
    leaf_value = 0.0
    while True:
        step = expand(node, cfg, model, params)
        depth += 1
        path.append((node, step.action_index, step.reward))
        if step.terminal or depth >= cfg.depth_cap:
            break
        if step.new_child:
            leaf_value = rollout(step.child.state, cfg, rng, model, params, cfg.depth_cap - depth)
            break
        node = step.child
    backup(path, leaf_value, cfg.gamma)


def plan(
    root_state: WorldState,
    cfg: PlannerConfig,
    rng: np.random.Generator,
    params: Optional[StepParams] = None,
) -> Tuple[VelocityAction, PlanDiagnostics]:
    """
    Run `cfg.simulations` simulations from `root_state` and return the root
    action with the highest mean return among those visited.
    """
    start = time.perf_counter()
    params = params or StepParams(episode_cap=None)
    if params.episode_cap is not None:
        params = StepParams(params.t_s, params.reward_goal, None)
    model = make_planning_model(cfg.planning_obstacle_model, rng)

    root = SearchNode(root_state)
    actions = root.admissible_actions(cfg, params.t_s)
    if not any(a.speed > 0.0 for a in actions):
        logger.warning(f"No moving action is safe at step {root_state.step_index}; only rotations remain")
    for _ in range(cfg.simulations):
        simulate(root, cfg, rng, model, params)

    best_index = -1
    best_q = -math.inf
    for index in range(len(actions)):
        stats = root.stats.get(index)
        if stats is not None and stats.visits > 0 and stats.q > best_q:
            best_index, best_q = index, stats.q
    chosen = actions[best_index]

    diagnostics = PlanDiagnostics(
        planning_time=time.perf_counter() - start,
        m=cfg.simulations,
        c_p=cfg.exploration_constant,
        variant=cfg.variant,
        root_table=[
            {"index": i, "speed": actions[i].speed, "heading": actions[i].heading,
             "visits": s.visits, "q": s.q}
            for i, s in sorted(root.stats.items())
        ],
        chosen_action=chosen,
        root_visits=root.visit_count,
    )
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"Root: {len(actions)} admissible, chose #{best_index} q={best_q:.3f}")
    return chosen, diagnostics


class MCTSPlanner(Planner):
    """Online MCTS planner; one fresh tree per decision step."""

    def __init__(self, config: PlannerConfig, params: StepParams, planner_id: Optional[PlannerId] = None):
        self.config = config
        self.params = StepParams(params.t_s, params.reward_goal, None)
        self.planner_id = planner_id or {
            PlannerVariant.PLAIN: PlannerId.MCTS,
            PlannerVariant.VO_TREE: PlannerId.MCTS_VO_TREE,
            PlannerVariant.VO_ROLLOUT: PlannerId.MCTS_VO_ROLLOUT,
            PlannerVariant.VO_BOTH: PlannerId.MCTS_VO2,
        }[config.variant]

    def _choose(self, state: WorldState, rng: np.random.Generator) -> Decision:
        action, diagnostics = plan(state, self.config, rng, self.params)
        return Decision(action, diagnostics.planning_time, diagnostics.as_dict())
