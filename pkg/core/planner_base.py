"""Common interface for the online planners."""

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from core.models import PlannerId
from core.state import VelocityAction, WorldState


@dataclass
class Decision:
    """Action chosen for one decision step plus what the planner wants logged."""
    action: VelocityAction
    planning_time: float
    diagnostics: Dict[str, Any] = field(default_factory=dict)


class Planner(ABC):
    """A planner maps the current world state to one velocity command."""

    planner_id: PlannerId

    @abstractmethod
    def _choose(self, state: WorldState, rng: np.random.Generator) -> Decision:
        """Pick an action; `planning_time` is filled in by `decide`."""

    def decide(self, state: WorldState, rng: np.random.Generator) -> Decision:
        """Choose an action and measure the wall-clock planning time."""
        start = time.perf_counter()
        decision = self._choose(state, rng)
        decision.planning_time = time.perf_counter() - start
        return decision

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.planner_id.value})"
