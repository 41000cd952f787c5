"""Full pipeline: reachable set, lane graph, searches, challenge case."""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from typing import List, Optional

from .lane_graph import LaneGraph, build_lane_graph
from .reachability import ReachGraph, compute_reach_graph
from .scenario import AnalysisTask, validate_task
from .search import (
    DecisionWindow,
    ManeuverPath,
    backward_search,
    combine,
    forward_search,
    goal_nodes,
)


class ChallengeCase(str, enum.Enum):
    NO_LANE_CHANGE = "NO_LANE_CHANGE"
    LANE_CHANGES_REQUIRED = "LANE_CHANGES_REQUIRED"
    MRM_REQUIRED = "MRM_REQUIRED"


@dataclass(frozen=True)
class ChallengeDescription:
    case: ChallengeCase
    num_lane_changes: int
    windows: List[DecisionWindow]
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "num_lane_changes": self.num_lane_changes,
            "windows": [
                {"earliest_s": w.earliest, "latest_s": w.latest, "duration_s": w.duration}
                for w in self.windows
            ],
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


@dataclass
class Analysis:
    """Everything ``describe`` computed, kept for rendering and debugging."""

    task: AnalysisTask
    reach: ReachGraph
    lanes: Optional[LaneGraph]
    forward: Optional[ManeuverPath]
    backward: Optional[ManeuverPath]
    description: ChallengeDescription


def analyze(task: AnalysisTask, *, timing: bool = False) -> Analysis:
    validate_task(task)
    started = time.perf_counter()
    reach = compute_reach_graph(task)
    lanes = build_lane_graph(reach, task.road, task.ego.width)
    goals = goal_nodes(lanes, reach, task.goal)
    diagnostics = {
        "num_layers": len(reach.layers),
        "max_base_sets_per_layer": max(reach.layer_sizes()),
        "num_base_sets": sum(reach.layer_sizes()),
        "num_lane_nodes": len(lanes.nodes),
        "num_goal_nodes": len(goals),
    }
    fwd = bwd = None
    if not goals:
        desc_args = dict(case=ChallengeCase.MRM_REQUIRED, num_lane_changes=0, windows=[])
    else:
        fwd = forward_search(lanes, lanes.initial_nodes, goals, task.goal.k_max)
        bwd = backward_search(lanes, goals, lanes.initial_nodes)
        windows = combine(fwd, bwd, task.dt)
        diagnostics["forward_change_steps"] = list(fwd.change_steps)
        diagnostics["backward_change_steps"] = list(bwd.change_steps)
        diagnostics["forward_goal_step"] = fwd.nodes[-1].k
        if fwd.multi_lane_jump:
            diagnostics["multi_lane_jump"] = True
        if fwd.total_weight == 0:
            desc_args = dict(case=ChallengeCase.NO_LANE_CHANGE, num_lane_changes=0, windows=[])
        else:
            desc_args = dict(case=ChallengeCase.LANE_CHANGES_REQUIRED,
                             num_lane_changes=fwd.total_weight, windows=windows)
    if timing:
        diagnostics["runtime_s"] = round(time.perf_counter() - started, 3)
    description = ChallengeDescription(diagnostics=diagnostics, **desc_args)
    return Analysis(task, reach, lanes, fwd, bwd, description)


def describe(task: AnalysisTask, *, timing: bool = False) -> ChallengeDescription:
    """Classify ``task`` into one of the three challenge cases."""
    return analyze(task, timing=timing).description
