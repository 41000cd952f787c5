"""Minimum-lane-change searches over the lane graph.

Both searches run Dijkstra on a two-component lexicographic cost: the
lane-change weight first, then a timing term summed over lane-change
edges. Forward search charges ``k_max - k`` for a change that lands at
step ``k`` (changes as late as possible); backward search runs on the
reversed graph and charges ``k`` (changes as early as possible).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .lane_graph import LaneGraph, LaneNode
from .reachability import ReachGraph
from .scenario import GoalRegion

Cost = Tuple[int, int]


class SearchError(Exception):
    pass


@dataclass(frozen=True)
class ManeuverPath:
    nodes: Tuple[LaneNode, ...]
    # (index into nodes of the first node in the new lane, its time step)
    lane_changes: Tuple[Tuple[int, int], ...]
    total_weight: int

    @classmethod
    def from_nodes(cls, nodes: Sequence[LaneNode]) -> "ManeuverPath":
        changes = []
        weight = 0
        for i in range(1, len(nodes)):
            d = abs(nodes[i].lane - nodes[i - 1].lane)
            if d:
                changes.append((i, nodes[i].k))
                weight += d
        return cls(tuple(nodes), tuple(changes), weight)

    @property
    def change_steps(self) -> Tuple[int, ...]:
        return tuple(k for _, k in self.lane_changes)

    @property
    def multi_lane_jump(self) -> bool:
        return self.total_weight != len(self.lane_changes)


@dataclass(frozen=True)
class DecisionWindow:
    earliest: float
    latest: float
    duration: float

    @classmethod
    def from_steps(cls, earliest_k: int, latest_k: int, dt: float) -> "DecisionWindow":
        # rounding keeps step multiples of dt free of representation noise
        return cls(round(earliest_k * dt, 9), round(latest_k * dt, 9),
                   round((latest_k - earliest_k) * dt, 9))


def goal_nodes(lg: LaneGraph, reach: ReachGraph, goal: GoalRegion) -> Set[LaneNode]:
    """Lane nodes reachable from the initial node whose cell touches the goal line.

    Only nodes reachable within the lane graph count: base sets that fit
    between two vehicles without occupying any lane carry no lane node,
    so the goal is not reachable in normal (lane-based) operation
    through them.
    """
    seen = set(lg.initial_nodes)
    stack = list(lg.initial_nodes)
    while stack:
        u = stack.pop()
        for v, _ in lg.succ.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return {
        n for n in seen
        if n.k <= goal.k_max and reach.layers[n.k][n.base_id].cell.x_hi >= goal.s_goal
    }


def _dijkstra(sources: Iterable[LaneNode], adjacency, edge_cost) -> Tuple[dict, dict]:
    dist: Dict[LaneNode, Cost] = {}
    prev: Dict[LaneNode, Optional[LaneNode]] = {}
    heap = []
    for s in sorted(set(sources)):
        dist[s] = (0, 0)
        prev[s] = None
        heap.append(((0, 0), s))
    heapq.heapify(heap)
    done = set()
    while heap:
        cost, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adjacency.get(u, ()):
            c = edge_cost(u, v, w)
            nc = (cost[0] + c[0], cost[1] + c[1])
            if v not in dist or nc < dist[v]:
                dist[v] = nc
                prev[v] = u
                heapq.heappush(heap, (nc, v))
    return dist, prev


def _trace(prev: dict, end: LaneNode) -> List[LaneNode]:
    out = [end]
    while prev[out[-1]] is not None:
        out.append(prev[out[-1]])
    return out


def forward_search(lg: LaneGraph, start: Sequence[LaneNode], goals: Set[LaneNode],
                   k_max: int) -> ManeuverPath:
    """Minimum-weight path to a goal with its lane changes as late as possible.

    Among goal nodes of equal cost the earliest one (then the smallest
    id) is chosen.
    """
    if not goals:
        raise SearchError("no goal nodes")

    def cost(u: LaneNode, v: LaneNode, w: int) -> Cost:
        return (w, k_max - v.k) if w else (0, 0)

    dist, prev = _dijkstra(start, lg.succ, cost)
    reached = [g for g in goals if g in dist]
    assert reached, "goal nodes not reachable from the initial node"
    best = min(reached, key=lambda g: (dist[g], g.k, g))
    nodes = list(reversed(_trace(prev, best)))
    return ManeuverPath.from_nodes(nodes)


def backward_search(lg: LaneGraph, goals: Set[LaneNode], start: Sequence[LaneNode]) -> ManeuverPath:
    """Minimum-weight path with its lane changes as early as possible."""
    if not goals:
        raise SearchError("no goal nodes")

    def cost(u: LaneNode, v: LaneNode, w: int) -> Cost:
        # u is later in time; the change lands on u
        return (w, u.k) if w else (0, 0)

    dist, prev = _dijkstra(goals, lg.pred, cost)
    reached = [s for s in start if s in dist]
    assert reached, "initial node cannot reach any goal node"
    best = min(reached, key=lambda s: (dist[s], s))
    return ManeuverPath.from_nodes(_trace(prev, best))


def combine(fwd: ManeuverPath, bwd: ManeuverPath, dt: float) -> List[DecisionWindow]:
    """Pair the i-th change of both paths into a decision window."""
    if len(fwd.lane_changes) != len(bwd.lane_changes) or fwd.total_weight != bwd.total_weight:
        raise SearchError(
            f"forward and backward paths disagree: {fwd.change_steps} vs {bwd.change_steps}")
    return [DecisionWindow.from_steps(kb, kf, dt) for kf, kb in zip(fwd.change_steps, bwd.change_steps)]
