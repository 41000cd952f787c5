"""Lane-aware expansion of the reachability graph.

Every base set yields one node per lane it occupies; every reachability
edge yields an edge between each pair of those nodes, weighted by the
number of lanes crossed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Tuple

from .geometry import Rect
from .reachability import ReachGraph
from .scenario import Road

_TOL = 1e-9


class LaneNode(NamedTuple):
    k: int
    base_id: int
    lane: int


@dataclass
class LaneGraph:
    nodes: List[LaneNode]
    # successor lists: node -> [(child, weight)], children sorted
    succ: Dict[LaneNode, List[Tuple[LaneNode, int]]] = field(default_factory=dict)
    pred: Dict[LaneNode, List[Tuple[LaneNode, int]]] = field(default_factory=dict)
    initial_nodes: List[LaneNode] = field(default_factory=list)

    @property
    def edges(self) -> List[Tuple[LaneNode, LaneNode, int]]:
        return [(u, v, w) for u in self.nodes for v, w in self.succ.get(u, ())]

    def add_edge(self, u: LaneNode, v: LaneNode, w: int) -> None:
        self.succ.setdefault(u, []).append((v, w))
        self.pred.setdefault(v, []).append((u, w))

    def to_dict(self) -> dict:
        return {
            "nodes": [list(n) for n in self.nodes],
            "edges": [[list(u), list(v), w] for u, v, w in self.edges],
            "initial_nodes": [list(n) for n in self.initial_nodes],
        }


def occupied_lanes(cell: Rect, road: Road, ego_width: float) -> List[int]:
    """Lanes whose t-interval overlaps the body interval by at least the ego width.

    ``cell`` bounds the ego center, so the body spans the cell's t-range
    widened by half the ego width on both sides.
    """
    lo = cell.y_lo - ego_width / 2
    hi = cell.y_hi + ego_width / 2
    lanes = []
    for j in range(road.num_lanes):
        a, b = road.lane_interval(j)
        if min(hi, b) - max(lo, a) >= ego_width - _TOL:
            lanes.append(j)
    return lanes


def build_lane_graph(g: ReachGraph, road: Road, ego_width: float) -> LaneGraph:
    lanes_of: List[List[List[int]]] = []
    nodes: List[LaneNode] = []
    for k, layer in enumerate(g.layers):
        per_layer = []
        for i, b in enumerate(layer):
            # thin cells straddling a lane boundary occupy no lane and get no node
            lanes = occupied_lanes(b.cell, road, ego_width)
            per_layer.append(lanes)
            nodes.extend(LaneNode(k, i, j) for j in lanes)
        lanes_of.append(per_layer)
    lg = LaneGraph(nodes=nodes)
    for (k, p), (_, c) in g.iter_edges():
        for v in lanes_of[k][p]:
            for w in lanes_of[k + 1][c]:
                lg.add_edge(LaneNode(k, p, v), LaneNode(k + 1, c, w), abs(w - v))
    for adj in list(lg.succ.values()) + list(lg.pred.values()):
        adj.sort()
    k0, i0 = g.initial
    lg.initial_nodes = [LaneNode(k0, i0, j) for j in lanes_of[k0][i0]]
    return lg
