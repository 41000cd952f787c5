"""Over-approximated reachable sets of the point-mass ego and the reachability graph.

Each time step holds a list of base sets. A base set is the product of
one convex (position, velocity) polygon per road axis; its cell is the
rectangle those polygons project to in the (s, t) position plane. One
step propagates every base set, removes the forbidden regions, splits
the surviving drivable area into disjoint rectangles and rebuilds base
sets on them. Edges link a base set to every child its propagated cell
overlaps.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .geometry import (
    EPS,
    ConvexPolygon,
    Rect,
    clip_axis,
    convex_hull,
    minkowski_segment,
    project_interval,
    rect_subtract_split,
    shear_time,
)
from .scenario import AnalysisTask, EgoSpec, NormalOperationBounds, obstacle_rect

SLIVER = 1e-6
_FAR = 1e7


class ReachabilityError(Exception):
    pass


@dataclass(frozen=True)
class BaseSet:
    k: int
    poly_s: ConvexPolygon
    poly_t: ConvexPolygon
    cell: Rect

    @classmethod
    def from_polygons(cls, k: int, poly_s: ConvexPolygon, poly_t: ConvexPolygon) -> "BaseSet":
        x_lo, x_hi = project_interval(poly_s, "x")
        y_lo, y_hi = project_interval(poly_t, "x")
        return cls(k, poly_s, poly_t, Rect(x_lo, x_hi, y_lo, y_hi))

    def contains(self, p_s: float, v_s: float, p_t: float, v_t: float, tol: float = 1e-7) -> bool:
        return (self.cell.contains(p_s, p_t, tol)
                and self.poly_s.contains((p_s, v_s), tol)
                and self.poly_t.contains((p_t, v_t), tol))


@dataclass
class ReachGraph:
    """Layered reachability graph; node ``(k, i)`` is ``layers[k][i]``."""

    layers: List[List[BaseSet]]
    # edges[k] links layer k to layer k + 1 as (parent index, child index)
    edges: List[List[Tuple[int, int]]] = field(default_factory=list)
    initial: Tuple[int, int] = (0, 0)

    @property
    def last_step(self) -> int:
        return len(self.layers) - 1

    def node(self, node_id: Tuple[int, int]) -> BaseSet:
        k, i = node_id
        return self.layers[k][i]

    def layer_sizes(self) -> List[int]:
        return [len(layer) for layer in self.layers]

    def iter_edges(self) -> Iterable[Tuple[Tuple[int, int], Tuple[int, int]]]:
        for k, es in enumerate(self.edges):
            for p, c in es:
                yield (k, p), (k + 1, c)


def initial_base_set(ego: EgoSpec, task: Optional[AnalysisTask] = None) -> BaseSet:
    x0 = ego.initial
    if task is not None:
        road, b = task.road, task.bounds
        if not (ego.width / 2 <= x0.p_t <= road.width - ego.width / 2):
            raise ReachabilityError("initial lateral position is off the road")
        if not (road.s_min <= x0.p_s <= road.s_max):
            raise ReachabilityError("initial longitudinal position is off the road")
        if not (b.v_s_min <= x0.v_s <= b.v_s_max and b.v_t_min <= x0.v_t <= b.v_t_max):
            raise ReachabilityError("initial velocity outside normal-operation bounds")
    elif x0.p_t < 0:
        raise ReachabilityError("initial lateral position is off the road")
    return BaseSet.from_polygons(0, ConvexPolygon.point(x0.p_s, x0.v_s), ConvexPolygon.point(x0.p_t, x0.v_t))


def _propagate_axis(poly: ConvexPolygon, a_min: float, a_max: float,
                    v_min: float, v_max: float, dt: float) -> Optional[ConvexPolygon]:
    moved = shear_time(poly, dt)
    h = 0.5 * dt * dt
    swept = minkowski_segment(moved, (a_min * h, a_min * dt), (a_max * h, a_max * dt))
    return clip_axis(swept, 1, v_min, v_max)


def propagate(b: BaseSet, bounds: NormalOperationBounds, dt: float) -> BaseSet:
    """One point-mass step per axis, clamped to the velocity window."""
    polys = []
    for axis, poly in (("s", b.poly_s), ("t", b.poly_t)):
        v_min, v_max = bounds.velocity(axis)
        a_min, a_max = bounds.acceleration(axis)
        out = _propagate_axis(poly, a_min, a_max, v_min, v_max, dt)
        if out is None:
            raise ReachabilityError(f"propagation left the velocity window on axis {axis}")
        polys.append(out)
    return BaseSet.from_polygons(b.k + 1, polys[0], polys[1])


def forbidden_rects(task: AnalysisTask, k: int) -> List[Rect]:
    """Regions the ego center may not occupy at step ``k``.

    Obstacle footprints are inflated by the ego half-extents; the four
    slabs keep the whole ego body on the modeled road segment.
    """
    half_l, half_w = task.ego.length / 2, task.ego.width / 2
    road = task.road
    rects = []
    for o in task.obstacles:
        r = obstacle_rect(o, k)
        if r is None:
            continue
        rects.append(Rect(r.x_lo - half_l, r.x_hi + half_l, r.y_lo - half_w, r.y_hi + half_w))
    rects.append(Rect(-_FAR, _FAR, -_FAR, half_w))
    rects.append(Rect(-_FAR, _FAR, road.width - half_w, _FAR))
    rects.append(Rect(-_FAR, road.s_min + half_l, -_FAR, _FAR))
    rects.append(Rect(road.s_max - half_l, _FAR, -_FAR, _FAR))
    return rects


def _is_sliver(r: Rect) -> bool:
    return r.width < SLIVER or r.height < SLIVER


def subtract_all(cell: Rect, holes: Sequence[Rect]) -> List[Rect]:
    pieces = [cell]
    for hole in holes:
        nxt = []
        for piece in pieces:
            nxt.extend(rect_subtract_split(piece, hole))
        pieces = nxt
        if not pieces:
            break
    return [p for p in pieces if not _is_sliver(p)]


def _merge_intervals(intervals: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    intervals.sort()
    runs: List[List[float]] = []
    for lo, hi in intervals:
        if runs and lo <= runs[-1][1]:
            if hi > runs[-1][1]:
                runs[-1][1] = hi
        else:
            runs.append([lo, hi])
    return [(lo, hi) for lo, hi in runs]


def _sweep(fragments: Sequence[Tuple[Rect, int]]) -> List[Rect]:
    # columns between consecutive x-coordinates; maximal covered y-runs per
    # column; identical runs of neighbouring columns are merged along x
    xs = sorted({r.x_lo for r, _ in fragments} | {r.x_hi for r, _ in fragments})
    open_runs: Dict[Tuple[float, float], float] = {}
    cells: List[Rect] = []
    for x0, x1 in zip(xs, xs[1:]):
        column = [(r.y_lo, r.y_hi) for r, _ in fragments if r.x_lo <= x0 and r.x_hi >= x1]
        runs = set(_merge_intervals(column)) if column else set()
        for run in sorted(open_runs):
            if run not in runs:
                cells.append(Rect(open_runs.pop(run), x0, run[0], run[1]))
        for run in runs:
            open_runs.setdefault(run, x0)
    for run in sorted(open_runs):
        cells.append(Rect(open_runs[run], xs[-1], run[0], run[1]))
    return cells


def repartition(fragments: Sequence[Tuple[Rect, int]]) -> List[Tuple[Rect, Tuple[int, ...]]]:
    """Split the union of possibly overlapping fragments into disjoint rectangles.

    The x-coordinates of all fragments cut the plane into columns. Within
    a column, covered grid cells are merged into maximal t-runs; identical
    runs of neighbouring columns are then merged along s. Every output
    cell lists the parent ids whose fragment overlaps it with positive
    area.
    """
    if not fragments:
        return []
    cells = sorted(c for c in _sweep(fragments) if not _is_sliver(c))
    out = []
    for c in cells:
        parents = tuple(sorted({pid for r, pid in fragments if r.overlap_area(c) > EPS}))
        if parents:
            out.append((c, parents))
    return out


def _hull_of(polys: Iterable[ConvexPolygon]) -> ConvexPolygon:
    pts = []
    for p in polys:
        pts.extend(p.vertices)
    return convex_hull(pts)


def step(layer: Sequence[BaseSet], task: AnalysisTask, k: int
         ) -> Tuple[List[BaseSet], List[Tuple[int, int]]]:
    """Advance ``layer`` (at step ``k``) to step ``k + 1``."""
    if not layer:
        raise ReachabilityError("cannot step an empty layer")
    holes = forbidden_rects(task, k + 1)
    propagated = [propagate(b, task.bounds, task.dt) for b in layer]
    fragments = []
    for idx, p in enumerate(propagated):
        for piece in subtract_all(p.cell, holes):
            fragments.append((piece, idx))
    children: List[BaseSet] = []
    edges: List[Tuple[int, int]] = []
    for cell, parents in repartition(fragments):
        hull_s = _hull_of(propagated[i].poly_s for i in parents)
        hull_t = _hull_of(propagated[i].poly_t for i in parents)
        poly_s = clip_axis(hull_s, 0, cell.x_lo, cell.x_hi)
        poly_t = clip_axis(hull_t, 0, cell.y_lo, cell.y_hi)
        if poly_s is None or poly_t is None:
            continue
        child = len(children)
        children.append(BaseSet(k + 1, poly_s, poly_t, cell))
        edges.extend((p, child) for p in parents)
    return children, edges


def compute_reach_graph(task: AnalysisTask) -> ReachGraph:
    """Layers 0..k_max, stopping early if the reachable set dies out."""
    layers = [[initial_base_set(task.ego, task)]]
    edges: List[List[Tuple[int, int]]] = []
    for k in range(task.goal.k_max):
        children, es = step(layers[-1], task, k)
        if not children:
            break
        layers.append(children)
        edges.append(es)
    return ReachGraph(layers=layers, edges=edges)


def layer_records(graph: ReachGraph) -> List[dict]:
    """Per-layer debug records: cells and their parent indices."""
    parents: List[Dict[int, List[int]]] = [dict() for _ in graph.layers]
    for k, es in enumerate(graph.edges):
        for p, c in es:
            parents[k + 1].setdefault(c, []).append(p)
    records = []
    for k, layer in enumerate(graph.layers):
        records.append({
            "k": k,
            "cells": [
                {
                    "x_lo": b.cell.x_lo, "x_hi": b.cell.x_hi,
                    "y_lo": b.cell.y_lo, "y_hi": b.cell.y_hi,
                    "parents": sorted(parents[k].get(i, [])),
                }
                for i, b in enumerate(layer)
            ],
        })
    return records


def dump_layers(graph: ReachGraph, directory: str) -> List[str]:
    """Write one ``layer_KKKK.json`` per time step; returns the paths written."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for rec in layer_records(graph):
        path = os.path.join(directory, f"layer_{rec['k']:04d}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(rec, fh, sort_keys=True)
            fh.write("\n")
        paths.append(path)
    return paths
