"""Deterministic SVG rendering of a scenario and its reference paths.

Each path node becomes one point: s at the center of the node's cell,
t at the center of the node's lane. The decision region is the polygon
enclosed by the forward and the backward polyline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .challenge import Analysis, ChallengeCase
from .reachability import ReachGraph
from .scenario import AnalysisTask, obstacle_rect
from .search import ManeuverPath

MOVING_STRIDE = 5
SCALE_S = 1.5
SCALE_T = 12.0
MARGIN = 20.0

Point = Tuple[float, float]


@dataclass(frozen=True)
class RenderModel:
    road: Tuple[float, float, float, float]
    lane_markings: Tuple[float, ...]
    footprints: Tuple[Tuple[str, int, Tuple[float, float, float, float]], ...]
    forward: Tuple[Point, ...]
    backward: Tuple[Point, ...]
    decision_region: Tuple[Point, ...]


def reference_polyline(path: Optional[ManeuverPath], reach: ReachGraph, task: AnalysisTask) -> List[Point]:
    if path is None:
        return []
    pts = []
    for n in path.nodes:
        cell = reach.layers[n.k][n.base_id].cell
        pts.append((0.5 * (cell.x_lo + cell.x_hi), task.road.lane_center(n.lane)))
    return pts


def _is_static(states: Sequence[Tuple[float, float]]) -> bool:
    return all(s == states[0] for s in states)


def build_render_model(analysis: Analysis) -> RenderModel:
    task = analysis.task
    road = task.road
    footprints = []
    for o in task.obstacles:
        if _is_static(o.states):
            steps = [0]
        else:
            last = min(len(o.states) - 1, task.goal.k_max)
            steps = list(range(0, last + 1, MOVING_STRIDE))
        for k in steps:
            r = obstacle_rect(o, k)
            footprints.append((o.id, k, (r.x_lo, r.x_hi, r.y_lo, r.y_hi)))
    case2 = analysis.description.case is ChallengeCase.LANE_CHANGES_REQUIRED
    draw_paths = analysis.description.case is not ChallengeCase.MRM_REQUIRED
    fwd = reference_polyline(analysis.forward, analysis.reach, task) if draw_paths else []
    bwd = reference_polyline(analysis.backward, analysis.reach, task) if draw_paths else []
    region = tuple(fwd + bwd[::-1]) if case2 else ()
    return RenderModel(
        road=(road.s_min, road.s_max, 0.0, road.width),
        lane_markings=tuple(j * road.lane_width for j in range(1, road.num_lanes)),
        footprints=tuple(footprints),
        forward=tuple(fwd),
        backward=tuple(bwd),
        decision_region=region,
    )


def _f(x: float) -> str:
    return f"{x:.2f}"


def svg_document(model: RenderModel) -> str:
    s_lo, s_hi, t_lo, t_hi = model.road

    def px(s: float, t: float) -> Tuple[str, str]:
        return _f(MARGIN + (s - s_lo) * SCALE_S), _f(MARGIN + (t_hi - t) * SCALE_T)

    def points(pts: Sequence[Point]) -> str:
        return " ".join(",".join(px(s, t)) for s, t in pts)

    width = 2 * MARGIN + (s_hi - s_lo) * SCALE_S
    height = 2 * MARGIN + (t_hi - t_lo) * SCALE_T
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
        f'<rect x="{_f(MARGIN)}" y="{_f(MARGIN)}" width="{_f((s_hi - s_lo) * SCALE_S)}" '
        f'height="{_f((t_hi - t_lo) * SCALE_T)}" fill="#eeeeee" stroke="#000000" stroke-width="1"/>',
    ]
    for t in model.lane_markings:
        (x0, y), (x1, _) = px(s_lo, t), px(s_hi, t)
        out.append(f'<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="#ffffff" '
                   f'stroke-width="1" stroke-dasharray="6,6"/>')
    if model.decision_region:
        out.append(f'<polygon class="decision-region" points="{points(model.decision_region)}" '
                   f'fill="#ffd700" fill-opacity="0.5" stroke="none"/>')
    for oid, k, (x_lo, x_hi, y_lo, y_hi) in model.footprints:
        x, y = px(x_lo, y_hi)
        out.append(f'<rect class="obstacle" data-id="{oid}" data-k="{k}" x="{x}" y="{y}" '
                   f'width="{_f((x_hi - x_lo) * SCALE_S)}" height="{_f((y_hi - y_lo) * SCALE_T)}" '
                   f'fill="#d62728" fill-opacity="0.6"/>')
    if model.forward:
        out.append(f'<polyline class="forward" points="{points(model.forward)}" fill="none" '
                   f'stroke="#1f3fbf" stroke-width="1.5"/>')
    if model.backward:
        out.append(f'<polyline class="backward" points="{points(model.backward)}" fill="none" '
                   f'stroke="#7fb8ff" stroke-width="1.5" stroke-dasharray="4,3"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(analysis: Analysis) -> str:
    return svg_document(build_render_model(analysis))
