"""Scenario and analysis-task model, file ingestion and built-in scenarios."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional, Tuple

from .geometry import Rect

KMH = 1.0 / 3.6

DEFAULT_LENGTH = 4.5
DEFAULT_WIDTH = 1.8
BUILTIN_NAMES = ("a", "b", "c", "d")
BUILTIN_HORIZON = 260


class ScenarioError(Exception):
    """Base class for scenario problems."""


class ScenarioParseError(ScenarioError):
    """The document is not valid JSON or does not follow the schema."""


class ScenarioValidationError(ScenarioError):
    """The document parses but violates a model invariant."""


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class Road:
    num_lanes: int
    lane_width: float
    s_min: float
    s_max: float

    @property
    def width(self) -> float:
        return self.num_lanes * self.lane_width

    def lane_interval(self, lane: int) -> Tuple[float, float]:
        return lane * self.lane_width, (lane + 1) * self.lane_width

    def lane_center(self, lane: int) -> float:
        return (lane + 0.5) * self.lane_width


@dataclass(frozen=True)
class CurvilinearState:
    p_s: float
    v_s: float
    p_t: float
    v_t: float


@dataclass(frozen=True)
class EgoSpec:
    length: float
    width: float
    initial: CurvilinearState


@dataclass(frozen=True)
class ObstacleTrajectory:
    id: str
    length: float
    width: float
    states: Tuple[Tuple[float, float], ...]


@dataclass(frozen=True)
class NormalOperationBounds:
    v_s_min: float
    v_s_max: float
    v_t_min: float
    v_t_max: float
    a_s_min: float
    a_s_max: float
    a_t_min: float
    a_t_max: float

    @classmethod
    def default(cls) -> "NormalOperationBounds":
        """Normal-operation limits used for all built-in scenarios."""
        return cls(
            v_s_min=60 * KMH, v_s_max=130 * KMH,
            v_t_min=-2.0, v_t_max=2.0,
            a_s_min=-4.0, a_s_max=4.0,
            a_t_min=-2.0, a_t_max=2.0,
        )

    def velocity(self, axis: str) -> Tuple[float, float]:
        return (self.v_s_min, self.v_s_max) if axis == "s" else (self.v_t_min, self.v_t_max)

    def acceleration(self, axis: str) -> Tuple[float, float]:
        return (self.a_s_min, self.a_s_max) if axis == "s" else (self.a_t_min, self.a_t_max)


@dataclass(frozen=True)
class GoalRegion:
    s_goal: float
    k_max: int


@dataclass(frozen=True)
class AnalysisTask:
    road: Road
    obstacles: Tuple[ObstacleTrajectory, ...]
    ego: EgoSpec
    goal: GoalRegion
    dt: float
    bounds: NormalOperationBounds = field(default_factory=NormalOperationBounds.default)

    def without_obstacles(self) -> "AnalysisTask":
        return replace(self, obstacles=())


def validate_task(task: AnalysisTask) -> AnalysisTask:
    """Check every model invariant; raise ScenarioValidationError on the first miss."""

    def fail(msg: str) -> None:
        raise ScenarioValidationError(msg)

    road, ego, goal, b = task.road, task.ego, task.goal, task.bounds
    if not isinstance(road.num_lanes, int) or road.num_lanes < 1:
        fail("road.num_lanes must be an integer >= 1")
    if not _finite(road.lane_width, road.s_min, road.s_max):
        fail("road values must be finite")
    if road.lane_width <= 0:
        fail("road.lane_width must be > 0")
    if road.s_min >= road.s_max:
        fail("road.s_min must be < road.s_max")
    if not (task.dt > 0 and math.isfinite(task.dt)):
        fail("dt_s must be > 0")

    fields = [getattr(b, n) for n in b.__dataclass_fields__]
    if not _finite(*fields):
        fail("bounds must be finite")
    for axis in ("s", "t"):
        lo, hi = b.velocity(axis)
        if lo > hi:
            fail(f"bounds: v_{axis}_min > v_{axis}_max")
        lo, hi = b.acceleration(axis)
        if lo > hi:
            fail(f"bounds: a_{axis}_min > a_{axis}_max")

    if not (ego.length > 0 and ego.width > 0):
        fail("ego dimensions must be > 0")
    if ego.width >= road.lane_width:
        fail("ego.width must be smaller than road.lane_width")
    x0 = ego.initial
    if not _finite(x0.p_s, x0.v_s, x0.p_t, x0.v_t):
        fail("ego.initial must be finite")
    if not (road.s_min <= x0.p_s <= road.s_max):
        fail("ego.initial.s_m outside the road extent")
    if not (ego.width / 2 <= x0.p_t <= road.width - ego.width / 2):
        fail("ego.initial.t_m outside the road extent")
    if not (b.v_s_min <= x0.v_s <= b.v_s_max):
        fail("ego.initial.vs_mps outside normal-operation bounds")
    if not (b.v_t_min <= x0.v_t <= b.v_t_max):
        fail("ego.initial.vt_mps outside normal-operation bounds")

    if not (road.s_min < goal.s_goal <= road.s_max):
        fail("goal.s_goal_m must lie in (s_min, s_max]")
    if not isinstance(goal.k_max, int) or goal.k_max < 1:
        fail("goal.k_max must be an integer >= 1")

    seen = set()
    for o in task.obstacles:
        if o.id in seen:
            fail(f"duplicate obstacle id {o.id!r}")
        seen.add(o.id)
        if not (o.length > 0 and o.width > 0):
            fail(f"obstacle {o.id!r}: dimensions must be > 0")
        if not o.states:
            fail(f"obstacle {o.id!r}: empty trajectory")
        for s, t in o.states[: goal.k_max + 1]:
            if not _finite(s, t):
                fail(f"obstacle {o.id!r}: non-finite position")
    return task


def obstacle_rect(o: ObstacleTrajectory, k: int) -> Optional[Rect]:
    """Footprint of ``o`` at step ``k``; ``None`` once its trajectory has ended."""
    if k < 0 or k >= len(o.states):
        return None
    s, t = o.states[k]
    return Rect(s - o.length / 2, s + o.length / 2, t - o.width / 2, t + o.width / 2)


# -- serialization -----------------------------------------------------------

def task_to_dict(task: AnalysisTask) -> dict:
    b = task.bounds
    return {
        "road": {
            "num_lanes": task.road.num_lanes,
            "lane_width_m": task.road.lane_width,
            "s_min_m": task.road.s_min,
            "s_max_m": task.road.s_max,
        },
        "ego": {
            "length_m": task.ego.length,
            "width_m": task.ego.width,
            "initial": {
                "s_m": task.ego.initial.p_s,
                "t_m": task.ego.initial.p_t,
                "vs_mps": task.ego.initial.v_s,
                "vt_mps": task.ego.initial.v_t,
            },
        },
        "obstacles": [
            {
                "id": o.id,
                "length_m": o.length,
                "width_m": o.width,
                "trajectory": [{"s_m": s, "t_m": t} for s, t in o.states],
            }
            for o in task.obstacles
        ],
        "goal": {"s_goal_m": task.goal.s_goal, "k_max": task.goal.k_max},
        "dt_s": task.dt,
        "bounds": bounds_to_dict(b),
    }


def bounds_to_dict(b: NormalOperationBounds) -> dict:
    return {
        "vs_min_mps": b.v_s_min, "vs_max_mps": b.v_s_max,
        "vt_min_mps": b.v_t_min, "vt_max_mps": b.v_t_max,
        "as_min_mps2": b.a_s_min, "as_max_mps2": b.a_s_max,
        "at_min_mps2": b.a_t_min, "at_max_mps2": b.a_t_max,
    }


def dump_task(task: AnalysisTask) -> str:
    return json.dumps(task_to_dict(task), indent=2) + "\n"


def _get(d: Any, key: str, where: str) -> Any:
    if not isinstance(d, Mapping):
        raise ScenarioParseError(f"{where}: expected an object")
    if key not in d:
        raise ScenarioParseError(f"{where}: missing key {key!r}")
    return d[key]


def _num(d: Any, key: str, where: str) -> float:
    v = _get(d, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioParseError(f"{where}.{key}: expected a number")
    return float(v)


def _int(d: Any, key: str, where: str) -> int:
    v = _get(d, key, where)
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise ScenarioParseError(f"{where}.{key}: expected an integer")
    return v


def bounds_from_dict(d: Any, where: str = "bounds") -> NormalOperationBounds:
    return NormalOperationBounds(
        v_s_min=_num(d, "vs_min_mps", where), v_s_max=_num(d, "vs_max_mps", where),
        v_t_min=_num(d, "vt_min_mps", where), v_t_max=_num(d, "vt_max_mps", where),
        a_s_min=_num(d, "as_min_mps2", where), a_s_max=_num(d, "as_max_mps2", where),
        a_t_min=_num(d, "at_min_mps2", where), a_t_max=_num(d, "at_max_mps2", where),
    )


def task_from_dict(doc: Any) -> AnalysisTask:
    road_d = _get(doc, "road", "document")
    road = Road(
        num_lanes=_int(road_d, "num_lanes", "road"),
        lane_width=_num(road_d, "lane_width_m", "road"),
        s_min=_num(road_d, "s_min_m", "road"),
        s_max=_num(road_d, "s_max_m", "road"),
    )
    ego_d = _get(doc, "ego", "document")
    init_d = _get(ego_d, "initial", "ego")
    ego = EgoSpec(
        length=_num(ego_d, "length_m", "ego"),
        width=_num(ego_d, "width_m", "ego"),
        initial=CurvilinearState(
            p_s=_num(init_d, "s_m", "ego.initial"),
            v_s=_num(init_d, "vs_mps", "ego.initial"),
            p_t=_num(init_d, "t_m", "ego.initial"),
            v_t=_num(init_d, "vt_mps", "ego.initial"),
        ),
    )
    obstacles_d = _get(doc, "obstacles", "document")
    if not isinstance(obstacles_d, list):
        raise ScenarioParseError("obstacles: expected a list")
    obstacles = []
    for i, od in enumerate(obstacles_d):
        where = f"obstacles[{i}]"
        traj = _get(od, "trajectory", where)
        if not isinstance(traj, list):
            raise ScenarioParseError(f"{where}.trajectory: expected a list")
        states = tuple(
            (_num(p, "s_m", f"{where}.trajectory[{j}]"), _num(p, "t_m", f"{where}.trajectory[{j}]"))
            for j, p in enumerate(traj)
        )
        obstacles.append(ObstacleTrajectory(
            id=str(_get(od, "id", where)),
            length=_num(od, "length_m", where),
            width=_num(od, "width_m", where),
            states=states,
        ))
    goal_d = _get(doc, "goal", "document")
    goal = GoalRegion(s_goal=_num(goal_d, "s_goal_m", "goal"), k_max=_int(goal_d, "k_max", "goal"))
    return AnalysisTask(
        road=road,
        obstacles=tuple(obstacles),
        ego=ego,
        goal=goal,
        dt=_num(doc, "dt_s", "document"),
        bounds=bounds_from_dict(_get(doc, "bounds", "document")),
    )


def load_task(document: str) -> AnalysisTask:
    """Parse and validate a scenario document (JSON text)."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"malformed JSON: {exc}") from None
    return validate_task(task_from_dict(doc))


# -- built-in evaluation scenarios ------------------------------------------

def braking_trajectory(s0: float, v0: float, delay: float, decel: float,
                       dt: float, steps: int) -> list:
    """Positions at k*dt for constant speed, then constant braking to standstill."""
    stop_time = v0 / decel if decel > 0 else math.inf
    out = []
    for k in range(steps + 1):
        t = k * dt
        if t <= delay:
            out.append(s0 + v0 * t)
            continue
        tau = min(t - delay, stop_time)
        out.append(s0 + v0 * delay + v0 * tau - 0.5 * decel * tau * tau)
    return out


def default_horizon(s_goal: float, s0: float, v_s_min: float, dt: float) -> int:
    return math.ceil((s_goal - s0) / v_s_min / dt)


def _static(oid: str, s: float, lane: int, road: Road, steps: int) -> ObstacleTrajectory:
    t = road.lane_center(lane)
    return ObstacleTrajectory(oid, DEFAULT_LENGTH, DEFAULT_WIDTH, tuple((s, t) for _ in range(steps + 1)))


def _braking(oid: str, lane: int, road: Road, s0: float, v0: float, delay: float,
             decel: float, dt: float, steps: int) -> ObstacleTrajectory:
    t = road.lane_center(lane)
    s = braking_trajectory(s0, v0, delay, decel, dt, steps)
    return ObstacleTrajectory(oid, DEFAULT_LENGTH, DEFAULT_WIDTH, tuple((x, t) for x in s))


def builtin_task(name: str, *, blocked: bool = False) -> AnalysisTask:
    """One of the four evaluation scenarios ``"a"``..``"d"``.

    ``blocked=True`` (only for ``"d"``) lets the left lead brake to a
    standstill as hard as the right one, which closes both lanes.
    """
    if name not in BUILTIN_NAMES:
        raise ValueError(f"unknown built-in scenario {name!r}; expected one of {BUILTIN_NAMES}")
    if blocked and name != "d":
        raise ValueError("only scenario 'd' has a blocked variant")
    dt = 0.1
    steps = BUILTIN_HORIZON
    road = Road(num_lanes=2, lane_width=3.75, s_min=0.0, s_max=800.0)
    v0 = 100 * KMH
    ego = EgoSpec(DEFAULT_LENGTH, DEFAULT_WIDTH, CurvilinearState(200.0, v0, road.lane_center(0), 0.0))
    lead_s0 = ego.initial.p_s + 3.6 * v0

    if name == "a":
        obstacles = [_static("static-0", 400.0, 0, road, steps)]
    elif name == "b":
        obstacles = [
            _static("static-right-0", 375.0, 0, road, steps),
            _static("static-right-1", 410.0, 0, road, steps),
            _static("static-left-0", 100.0, 1, road, steps),
            _static("static-left-1", 500.0, 1, road, steps),
        ]
    elif name == "c":
        obstacles = [_braking("lead", 0, road, lead_s0, v0, 1.0, 1.3, dt, steps)]
    else:
        left_decel = 3.0 if blocked else 1.3
        obstacles = [
            _braking("lead-right", 0, road, lead_s0, v0, 1.0, 3.0, dt, steps),
            _braking("lead-left", 1, road, lead_s0, v0, 1.0, left_decel, dt, steps),
        ]
    task = AnalysisTask(
        road=road,
        obstacles=tuple(obstacles),
        ego=ego,
        goal=GoalRegion(s_goal=600.0, k_max=steps),
        dt=dt,
        bounds=NormalOperationBounds.default(),
    )
    return validate_task(task)


def task_with_bounds(task: AnalysisTask, bounds: NormalOperationBounds) -> AnalysisTask:
    return validate_task(replace(task, bounds=bounds))
