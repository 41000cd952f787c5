"""Monte Carlo trajectories of the point-mass ego, used to audit reachable sets.

Inputs are piecewise constant: each trajectory holds an acceleration per
axis for a random number of steps, clamped so the velocity stays inside
the normal-operation window. A trajectory stops being recorded at the
first step where it collides with an (inflated) obstacle or leaves the
road.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .geometry import ConvexPolygon
from .reachability import ReachGraph
from .scenario import AnalysisTask, obstacle_rect

MEMBERSHIP_TOL = 1e-6


@dataclass
class SampledStates:
    # per step k: array (m_k, 4) of (p_s, v_s, p_t, v_t)
    states: List[np.ndarray]

    @property
    def num_states(self) -> int:
        return sum(len(s) for s in self.states)


def _draw_accel(rng: np.random.Generator, n: int, lo: float, hi: float) -> np.ndarray:
    # bias towards the bounds, where the reachable-set boundary lives
    u = rng.uniform(lo, hi, n)
    pick = rng.uniform(size=n)
    u[pick < 0.3] = lo
    u[pick > 0.7] = hi
    return u


def sample_states(task: AnalysisTask, n: int, seed: int, max_hold: int = 30,
                  horizon: int | None = None, guard_lateral: bool = True) -> SampledStates:
    """Sample ``n`` admissible trajectories; ``guard_lateral`` steers away from road edges."""
    rng = np.random.default_rng(seed)
    b, dt = task.bounds, task.dt
    horizon = task.goal.k_max if horizon is None else horizon
    x0 = task.ego.initial
    ps = np.full(n, x0.p_s)
    vs = np.full(n, x0.v_s)
    pt = np.full(n, x0.p_t)
    vt = np.full(n, x0.v_t)
    alive = np.ones(n, dtype=bool)
    hold = np.zeros(n, dtype=int)
    as_target = np.zeros(n)
    at_target = np.zeros(n)
    half_l, half_w = task.ego.length / 2, task.ego.width / 2
    road = task.road
    brake_t = max(min(-b.a_t_min, b.a_t_max), 1e-9)
    out = [np.stack([ps, vs, pt, vt], axis=1)]
    for k in range(horizon):
        renew = hold <= 0
        m = int(renew.sum())
        if m:
            as_target[renew] = _draw_accel(rng, m, b.a_s_min, b.a_s_max)
            at_target[renew] = _draw_accel(rng, m, b.a_t_min, b.a_t_max)
            hold[renew] = rng.integers(1, max_hold + 1, m)
        hold -= 1
        a_s = np.clip(as_target, np.maximum(b.a_s_min, (b.v_s_min - vs) / dt),
                      np.minimum(b.a_s_max, (b.v_s_max - vs) / dt))
        at_lo = np.maximum(b.a_t_min, (b.v_t_min - vt) / dt)
        at_hi = np.minimum(b.a_t_max, (b.v_t_max - vt) / dt)
        a_t = np.clip(at_target, at_lo, at_hi)
        if guard_lateral:
            # brake laterally when the next state could no longer stop on the road
            v_next = vt + a_t * dt
            p_next = pt + vt * dt + 0.5 * a_t * dt * dt
            stop = p_next + v_next * np.abs(v_next) / (2 * brake_t)
            a_t = np.where(stop > road.width - half_w, at_lo, a_t)
            a_t = np.where(stop < half_w, at_hi, a_t)
        ps = ps + vs * dt + 0.5 * a_s * dt * dt
        pt = pt + vt * dt + 0.5 * a_t * dt * dt
        vs = np.clip(vs + a_s * dt, b.v_s_min, b.v_s_max)
        vt = np.clip(vt + a_t * dt, b.v_t_min, b.v_t_max)
        ok = ((pt >= half_w) & (pt <= road.width - half_w)
              & (ps >= road.s_min + half_l) & (ps <= road.s_max - half_l))
        for o in task.obstacles:
            r = obstacle_rect(o, k + 1)
            if r is None:
                continue
            inside = ((ps > r.x_lo - half_l) & (ps < r.x_hi + half_l)
                      & (pt > r.y_lo - half_w) & (pt < r.y_hi + half_w))
            ok &= ~inside
        alive &= ok
        out.append(np.stack([ps[alive], vs[alive], pt[alive], vt[alive]], axis=1))
    return SampledStates(out)


def polygon_contains(poly: ConvexPolygon, x: np.ndarray, y: np.ndarray,
                     tol: float = MEMBERSHIP_TOL) -> np.ndarray:
    """Vectorised closed point-in-convex-polygon test."""
    v = np.asarray(poly.vertices, dtype=float)
    if len(v) == 1:
        return (np.abs(x - v[0, 0]) <= tol) & (np.abs(y - v[0, 1]) <= tol)
    if len(v) == 2:
        e = v[1] - v[0]
        denom = float(e @ e)
        u = np.clip(((x - v[0, 0]) * e[0] + (y - v[0, 1]) * e[1]) / denom, 0.0, 1.0)
        return np.hypot(x - v[0, 0] - u * e[0], y - v[0, 1] - u * e[1]) <= tol
    ok = np.ones(len(x), dtype=bool)
    for i in range(len(v)):
        a, c = v[i], v[(i + 1) % len(v)]
        ex, ey = c - a
        d = (ex * (y - a[1]) - ey * (x - a[0])) / np.hypot(ex, ey)
        ok &= d >= -tol
    return ok


def uncovered_states(graph: ReachGraph, samples: SampledStates,
                     tol: float = MEMBERSHIP_TOL) -> List[np.ndarray]:
    """Per step, the sampled states not contained in any base set."""
    missing = []
    for k, states in enumerate(samples.states):
        if len(states) == 0:
            missing.append(states)
            continue
        if k >= len(graph.layers):
            missing.append(states)
            continue
        covered = np.zeros(len(states), dtype=bool)
        ps, vs, pt, vt = states.T
        for b in graph.layers[k]:
            c = b.cell
            cand = (~covered & (ps >= c.x_lo - tol) & (ps <= c.x_hi + tol)
                    & (pt >= c.y_lo - tol) & (pt <= c.y_hi + tol))
            idx = np.flatnonzero(cand)
            if len(idx) == 0:
                continue
            inside = polygon_contains(b.poly_s, ps[idx], vs[idx], tol)
            idx = idx[inside]
            inside = polygon_contains(b.poly_t, pt[idx], vt[idx], tol)
            covered[idx[inside]] = True
        missing.append(states[~covered])
    return missing


def soundness_violations(graph: ReachGraph, task: AnalysisTask, n: int, seed: int) -> int:
    samples = sample_states(task, n, seed)
    return sum(len(m) for m in uncovered_states(graph, samples))
