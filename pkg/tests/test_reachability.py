import dataclasses
import itertools

import pytest
from hypothesis import given, settings, strategies as st

from scenario_challenge.geometry import ConvexPolygon, Rect, project_interval
from scenario_challenge.reachability import (
    BaseSet,
    ReachabilityError,
    compute_reach_graph,
    dump_layers,
    forbidden_rects,
    initial_base_set,
    propagate,
    repartition,
    step,
)
from scenario_challenge.sampling import sample_states, uncovered_states
from scenario_challenge.scenario import (
    BUILTIN_NAMES,
    CurvilinearState,
    NormalOperationBounds,
    builtin_task,
    obstacle_rect,
)

V100 = 100 / 3.6


def _point_set(p_s, v_s, p_t=1.875, v_t=0.0):
    return BaseSet.from_polygons(0, ConvexPolygon.point(p_s, v_s), ConvexPolygon.point(p_t, v_t))


def test_initial_base_set():
    task = builtin_task("a")
    b = initial_base_set(task.ego, task)
    assert b.poly_s.vertices == ((200.0, V100),)
    assert b.poly_t.vertices == ((1.875, 0.0),)
    assert b.cell == Rect(200, 200, 1.875, 1.875)


def test_initial_at_speed_bound_is_admitted():
    task = builtin_task("a")
    ego = dataclasses.replace(task.ego, initial=CurvilinearState(200, task.bounds.v_s_max, 1.875, 0))
    assert initial_base_set(ego, task).poly_s.area == 0


def test_initial_off_road():
    task = builtin_task("a")
    ego = dataclasses.replace(task.ego, initial=CurvilinearState(200, V100, -1, 0))
    with pytest.raises(ReachabilityError):
        initial_base_set(ego)


def test_propagate_one_step():
    out = propagate(_point_set(0, 27.78), NormalOperationBounds.default(), 0.1)
    lo, hi = sorted(out.poly_s.vertices)
    assert lo == pytest.approx((2.758, 27.38))
    assert hi == pytest.approx((2.798, 28.18))


def test_propagate_clamps_at_speed_cap():
    b = NormalOperationBounds.default()
    out = propagate(_point_set(0, b.v_s_max), b, 0.1)
    assert project_interval(out.poly_s, "y") == pytest.approx((b.v_s_max - 0.4, b.v_s_max))
    assert project_interval(out.poly_s, "x") == pytest.approx((3.591, 3.611), abs=1e-3)


def test_zero_input_is_pure_shear():
    b = dataclasses.replace(NormalOperationBounds.default(), a_s_min=0, a_s_max=0, a_t_min=0, a_t_max=0)
    box = ConvexPolygon.box(0, 1, 20, 21)
    start = BaseSet.from_polygons(0, box, ConvexPolygon.point(2, 0))
    out = propagate(start, b, 0.1)
    assert set(out.poly_s.vertices) == {(2, 20), (3, 20), (3.1, 21), (2.1, 21)}


def test_forbidden_rects():
    task = builtin_task("a")
    obs = forbidden_rects(task, 0)[0]
    assert (obs.x_lo, obs.x_hi) == (395.5, 404.5)
    assert (obs.y_lo, obs.y_hi) == pytest.approx((0.075, 3.675))
    road_only = forbidden_rects(task.without_obstacles(), 0)
    assert len(road_only) == 4


def test_forbidden_rect_frozen_after_standstill():
    task = builtin_task("d")
    right = [forbidden_rects(task, k)[0] for k in (200, 230, 260)]
    assert right[0] == right[1] == right[2]
    assert right[0].x_hi == pytest.approx(obstacle_rect(task.obstacles[0], 260).x_hi + 2.25)


def test_step_empty_road_single_child():
    task = builtin_task("a").without_obstacles()
    layer = [initial_base_set(task.ego, task)]
    children, edges = step(layer, task, 0)
    assert len(children) == 1 and edges == [(0, 0)]
    grown = propagate(layer[0], task.bounds, task.dt).cell
    assert children[0].cell == grown


def test_step_around_obstacle():
    task = builtin_task("a")
    # a parent whose propagated cell straddles the inflated obstacle
    parent = BaseSet.from_polygons(
        0, ConvexPolygon.box(380, 420, 20, 21), ConvexPolygon.box(2.5, 5.0, -0.1, 0.1))
    children, edges = step([parent], task, 0)
    hole = forbidden_rects(task, 1)[0]
    assert 1 <= len(children) <= 4
    for c in children:
        assert c.cell.overlap_area(hole) == 0
    assert sorted(c for _, c in edges) == list(range(len(children)))


def test_repartition_examples():
    r = Rect(0, 2, 0, 1)
    assert repartition([(r, 0)]) == [(r, (0,))]
    s = Rect(5, 6, 0, 1)
    assert repartition([(r, 0), (s, 1)]) == [(r, (0,)), (s, (1,))]
    out = repartition([(Rect(0, 2, 0, 2), 0), (Rect(1, 3, 1, 3), 0)])
    assert sum(c.area for c, _ in out) == pytest.approx(7.0)
    assert all(p == (0,) for _, p in out)


def _grid_union_area(rects, xs, ys):
    # independent oracle: measure of the union on the coordinate grid
    total = 0.0
    for x0, x1 in zip(xs, xs[1:]):
        for y0, y1 in zip(ys, ys[1:]):
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            if any(r.x_lo <= cx <= r.x_hi and r.y_lo <= cy <= r.y_hi for r in rects):
                total += (x1 - x0) * (y1 - y0)
    return total


frags = st.lists(
    st.tuples(st.integers(0, 10), st.integers(1, 5), st.integers(0, 10), st.integers(1, 5),
              st.integers(0, 3)),
    min_size=1, max_size=8,
)


@settings(max_examples=150, deadline=None)
@given(frags)
def test_repartition_properties(raw):
    fragments = [(Rect(x, x + w, y, y + h), pid) for x, w, y, h, pid in raw]
    out = repartition(fragments)
    rects = [r for r, _ in fragments]
    xs = sorted({r.x_lo for r in rects} | {r.x_hi for r in rects})
    ys = sorted({r.y_lo for r in rects} | {r.y_hi for r in rects})
    assert sum(c.area for c, _ in out) == pytest.approx(_grid_union_area(rects, xs, ys))
    for (a, _), (b, _) in itertools.combinations(out, 2):
        assert a.overlap_area(b) == 0
    for cell, parents in out:
        expected = tuple(sorted({pid for r, pid in fragments if r.overlap_area(cell) > 0}))
        assert parents == expected


@pytest.fixture(scope="module", params=BUILTIN_NAMES)
def builtin_graph(request, analysis_of):
    return builtin_task(request.param), analysis_of(request.param).reach


def test_layers_disjoint_and_collision_free(builtin_graph):
    task, g = builtin_graph
    assert len(g.layers) == task.goal.k_max + 1
    for k, layer in enumerate(g.layers):
        holes = forbidden_rects(task, k)
        cells = sorted(b.cell for b in layer)
        for b in layer:
            assert b.k == k
            assert all(b.cell.overlap_area(h) == 0 for h in holes)
        for a, c in zip(cells, cells[1:]):
            assert a.overlap_area(c) == 0


def test_edges_are_valid(builtin_graph):
    task, g = builtin_graph
    has_parent = [set() for _ in g.layers]
    for (k, p), (k1, c) in g.iter_edges():
        assert k1 == k + 1
        parent = propagate(g.layers[k][p], task.bounds, task.dt)
        assert parent.cell.overlap_area(g.layers[k1][c].cell) > 0
        has_parent[k1].add(c)
    for k in range(1, len(g.layers)):
        assert has_parent[k] == set(range(len(g.layers[k])))


def test_small_soundness_sample(builtin_graph):
    task, g = builtin_graph
    samples = sample_states(task, 400, seed=7)
    assert sum(len(m) for m in uncovered_states(g, samples)) == 0


def test_soundness_negative_control():
    # a set computed with half the acceleration authority must miss samples
    task = builtin_task("a").without_obstacles()
    weak = dataclasses.replace(task.bounds, a_s_max=2.0, a_s_min=-2.0)
    g = compute_reach_graph(dataclasses.replace(task, bounds=weak))
    samples = sample_states(task, 400, seed=1, horizon=50)
    assert sum(len(m) for m in uncovered_states(g, samples)) > 0


def test_determinism():
    task = builtin_task("b")
    g1, g2 = compute_reach_graph(task), compute_reach_graph(task)
    assert g1.layers == g2.layers and g1.edges == g2.edges


def test_obstacles_only_shrink_the_set(analysis_of):
    task = builtin_task("b")
    free = compute_reach_graph(task.without_obstacles())
    g = analysis_of("b").reach
    for k in range(0, len(g.layers), 13):
        for b in g.layers[k]:
            covered = sum(b.cell.overlap_area(f.cell) for f in free.layers[k])
            assert covered == pytest.approx(b.cell.area, abs=1e-6)


def test_b_lane_zero_closed_beside_first_blocker(analysis_of):
    task = builtin_task("b")
    g = analysis_of("b").reach
    hole = forbidden_rects(task, 120)[0]
    lane0 = Rect(hole.x_lo, hole.x_hi, 0.9, 1.9)
    assert all(b.cell.overlap_area(lane0) == 0 for b in g.layers[120])
    assert any(b.cell.x_hi > hole.x_hi for b in g.layers[120])


def test_d_set_dies_in_lane_zero_behind_stopped_lead(analysis_of):
    task = builtin_task("d")
    g = analysis_of("d").reach
    stop = forbidden_rects(task, 260)[0]
    for b in g.layers[-1]:
        if b.cell.y_hi <= 3.75:
            assert b.cell.x_hi <= stop.x_lo


def test_dump_layers(tmp_path):
    task = dataclasses.replace(builtin_task("a"), goal=dataclasses.replace(builtin_task("a").goal, k_max=5))
    g = compute_reach_graph(task)
    paths = dump_layers(g, str(tmp_path))
    assert [p.rsplit("/", 1)[1] for p in paths] == [f"layer_{k:04d}.json" for k in range(6)]
    import json

    rec = json.loads((tmp_path / "layer_0003.json").read_text())
    assert rec["k"] == 3 and rec["cells"][0]["parents"] == [0]
