import random

import pytest

from oracles import all_paths, backward_optimum, changes, forward_optimum, random_lane_graph
from scenario_challenge.lane_graph import LaneGraph, LaneNode
from scenario_challenge.search import (
    DecisionWindow,
    ManeuverPath,
    SearchError,
    backward_search,
    combine,
    forward_search,
    goal_nodes,
)


def _layered(lanes_per_step):
    """Fully connected layered graph; ``lanes_per_step[k]`` lists the lanes open at step k."""
    layers = [[LaneNode(k, i, lane) for i, lane in enumerate(lanes)]
              for k, lanes in enumerate(lanes_per_step)]
    lg = LaneGraph(nodes=[n for layer in layers for n in layer])
    for a, b in zip(layers, layers[1:]):
        for u in a:
            for v in b:
                lg.add_edge(u, v, abs(v.lane - u.lane))
    lg.initial_nodes = list(layers[0])
    return lg, layers


def test_latest_and_earliest_change_hand_built():
    # lane 0 closes at step 3
    lg, layers = _layered([[0], [0, 1], [0, 1], [1]])
    goals = set(layers[3])
    fwd = forward_search(lg, lg.initial_nodes, goals, 3)
    bwd = backward_search(lg, goals, lg.initial_nodes)
    assert fwd.change_steps == (3,) and fwd.total_weight == 1
    assert bwd.change_steps == (1,)
    assert combine(fwd, bwd, 0.1) == [DecisionWindow(0.1, 0.3, 0.2)]


def test_single_lane_has_no_changes():
    lg, layers = _layered([[0], [0], [0]])
    fwd = forward_search(lg, lg.initial_nodes, set(layers[2]), 2)
    assert fwd.total_weight == 0 and fwd.lane_changes == ()
    assert [n.k for n in fwd.nodes] == [0, 1, 2]


def test_forced_window_is_zero():
    lg, layers = _layered([[0], [0], [1], [1]])
    goals = set(layers[3])
    fwd = forward_search(lg, lg.initial_nodes, goals, 3)
    bwd = backward_search(lg, goals, lg.initial_nodes)
    assert fwd.change_steps == bwd.change_steps == (2,)
    assert combine(fwd, bwd, 0.1)[0].duration == 0


def test_forward_prefers_earliest_goal():
    lg, layers = _layered([[0], [0], [0], [0]])
    fwd = forward_search(lg, lg.initial_nodes, {layers[2][0], layers[3][0]}, 3)
    assert fwd.nodes[-1].k == 2


def test_multi_lane_jump_flag():
    p = ManeuverPath.from_nodes([LaneNode(0, 0, 0), LaneNode(1, 0, 2)])
    assert p.total_weight == 2 and p.lane_changes == ((1, 1),) and p.multi_lane_jump


def test_combine_mismatch():
    a = ManeuverPath.from_nodes([LaneNode(0, 0, 0), LaneNode(1, 0, 1)])
    b = ManeuverPath.from_nodes([LaneNode(0, 0, 0), LaneNode(1, 0, 0)])
    with pytest.raises(SearchError):
        combine(a, b, 0.1)
    assert combine(a, a, 0.1) == [DecisionWindow(0.1, 0.1, 0.0)]


def test_window_rounding():
    w = DecisionWindow.from_steps(19, 142, 0.1)
    assert (w.earliest, w.latest, w.duration) == (1.9, 14.2, 12.3)


def test_empty_goal_set():
    lg, _ = _layered([[0], [0]])
    with pytest.raises(SearchError):
        forward_search(lg, lg.initial_nodes, set(), 1)
    with pytest.raises(SearchError):
        backward_search(lg, set(), lg.initial_nodes)


@pytest.mark.parametrize("seed", range(150))
def test_dijkstra_matches_enumeration(seed):
    lg, goals, k_max = random_lane_graph(random.Random(seed))
    paths = all_paths(lg, goals)
    if not paths:
        with pytest.raises(AssertionError):
            forward_search(lg, lg.initial_nodes, goals, k_max)
        return
    fbest, fpaths = forward_optimum(paths, k_max)
    fwd = forward_search(lg, lg.initial_nodes, goals, k_max)
    assert list(fwd.nodes) in fpaths
    assert fwd.total_weight == fbest[0]
    bbest, bpaths = backward_optimum(paths)
    bwd = backward_search(lg, goals, lg.initial_nodes)
    assert list(bwd.nodes) in bpaths
    assert bwd.total_weight == bbest[0] == fbest[0]


def test_goal_nodes_of_scenario_a(analysis_of):
    a = analysis_of("a")
    goals = goal_nodes(a.lanes, a.reach, a.task.goal)
    first = min(k for k, layer in enumerate(a.reach.layers)
                if max(b.cell.x_hi for b in layer) >= a.task.goal.s_goal)
    assert goals and min(n.k for n in goals) == first


def test_goal_at_start_is_initial_node(analysis_of):
    import dataclasses

    a = analysis_of("a")
    goal = dataclasses.replace(a.task.goal, s_goal=a.task.ego.initial.p_s)
    assert set(a.lanes.initial_nodes) <= goal_nodes(a.lanes, a.reach, goal)


def test_goal_nodes_empty_when_blocked(analysis_of):
    a = analysis_of("d", True)
    assert goal_nodes(a.lanes, a.reach, a.task.goal) == set()
