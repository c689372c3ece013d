from hypothesis import given, settings
from hypothesis import strategies as st

from appc.engine import run_episode, validate_moves
from appc.grid import Cell, GridMap, shortest_path
from appc.model import Configuration, attacker, defender
from appc.pathfinding import (
    PlanState,
    defender_next_move_connected,
    defender_policy,
    lra_next_move,
)
from appc.replay import check_trace
from appc.visibility import build_visibility_graph, is_connected
from util import empty, instance


def test_free_corridor_steps_forward():
    state = PlanState()
    assert lra_next_move(empty(5, 1), "a", Cell(0, 0), Cell(4, 0), set(), state) == (1, 0)
    assert state.replans == 0


def test_blocked_next_cell_takes_detour():
    g = empty(4, 3)
    state = PlanState()
    pos, goal = Cell(0, 0), Cell(3, 0)
    assert lra_next_move(g, "a", pos, goal, {pos}, state) == (1, 0)
    # someone now stands on the next cell; the plan is recomputed around it
    occupied = {Cell(1, 0), Cell(1, 1)}
    nxt = lra_next_move(g, "a", pos, goal, occupied | {pos}, state)
    detour = shortest_path(g, pos, goal, occupied)
    assert nxt == detour[1]
    assert state.replans == 1


def test_enclosed_agent_waits():
    g = empty(3, 3)
    state = PlanState()
    ring = {Cell(1, 0), Cell(2, 1), Cell(1, 2), Cell(0, 1)}
    assert lra_next_move(g, "a", Cell(1, 1), Cell(2, 2), ring, state) == (1, 1)


def test_single_attacker_arrives_in_bfs_distance():
    g = GridMap(7, 5, [(3, 0), (3, 1), (3, 2), (3, 3)])
    inst = instance(g, [(0, 0)], [], [(6, 0)])
    res = run_episode(inst, "rnd", 0)
    assert res.captured == {0: g.distance((0, 0), (6, 0))}


def test_rear_attacker_follows_in_corridor():
    inst = instance(empty(5, 1), [(1, 0), (0, 0)], [], [(4, 0), (3, 0)])
    res = run_episode(inst, "rnd", 0)
    assert check_trace(res.trace, inst.grid, targets=inst.targets) == []
    assert res.captured == {0: 3, 1: 4}


def test_walled_target_is_never_captured():
    # two defenders seal the corner target; the one assigned to it may step onto it
    g = empty(4, 4)
    inst = instance(g, [(0, 0)], [(2, 3), (3, 2)], [(3, 3)])
    res = run_episode(inst, "rnd", 0)
    assert res.captured == {}


def test_single_defender_matches_lra():
    g = empty(5, 5)
    vis = build_visibility_graph(g, 2)
    a, b = PlanState(), PlanState()
    pos, target = Cell(0, 0), Cell(4, 3)
    plain = lra_next_move(g, defender(0), pos, target, {pos}, a)
    guarded = defender_next_move_connected(g, vis, [pos], 0, target, {pos}, b)
    assert plain == guarded


def test_far_defender_waits_at_range_limit():
    r = 2
    g = empty(r + 2, 1)
    vis = build_visibility_graph(g, r)
    positions = [Cell(0, 0), Cell(r, 0)]
    state = PlanState()
    nxt = defender_next_move_connected(g, vis, positions, 1, Cell(r + 1, 0), set(positions), state)
    assert nxt == positions[1]
    assert not is_connected(vis, [Cell(0, 0), Cell(r + 1, 0)])


def test_move_inside_visible_cluster_is_allowed():
    g = empty(4, 4)
    vis = build_visibility_graph(g, 8)
    positions = [Cell(0, 0), Cell(1, 1), Cell(2, 2)]
    state = PlanState()
    nxt = defender_next_move_connected(g, vis, positions, 2, Cell(3, 3), set(positions), state)
    assert nxt in {Cell(3, 2), Cell(2, 3)}


def test_defender_waits_next_to_target_held_by_teammate():
    g = empty(4, 1)
    inst = instance(g, [(0, 0)], [(2, 0), (3, 0)], [(1, 0)])
    state = PlanState()
    assert defender_policy(inst, inst.start, {0: Cell(3, 0)}, state) == {}


@st.composite
def defender_setups(draw):
    w, h = draw(st.integers(2, 6)), draw(st.integers(2, 6))
    cells = [Cell(x, y) for y in range(h) for x in range(w)]
    obstacles = draw(st.sets(st.sampled_from(cells), max_size=len(cells) // 3))
    free = [c for c in cells if c not in obstacles]
    r = draw(st.integers(1, 4))
    g = GridMap(w, h, obstacles)
    vis = build_visibility_graph(g, r)
    # grow a connected team one visible cell at a time
    first = draw(st.sampled_from(free))
    team = [first]
    for _ in range(draw(st.integers(0, min(5, len(free) - 1)))):
        frontier = sorted({n for c in team for n in vis.neighbors(c)} - set(team))
        if not frontier:
            break
        team.append(draw(st.sampled_from(frontier)))
    targets = {j: draw(st.sampled_from(free)) for j in range(len(team))}
    return g, vis, team, targets


@settings(max_examples=300, deadline=None)
@given(defender_setups(), st.integers(1, 6))
def test_guarded_policy_never_disconnects(setup, steps):
    g, vis, team, targets = setup
    inst = instance(g, [], team, [])
    state = PlanState()
    config = inst.start
    for _ in range(steps):
        moves = defender_policy(inst, config, targets, state, vis)
        assert validate_moves(config, moves, g) == []
        config = config.moved(moves)
        assert config.is_injective()
        assert is_connected(vis, config.defenders)


@settings(max_examples=300, deadline=None)
@given(defender_setups(), st.data())
def test_lra_returns_own_cell_or_free_neighbour(setup, data):
    g, _, team, _ = setup
    free = g.free_cells()
    pos = team[0]
    target = data.draw(st.sampled_from(free))
    occupied = set(data.draw(st.sets(st.sampled_from(free), max_size=6))) | {pos}
    nxt = lra_next_move(g, "x", pos, target, occupied, PlanState())
    assert nxt == pos or (
        g.is_free(nxt) and nxt not in occupied and abs(nxt.x - pos.x) + abs(nxt.y - pos.y) == 1
    )


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.data())
def test_lone_agent_on_empty_map_takes_bfs_distance(w, h, data):
    g = empty(w, h)
    a = Cell(*data.draw(st.tuples(st.integers(0, w - 1), st.integers(0, h - 1))))
    b = Cell(*data.draw(st.tuples(st.integers(0, w - 1), st.integers(0, h - 1))))
    state = PlanState()
    pos, n = a, 0
    while pos != b and n < w + h:
        pos = lra_next_move(g, "x", pos, b, {pos}, state)
        n += 1
    assert pos == b and n == abs(a.x - b.x) + abs(a.y - b.y)


def test_attackers_move_against_snapshot():
    # a1 wants a0's cell; a0 moves away in the same batch but a1 only sees the snapshot
    from appc.pathfinding import attacker_policy

    inst = instance(empty(4, 1), [(1, 0), (0, 0)], [], [(3, 0), (2, 0)])
    moves = attacker_policy(inst, inst.start, PlanState())
    assert moves == {attacker(0): Cell(2, 0)}
    assert Configuration(inst.attackers, ()) == inst.start
