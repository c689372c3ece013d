import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from appc.engine import (
    NOT_ADJACENT,
    OCCUPIED,
    SAME_DESTINATION,
    SWAP,
    EpisodeResult,
    compute_metrics,
    resolve_batch,
    run_episode,
    step,
    validate_moves,
)
from appc.grid import Cell, GridMap
from appc.model import Configuration, attacker, defender
from appc.replay import check_trace
from appc.strategies import Allocation
from util import empty, instance


def cfg(attackers=(), defenders=()):
    return Configuration(tuple(Cell(*c) for c in attackers), tuple(Cell(*c) for c in defenders))


def rules(violations):
    return sorted(v.rule for v in violations)


def test_single_move_ok():
    assert validate_moves(cfg([(0, 0)]), {attacker(0): Cell(1, 0)}) == []


def test_swap_is_violation():
    c = cfg([(0, 0), (1, 0)])
    v = validate_moves(c, {attacker(0): Cell(1, 0), attacker(1): Cell(0, 0)})
    assert rules(v) == [SWAP]
    assert set(v[0].agents) == {attacker(0), attacker(1)}


def test_same_destination_is_violation():
    c = cfg([(0, 0), (2, 0)])
    v = validate_moves(c, {attacker(0): Cell(1, 0), attacker(1): Cell(1, 0)})
    assert rules(v) == [SAME_DESTINATION]


def test_entering_waiting_agent_is_violation():
    c = cfg([(0, 0)], [(1, 0)])
    assert rules(validate_moves(c, {attacker(0): Cell(1, 0)})) == [OCCUPIED]


def test_follow_the_leader_is_legal():
    c = cfg([(0, 0), (1, 0)])
    assert validate_moves(c, {attacker(0): Cell(1, 0), attacker(1): Cell(2, 0)}) == []


def test_rotation_of_four_is_legal():
    c = cfg([(0, 0), (1, 0), (1, 1), (0, 1)])
    moves = {
        attacker(0): Cell(1, 0),
        attacker(1): Cell(1, 1),
        attacker(2): Cell(0, 1),
        attacker(3): Cell(0, 0),
    }
    assert validate_moves(c, moves) == []


def test_non_adjacent_move_flagged():
    assert rules(validate_moves(cfg([(0, 0)]), {attacker(0): Cell(2, 0)})) == [NOT_ADJACENT]


def test_resolve_keeps_lower_index():
    c = cfg([(0, 0), (2, 0)])
    moves = {attacker(0): Cell(1, 0), attacker(1): Cell(1, 0)}
    assert resolve_batch(c, moves) == {attacker(0): Cell(1, 0)}


def test_resolve_cascades_behind_blocked_agent():
    # a0 cannot enter the wall cell so a1 behind it must wait as well
    g = GridMap(4, 1, [(3, 0)])
    c = cfg([(2, 0), (1, 0)])
    moves = {attacker(0): Cell(3, 0), attacker(1): Cell(2, 0)}
    assert resolve_batch(c, moves, g) == {}


def test_all_wait_is_identity():
    inst = instance(empty(3, 3), [(0, 0)], [(2, 2)], [(2, 0)])
    assert step(inst, inst.start, {}, {}) == inst.start


def test_defender_enters_cell_vacated_by_attacker():
    inst = instance(empty(4, 1), [(1, 0)], [(0, 0)], [(3, 0)])
    nxt = step(inst, inst.start, {attacker(0): Cell(2, 0)}, {defender(0): Cell(1, 0)})
    assert nxt == cfg([(2, 0)], [(1, 0)])


def test_attacker_cannot_enter_defended_target():
    inst = instance(empty(3, 1), [(0, 0)], [(1, 0)], [(1, 0)])
    nxt = step(inst, inst.start, {attacker(0): Cell(1, 0)}, {})
    assert nxt == inst.start


def test_zero_defenders_capture_at_bfs_distance():
    g = GridMap(6, 5, [(2, 1), (2, 2), (2, 3)])
    inst = instance(g, [(0, 2)], [], [(5, 2)])
    res = run_episode(inst, "rnd", 0)
    d = g.distance((0, 2), (5, 2))
    assert res.captured == {0: d}
    assert res.metrics.targets_saved == 0
    assert res.metrics.time_at_captured_targets == inst.step_limit - d


@pytest.mark.parametrize("strategy", ["rnd", "grd", "rnd-c", "grd-c"])
def test_defender_on_target_saves_it(strategy):
    inst = instance(empty(5, 5), [(0, 0)], [(4, 4)], [(4, 4)])
    res = run_episode(inst, strategy, 0)
    assert res.metrics.targets_saved == 1
    assert all(c.defenders[0] == Cell(4, 4) for c in res.trace)


def test_captured_attackers_never_move():
    inst = instance(empty(3, 1), [(2, 0)], [], [(1, 0)])
    res = run_episode(inst, "rnd", 0)
    assert res.captured == {0: 1}
    assert all(c.attackers[0] == Cell(1, 0) for c in res.trace[1:])


def test_metrics_definitions():
    g = empty(10, 1)
    inst = instance(g, [(0, 0), (9, 0)], [], [(3, 0), (5, 0)], step_limit=20)
    trace = [inst.start, cfg([(3, 0), (8, 0)])]
    res = EpisodeResult(trace, {0: 10}, Allocation(), "rnd", 0)
    m = compute_metrics(inst, res)
    assert m.targets_saved == 1
    assert m.targets_saved_within_limit == 1
    assert m.sum_attacker_target_distance == 3
    assert m.time_at_captured_targets == 10


def test_metrics_no_capture_and_unreachable():
    g = GridMap(3, 1, [(1, 0)])
    inst = instance(g, [(0, 0)], [], [(2, 0)])
    res = run_episode(inst, "grd", 0)
    assert res.metrics.time_at_captured_targets == 0
    assert res.metrics.sum_attacker_target_distance == g.width + g.height
    assert res.metrics.targets_saved == 1


def test_metrics_horizon_shorter_than_episode():
    inst = instance(empty(8, 1), [(0, 0)], [], [(7, 0)], time_limit=5)
    res = run_episode(inst, "rnd", 0)
    assert res.captured == {0: 7}
    assert res.metrics.targets_saved == 0
    assert res.metrics.targets_saved_within_limit == 1


def test_run_episode_is_deterministic():
    from appc.instance_gen import generate_instance, generate_map, spawn_spec

    g = generate_map("ruins", 24, 24, seed=3)
    inst = generate_instance(g, spawn_spec(g, 12, (1, 2), seed=5), r=4, communicator_ratio=0.34)
    for s in ("rnd", "sim-c"):
        a = run_episode(inst, s, 11)
        b = run_episode(inst, s, 11)
        assert a.trace == b.trace and a.captured == b.captured


def test_trace_length_bounded_by_step_limit():
    from appc.instance_gen import generate_instance, generate_map, spawn_spec

    g = generate_map("orthogonal-rooms", 30, 30, seed=1)
    inst = generate_instance(g, spawn_spec(g, 20, (1, 1), seed=2), step_limit=40)
    res = run_episode(inst, "grd-c", 1)
    assert len(res.trace) <= inst.step_limit + 1
    assert all(t <= inst.step_limit for t in res.captured.values())


@st.composite
def batches(draw):
    w, h = draw(st.integers(2, 5)), draw(st.integers(2, 5))
    cells = [Cell(x, y) for y in range(h) for x in range(w)]
    n = draw(st.integers(1, min(6, len(cells))))
    placed = draw(st.permutations(cells))[:n]
    k = draw(st.integers(0, n))
    current = Configuration(tuple(placed[:k]), tuple(placed[k:]))
    moves = {}
    for a in current.agents():
        c = current[a]
        options = [c] + [Cell(c.x + dx, c.y + dy) for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0))]
        options = [o for o in options if 0 <= o.x < w and 0 <= o.y < h]
        moves[a] = draw(st.sampled_from(options))
    return GridMap(w, h), current, moves


@settings(max_examples=400, deadline=None)
@given(batches())
def test_resolved_batch_is_legal_and_injective(case):
    g, current, moves = case
    kept = resolve_batch(current, moves, g)
    assert validate_moves(current, kept, g) == []
    assert current.moved(kept).is_injective()
    for a, c in kept.items():
        assert moves[a] == c


@settings(max_examples=400, deadline=None)
@given(batches())
def test_legal_batches_survive_resolution(case):
    g, current, moves = case
    moving = {a: c for a, c in moves.items() if c != current[a]}
    if not validate_moves(current, moving, g):
        assert resolve_batch(current, moves, g) == moving


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["rnd", "grd", "sim", "rnd-c", "grd-c", "sim-c"]))
def test_random_small_episodes_obey_invariants(seed, strategy):
    from appc.instance_gen import generate_instance, generate_map, spawn_spec

    family = ["orthogonal-rooms", "ruins", "waterfront"][seed % 3]
    g = generate_map(family, 20, 20, seed=seed)
    inst = generate_instance(
        g, spawn_spec(g, 10, (1, 2), seed=seed), r=4, step_limit=60, communicator_ratio=0.3
    )
    res = run_episode(inst, strategy, seed)
    guarded = strategy.endswith("-c")
    assert check_trace(res.trace, g, inst.r, guarded, inst.targets) == []
