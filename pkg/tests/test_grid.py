import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from appc.grid import Cell, GridError, GridMap, bfs_distances, neighbors, shortest_path
from util import empty, grid


def test_neighbors_interior_order():
    assert neighbors(empty(3, 3), (1, 1)) == [(1, 0), (2, 1), (1, 2), (0, 1)]


def test_neighbors_skip_obstacle():
    g = GridMap(3, 3, [(1, 0)])
    assert neighbors(g, (1, 1)) == [(2, 1), (1, 2), (0, 1)]


def test_neighbors_single_cell():
    assert neighbors(empty(1, 1), (0, 0)) == []


@pytest.mark.parametrize("cell", [(3, 0), (-1, 0), (1, 0)])
def test_neighbors_rejects_bad_cells(cell):
    with pytest.raises(GridError):
        neighbors(GridMap(3, 3, [(1, 0)]), cell)


def test_shortest_path_straight():
    path = shortest_path(empty(3, 3), (0, 0), (2, 0))
    assert len(path) - 1 == 2


def _all_simple_paths(w, h, obstacles, a, b, forbidden):
    # depth-first enumeration of every simple path, for the shortest length
    out = []

    def walk(path):
        c = path[-1]
        if c == b:
            out.append(list(path))
            return
        for n in oracles.grid_neighbors(w, h, obstacles, c):
            if n not in path and n not in forbidden:
                path.append(n)
                walk(path)
                path.pop()

    walk([a])
    return out


def test_shortest_path_detour_matches_enumeration():
    paths = _all_simple_paths(3, 3, set(), (0, 0), (2, 0), {(1, 0)})
    best = min(len(p) - 1 for p in paths)
    path = shortest_path(empty(3, 3), (0, 0), (2, 0), {(1, 0)})
    assert best == 4
    assert len(path) - 1 == best
    assert (1, 0) not in path


def test_shortest_path_severed_corridor():
    assert shortest_path(empty(3, 1), (0, 0), (2, 0), {(1, 0)}) is None


def test_shortest_path_forbidden_goal_is_absent():
    assert shortest_path(empty(3, 1), (0, 0), (2, 0), {(2, 0)}) is None


def test_shortest_path_forbidden_start_raises():
    with pytest.raises(GridError):
        shortest_path(empty(3, 1), (0, 0), (2, 0), {(0, 0)})


def test_bfs_distances_2x2():
    assert bfs_distances(empty(2, 2), (0, 0)) == {(0, 0): 0, (1, 0): 1, (0, 1): 1, (1, 1): 2}


def test_bfs_distances_isolated():
    assert bfs_distances(GridMap(3, 1, [(1, 0)]), (0, 0)) == {(0, 0): 0}


def test_bfs_distance_manhattan_5x5():
    assert bfs_distances(empty(5, 5), (0, 0))[(4, 4)] == 8


def test_map_text_roundtrip(tmp_path):
    text = "4 3\n.#..\n....\n##..\n"
    g = GridMap.from_text(text)
    assert g.obstacles == {Cell(1, 0), Cell(0, 2), Cell(1, 2)}
    assert g.to_text() == text
    g.save(tmp_path / "m.txt")
    assert (tmp_path / "m.txt").read_bytes() == text.encode()
    assert GridMap.load(tmp_path / "m.txt") == g


@pytest.mark.parametrize(
    "text",
    ["", "3\n...\n", "3 2\n...\n", "3 1\n..\n", "3 1\n.x.\n", "1 1\n#\n", "3 1 \n...\n"],
)
def test_map_text_errors(text):
    with pytest.raises(GridError):
        GridMap.from_text(text)


@st.composite
def maps_and_cells(draw):
    w = draw(st.integers(1, 7))
    h = draw(st.integers(1, 7))
    cells = [(x, y) for y in range(h) for x in range(w)]
    obstacles = draw(st.sets(st.sampled_from(cells), max_size=len(cells) - 1))
    free = [c for c in cells if c not in obstacles]
    a = draw(st.sampled_from(free))
    b = draw(st.sampled_from(free))
    forbidden = draw(st.sets(st.sampled_from(free), max_size=4)) - {a}
    return w, h, obstacles, a, b, forbidden


@settings(max_examples=300, deadline=None)
@given(maps_and_cells())
def test_shortest_path_is_shortest_and_legal(case):
    w, h, obstacles, a, b, forbidden = case
    g = GridMap(w, h, obstacles)
    path = shortest_path(g, a, b, forbidden)
    ref = oracles.bfs(w, h, obstacles, a, blocked=forbidden)
    if b not in ref:
        assert path is None
        return
    assert path[0] == a and path[-1] == b
    assert len(path) - 1 == ref[b]
    for p, q in itertools.pairwise(path):
        assert abs(p[0] - q[0]) + abs(p[1] - q[1]) == 1
        assert g.is_free(q) and q not in forbidden


@settings(max_examples=200, deadline=None)
@given(maps_and_cells())
def test_bfs_distances_match_oracle(case):
    w, h, obstacles, a, b, _ = case
    g = GridMap(w, h, obstacles)
    assert bfs_distances(g, a) == oracles.bfs(w, h, obstacles, a)
    path = shortest_path(g, a, b)
    d = bfs_distances(g, a).get(b)
    assert (path is None) == (d is None)
    if path is not None:
        assert len(path) - 1 == d


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.data())
def test_empty_map_paths_are_manhattan(w, h, data):
    g = empty(w, h)
    a = data.draw(st.tuples(st.integers(0, w - 1), st.integers(0, h - 1)))
    b = data.draw(st.tuples(st.integers(0, w - 1), st.integers(0, h - 1)))
    path = shortest_path(g, a, b)
    assert len(path) - 1 == abs(a[0] - b[0]) + abs(a[1] - b[1])
    assert shortest_path(g, a, b) == path


def test_grid_helper_builds_expected_map():
    g = grid("..#", "...")
    assert (g.width, g.height) == (3, 2) and g.obstacles == {Cell(2, 0)}
