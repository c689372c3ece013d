"""Grid maps, the 4-connected movement graph and shortest-path primitives."""

from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import _kernels


class Cell(NamedTuple):
    x: int
    y: int


class GridError(ValueError):
    """Raised for out-of-bounds or obstacle cells and malformed map files."""


# up, right, down, left
DIRECTIONS = ((0, -1), (1, 0), (0, 1), (-1, 0))


class GridMap:
    """Bounded grid with an obstacle set. Free cells with 4-adjacency form G.

    Instances are treated as immutable; derived tables are built once.
    """

    def __init__(self, width: int, height: int, obstacles: Iterable = ()):
        if width < 1 or height < 1:
            raise GridError(f"map dimensions must be positive, got {width}x{height}")
        obs = frozenset(Cell(int(o[0]), int(o[1])) for o in obstacles)
        for o in obs:
            if not (0 <= o.x < width and 0 <= o.y < height):
                raise GridError(f"obstacle {tuple(o)} outside {width}x{height} map")
        if len(obs) >= width * height:
            raise GridError("map has no free cell")
        self.width = width
        self.height = height
        self.obstacles = obs

        n = width * height
        free = np.ones(n, dtype=bool)
        for o in obs:
            free[o.y * width + o.x] = False
        self.free_mask = free

        table = np.full((n, 4), -1, dtype=np.int32)
        for i in np.flatnonzero(free):
            x, y = int(i) % width, int(i) // width
            for k, (dx, dy) in enumerate(DIRECTIONS):
                nx, ny = x + dx, y + dy
                if 0 <= nx < width and 0 <= ny < height and free[ny * width + nx]:
                    table[i, k] = ny * width + nx
        self.neighbor_table = table
        self._neighbor_lists = tuple(tuple(int(j) for j in row if j >= 0) for row in table)
        self._dist_cache: dict[int, np.ndarray] = {}

    @property
    def size(self) -> int:
        return self.width * self.height

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return (self.width, self.height, self.obstacles) == (
            other.width,
            other.height,
            other.obstacles,
        )

    def __hash__(self):
        return hash((self.width, self.height, self.obstacles))

    def __repr__(self):
        return f"GridMap({self.width}x{self.height}, {len(self.obstacles)} obstacles)"

    def in_bounds(self, cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def is_free(self, cell) -> bool:
        return self.in_bounds(cell) and bool(self.free_mask[cell[1] * self.width + cell[0]])

    def index(self, cell) -> int:
        return cell[1] * self.width + cell[0]

    def cell(self, index: int) -> Cell:
        return Cell(index % self.width, index // self.width)

    def free_cells(self) -> list[Cell]:
        """Free cells in row-major order."""
        return [self.cell(int(i)) for i in np.flatnonzero(self.free_mask)]

    def neighbor_indices(self, index: int) -> tuple[int, ...]:
        return self._neighbor_lists[index]

    def require_free(self, cell) -> None:
        if not self.in_bounds(cell):
            raise GridError(f"cell {tuple(cell)} is outside the {self.width}x{self.height} map")
        if not self.free_mask[self.index(cell)]:
            raise GridError(f"cell {tuple(cell)} is an obstacle")

    def blocked_mask(self, cells: Iterable = ()) -> np.ndarray:
        mask = np.zeros(self.size, dtype=np.uint8)
        w, h = self.width, self.height
        idx = [y * w + x for x, y in cells if 0 <= x < w and 0 <= y < h]
        if idx:
            mask[idx] = 1
        return mask

    def distance_array(self, source_index: int) -> np.ndarray:
        """Cached static BFS distances from one cell index (-1 = unreachable)."""
        dist = self._dist_cache.get(source_index)
        if dist is None:
            dist = np.empty(self.size, dtype=np.int64)
            _kernels.bfs_distances(
                self.neighbor_table,
                np.zeros(self.size, dtype=np.uint8),
                np.array([source_index], dtype=np.int64),
                -1,
                dist,
                np.empty(self.size, dtype=np.int64),
            )
            self._dist_cache[source_index] = dist
        return dist

    def distance(self, a, b) -> int | None:
        d = int(self.distance_array(self.index(a))[self.index(b)])
        return None if d < 0 else d

    def multi_source_distances(self, sources: Iterable, blocked=None, max_depth: int = -1) -> np.ndarray:
        src = np.array([self.index(c) for c in sources], dtype=np.int64)
        if blocked is None:
            blocked = np.zeros(self.size, dtype=np.uint8)
        dist = np.empty(self.size, dtype=np.int64)
        queue = np.empty(self.size, dtype=np.int64)
        _kernels.bfs_distances(self.neighbor_table, blocked, src, max_depth, dist, queue)
        return dist

    def index_path(self, src: int, dst: int, blocked: np.ndarray) -> list[int] | None:
        """BFS path between indices with fixed neighbour order, or None."""
        # scratch buffers are per call so a map can be shared between threads
        parent = np.empty(self.size, dtype=np.int64)
        queue = np.empty(self.size, dtype=np.int64)
        if not _kernels.bfs_parents(self.neighbor_table, blocked, src, dst, parent, queue):
            return None
        path = [dst]
        while path[-1] != src:
            path.append(int(parent[path[-1]]))
        path.reverse()
        return path

    # -- text format -------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> GridMap:
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise GridError("empty map file")
        header = lines[0].split(" ")
        if len(header) != 2:
            raise GridError(f"bad map header {lines[0]!r}; expected '<width> <height>'")
        try:
            width, height = int(header[0]), int(header[1])
        except ValueError as exc:
            raise GridError(f"bad map header {lines[0]!r}") from exc
        rows = lines[1:]
        if len(rows) != height:
            raise GridError(f"expected {height} rows, found {len(rows)}")
        obstacles = []
        for y, row in enumerate(rows):
            if len(row) != width:
                raise GridError(f"row {y} has {len(row)} characters, expected {width}")
            for x, ch in enumerate(row):
                if ch == "#":
                    obstacles.append((x, y))
                elif ch != ".":
                    raise GridError(f"unexpected character {ch!r} at ({x}, {y})")
        return cls(width, height, obstacles)

    def to_text(self) -> str:
        rows = [f"{self.width} {self.height}"]
        for y in range(self.height):
            rows.append(
                "".join("." if self.free_mask[y * self.width + x] else "#" for x in range(self.width))
            )
        return "\n".join(rows) + "\n"

    @classmethod
    def load(cls, path) -> GridMap:
        return cls.from_text(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())


def neighbors(grid: GridMap, v) -> list[Cell]:
    """Free 4-neighbours of ``v`` in up, right, down, left order."""
    grid.require_free(v)
    return [grid.cell(j) for j in grid.neighbor_indices(grid.index(v))]


def shortest_path(grid: GridMap, start, goal, forbidden: Iterable = ()) -> list[Cell] | None:
    """Minimum-length path from ``start`` to ``goal`` avoiding ``forbidden``.

    Ties between equal-length paths follow BFS discovery with the fixed
    neighbour order. Returns None when ``goal`` is forbidden or unreachable.
    """
    grid.require_free(start)
    grid.require_free(goal)
    forbidden = forbidden if isinstance(forbidden, (set, frozenset)) else set(forbidden)
    if start in forbidden:
        raise GridError(f"start {tuple(start)} is in the forbidden set")
    if goal in forbidden:
        return None
    path = grid.index_path(grid.index(start), grid.index(goal), grid.blocked_mask(forbidden))
    if path is None:
        return None
    return [grid.cell(i) for i in path]


def bfs_distances(grid: GridMap, source) -> dict[Cell, int]:
    grid.require_free(source)
    dist = grid.distance_array(grid.index(source))
    return {grid.cell(int(i)): int(dist[i]) for i in np.flatnonzero(dist >= 0)}
