"""Visibility graph G_r over free cells and induced-subgraph connectivity.

Two free cells see each other when the segment between their centres avoids
the interior of every obstacle square and their distance in the movement
graph is at most ``r``. Obstacle squares are open sets, so a segment grazing a
corner or running along an edge is not blocked.
"""

from __future__ import annotations

from collections.abc import Iterable
from functools import lru_cache

import numpy as np

from .grid import Cell, GridMap


def _segment_hits_square(px: int, py: int, qx: int, qy: int, sx: int, sy: int) -> bool:
    # Doubled coordinates: segment P-Q, square [sx, sx+2] x [sy, sy+2].
    if max(px, qx) <= sx or min(px, qx) >= sx + 2:
        return False
    if max(py, qy) <= sy or min(py, qy) >= sy + 2:
        return False
    dx, dy = qx - px, qy - py
    sides = [
        dx * (cy - py) - dy * (cx - px)
        for cx, cy in ((sx, sy), (sx + 2, sy), (sx, sy + 2), (sx + 2, sy + 2))
    ]
    if all(s >= 0 for s in sides) or all(s <= 0 for s in sides):
        return False
    return True


def line_of_sight(grid: GridMap, u, v) -> bool:
    """True iff the segment between the centres of ``u`` and ``v`` misses every obstacle interior."""
    px, py = 2 * u[0] + 1, 2 * u[1] + 1
    qx, qy = 2 * v[0] + 1, 2 * v[1] + 1
    free = grid.free_mask
    w = grid.width
    for y in range(min(u[1], v[1]), max(u[1], v[1]) + 1):
        for x in range(min(u[0], v[0]), max(u[0], v[0]) + 1):
            if not free[y * w + x] and _segment_hits_square(px, py, qx, qy, 2 * x, 2 * y):
                return False
    return True


class VisibilityGraph:
    """Visibility graph on the free cells of a map for range ``r``.

    Adjacency is stored as one bitmask per cell index (bit ``j`` set when cell
    index ``j`` is visible), which keeps repeated connectivity checks cheap.
    """

    def __init__(self, grid: GridMap, r: int, masks: list[int]):
        self.grid = grid
        self.r = r
        self.masks = masks

    def mask_of(self, cells: Iterable) -> int:
        m = 0
        w = self.grid.width
        for c in cells:
            m |= 1 << (c[1] * w + c[0])
        return m

    def cells_of(self, mask: int) -> list[Cell]:
        out = []
        while mask:
            low = mask & -mask
            out.append(self.grid.cell(low.bit_length() - 1))
            mask ^= low
        return out

    @property
    def vertices(self) -> list[Cell]:
        return self.grid.free_cells()

    def has_edge(self, u, v) -> bool:
        return bool(self.masks[self.grid.index(u)] >> self.grid.index(v) & 1)

    def neighbors(self, u) -> list[Cell]:
        return self.cells_of(self.masks[self.grid.index(u)])

    def edges(self) -> set[tuple[Cell, Cell]]:
        """Unordered edges as (u, v) pairs with u before v in row-major order."""
        out = set()
        for i in np.flatnonzero(self.grid.free_mask):
            i = int(i)
            higher = self.masks[i] >> (i + 1) << (i + 1)
            u = self.grid.cell(i)
            for v in self.cells_of(higher):
                out.add((u, v))
        return out

    def component_masks(self, subset: int) -> list[int]:
        """Connected components of the induced subgraph, ordered by lowest index."""
        masks = self.masks
        comps = []
        remaining = subset
        while remaining:
            seed = remaining & -remaining
            comp = seed
            frontier = seed
            while frontier:
                reach = 0
                while frontier:
                    low = frontier & -frontier
                    reach |= masks[low.bit_length() - 1]
                    frontier ^= low
                frontier = reach & remaining & ~comp
                comp |= frontier
            comps.append(comp)
            remaining &= ~comp
        return comps

    def mask_connected(self, subset: int) -> bool:
        if subset & (subset - 1) == 0:
            return True
        masks = self.masks
        seed = subset & -subset
        comp = seed
        frontier = seed
        while frontier:
            reach = 0
            while frontier:
                low = frontier & -frontier
                reach |= masks[low.bit_length() - 1]
                frontier ^= low
            frontier = reach & subset & ~comp
            comp |= frontier
        return comp == subset


def build_visibility_graph(grid: GridMap, r: int) -> VisibilityGraph:
    """Construct G_r: pairs with line of sight and movement-graph distance at most ``r``."""
    if r < 1:
        raise ValueError(f"visibility range must be >= 1, got {r}")
    masks = [0] * grid.size
    blocked = np.zeros(grid.size, dtype=np.uint8)
    for i in np.flatnonzero(grid.free_mask):
        i = int(i)
        u = grid.cell(i)
        dist = grid.multi_source_distances([u], blocked, max_depth=r)
        for j in np.flatnonzero(dist > 0):
            j = int(j)
            if j < i:
                continue
            if line_of_sight(grid, u, grid.cell(j)):
                masks[i] |= 1 << j
                masks[j] |= 1 << i
    return VisibilityGraph(grid, r, masks)


@lru_cache(maxsize=32)
def visibility_graph(grid: GridMap, r: int) -> VisibilityGraph:
    """Cached G_r per (map, range)."""
    return build_visibility_graph(grid, r)


def is_connected(g: VisibilityGraph, cells: Iterable) -> bool:
    return g.mask_connected(g.mask_of(cells))


def connected_components(g: VisibilityGraph, cells: Iterable) -> list[set[Cell]]:
    """Partition of ``cells`` into components of G_r[cells], sorted by minimum cell."""
    return [set(g.cells_of(m)) for m in g.component_masks(g.mask_of(cells))]
