"""LRA*-style movement: follow a stored shortest path, replan on conflict.

Other agents are treated as obstacles only when they block the next step;
the replanning exclusion set is the occupancy snapshot at decision time.
"""

from __future__ import annotations

from collections.abc import Hashable, Sequence
from dataclasses import dataclass, field

from .grid import Cell, GridMap, shortest_path
from .model import Configuration, Instance, attacker, defender
from .visibility import VisibilityGraph


@dataclass
class PlanState:
    """Per-agent stored path and the index of the agent's cell on it."""

    paths: dict[Hashable, list[Cell]] = field(default_factory=dict)
    progress: dict[Hashable, int] = field(default_factory=dict)
    replans: int = 0

    def store(self, agent: Hashable, path: list[Cell]) -> None:
        self.paths[agent] = path
        self.progress[agent] = 0

    def follow(self, agent: Hashable, position: Cell) -> list[Cell] | None:
        """The agent's path synced to ``position``, or None if it is off-plan."""
        path = self.paths.get(agent)
        if path is None:
            return None
        i = self.progress[agent]
        if path[i] == position:
            return path
        if i + 1 < len(path) and path[i + 1] == position:
            self.progress[agent] = i + 1
            return path
        del self.paths[agent], self.progress[agent]
        return None

    def next_cell(self, agent: Hashable) -> Cell | None:
        path = self.paths[agent]
        i = self.progress[agent]
        return path[i + 1] if i + 1 < len(path) else None


def _replan(grid, agent, position, target, occupied, state, extra_forbidden=frozenset()):
    state.replans += 1
    forbidden = (occupied - {position, target}) | extra_forbidden
    path = shortest_path(grid, position, target, forbidden)
    if path is None:
        return position
    state.store(agent, path)
    nxt = path[1]
    # only the target itself can still be occupied here
    return position if nxt in occupied else nxt


def lra_next_move(
    grid: GridMap,
    agent: Hashable,
    position: Cell,
    target: Cell,
    occupied: set[Cell],
    state: PlanState,
) -> Cell:
    """Next cell for ``agent`` toward ``target``; its own cell means wait.

    A fresh plan is a static shortest path. When the next cell is occupied the
    path is recomputed with every occupied cell except the agent's own and the
    target forbidden; if that fails the agent waits and keeps its old plan.
    """
    if position == target:
        return position
    if state.follow(agent, position) is None:
        path = shortest_path(grid, position, target)
        if path is None:
            return position
        state.store(agent, path)
    nxt = state.next_cell(agent)
    if nxt is None:
        return position
    if nxt in occupied:
        return _replan(grid, agent, position, target, occupied, state)
    return nxt


def attacker_policy(
    instance: Instance,
    config: Configuration,
    state: PlanState,
    captured: set[int] | frozenset = frozenset(),
) -> dict:
    """Proposed moves for every uncaptured attacker against the snapshot ``config``."""
    occupied = config.occupied()
    moves = {}
    for i, pos in enumerate(config.attackers):
        target = instance.targets[i]
        if i in captured or pos == target:
            continue
        nxt = lra_next_move(instance.grid, attacker(i), pos, target, occupied, state)
        if nxt != pos:
            moves[attacker(i)] = nxt
    return moves


def defender_next_move_connected(
    grid: GridMap,
    g: VisibilityGraph,
    positions: Sequence[Cell],
    j: int,
    target: Cell,
    occupied: set[Cell],
    state: PlanState,
    mask: int | None = None,
) -> Cell:
    """LRA* step for defender ``j`` that never disconnects the defenders in G_r.

    ``positions`` are the defender cells already committed this step and
    ``mask`` their bitmask, if the caller tracks it.
    """
    pos = positions[j]
    if mask is None:
        mask = g.mask_of(positions)
    rest = mask & ~(1 << grid.index(pos))

    def keeps_connected(cell):
        return g.mask_connected(rest | 1 << grid.index(cell))

    agent = defender(j)
    candidate = lra_next_move(grid, agent, pos, target, occupied, state)
    if candidate == pos:
        return pos
    if candidate not in occupied and keeps_connected(candidate):
        return candidate
    cutting = frozenset(
        grid.cell(k)
        for k in grid.neighbor_indices(grid.index(pos))
        if grid.cell(k) not in occupied and not keeps_connected(grid.cell(k))
    )
    return _replan(grid, agent, pos, target, occupied, state, cutting)


def defender_policy(
    instance: Instance,
    config: Configuration,
    assignments: dict[int, Cell],
    state: PlanState,
    g: VisibilityGraph | None = None,
) -> dict:
    """Moves for all defenders, decided one by one in index order.

    Each decision sees the cells already committed by lower-index defenders,
    so the resulting batch never needs downgrading. With ``g`` given, moves are
    connectivity-guarded.
    """
    grid = instance.grid
    occupied = config.occupied()
    positions = list(config.defenders)
    defender_cells = set(positions)
    mask = g.mask_of(positions) if g is not None else None
    moves = {}
    for j, pos in enumerate(positions):
        target = assignments.get(j)
        if target is None or pos == target:
            continue
        if target in defender_cells and abs(pos.x - target.x) + abs(pos.y - target.y) == 1:
            # another defender holds our target; wait next to it
            continue
        if g is None:
            nxt = lra_next_move(grid, defender(j), pos, target, occupied, state)
        else:
            nxt = defender_next_move_connected(grid, g, positions, j, target, occupied, state, mask)
        if nxt == pos:
            continue
        moves[defender(j)] = nxt
        occupied.discard(pos)
        occupied.add(nxt)
        defender_cells.discard(pos)
        defender_cells.add(nxt)
        positions[j] = nxt
        if mask is not None:
            mask = mask & ~(1 << grid.index(pos)) | 1 << grid.index(nxt)
    return moves
