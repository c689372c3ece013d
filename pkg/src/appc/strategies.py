"""Single-stage target allocation strategies for the defending team.

Strategy ids: ``rnd``, ``grd``, ``sim`` and their ``-c`` variants, which
reserve a fraction of the defenders as communicators that are placed to merge
visibility components of the occupiers' targets.
"""

from __future__ import annotations

import enum
import math
import random
from collections import Counter, deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .grid import Cell, GridMap
from .model import ConfigError, Instance
from .visibility import VisibilityGraph, visibility_graph

STRATEGIES = ("rnd", "grd", "sim", "rnd-c", "grd-c", "sim-c")


class Role(str, enum.Enum):
    OCCUPIER = "occupier"
    COMMUNICATOR = "communicator"


@dataclass
class Allocation:
    """Injective partial map defender index -> target cell, with roles."""

    assignments: dict[int, Cell] = field(default_factory=dict)
    roles: dict[int, Role] = field(default_factory=dict)

    def cells(self, role: Role | None = None) -> set[Cell]:
        return {
            c for d, c in self.assignments.items() if role is None or self.roles.get(d) is role
        }

    def is_injective(self) -> bool:
        return len(set(self.assignments.values())) == len(self.assignments)


def _row_major(cell: Cell) -> tuple[int, int]:
    return cell[1], cell[0]


def parse_strategy(strategy_id: str) -> tuple[str, bool]:
    sid = strategy_id.strip().lower()
    if sid not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy_id!r}; expected one of {', '.join(STRATEGIES)}")
    return sid.removesuffix("-c"), sid.endswith("-c")


def _closest(grid: GridMap, cell: Cell, candidates: Iterable[int], starts: Sequence[Cell]) -> int:
    # BFS-closest defender by start cell; ties and unreachable fall back to index order
    dist = grid.distance_array(grid.index(cell))

    def key(d):
        x = int(dist[grid.index(starts[d])])
        return (x if x >= 0 else math.inf, d)

    return min(candidates, key=key)


# -- random and greedy -------------------------------------------------------


def allocate_random(
    instance: Instance,
    seed,
    defenders: Iterable[int] | None = None,
    targets: Iterable[Cell] | None = None,
) -> dict[int, Cell]:
    """Uniform random injective matching of defenders to attacker targets.

    Surplus defenders stay unassigned; with fewer defenders than targets a
    uniform random subset of targets is covered.
    """
    rng = random.Random(seed)
    ds = sorted(range(instance.n_defenders) if defenders is None else defenders)
    ts = list(instance.targets if targets is None else targets)
    if len(ds) <= len(ts):
        return dict(zip(ds, rng.sample(ts, len(ds))))
    return dict(zip(rng.sample(ds, len(ts)), ts))


def allocate_greedy(
    instance: Instance,
    seed,
    defenders: Iterable[int] | None = None,
    targets: Iterable[Cell] | None = None,
) -> dict[int, Cell]:
    """Defenders in seeded random order each take their closest free target."""
    rng = random.Random(seed)
    grid = instance.grid
    order = sorted(range(instance.n_defenders) if defenders is None else defenders)
    rng.shuffle(order)
    remaining = list(instance.targets if targets is None else targets)
    out = {}
    for d in order:
        dist = grid.distance_array(grid.index(instance.defenders[d]))
        best = None
        for t in remaining:
            x = int(dist[grid.index(t)])
            if x >= 0 and (best is None or (x, t.y, t.x) < best[0]):
                best = ((x, t.y, t.x), t)
        if best is not None:
            out[d] = best[1]
            remaining.remove(best[1])
    return out


# -- bottleneck simulation ---------------------------------------------------


def simulate_frequencies(
    instance: Instance,
    forbidden: Iterable[Cell],
    rng: random.Random,
    draws: int = 1,
) -> dict[Cell, float]:
    """How many guessed attacker shortest paths pass through each cell.

    Each draw guesses a uniform random bijection between attackers and the
    known targets and routes every attacker around ``forbidden``. With several
    draws the counts are averaged.
    """
    grid = instance.grid
    forbidden = set(forbidden)
    blocked = grid.blocked_mask(forbidden)
    counts: Counter = Counter()
    for _ in range(draws):
        guess = rng.sample(instance.targets, len(instance.targets))
        for start, goal in zip(instance.attackers, guess):
            if goal in forbidden or start in forbidden:
                continue
            path = grid.index_path(grid.index(start), grid.index(goal), blocked)
            if path is not None:
                counts.update(path)
    scale = 1 if draws == 1 else draws
    return {grid.cell(i): (n if scale == 1 else n / scale) for i, n in counts.items()}


def local_sides(
    grid: GridMap,
    w: Cell,
    radius: int,
    attacker_cells: Iterable[Cell],
    target_cells: Iterable[Cell],
    forbidden: Iterable[Cell] = (),
) -> tuple[list[int], set[int], set[int]]:
    """Ball around ``w`` and its attacker-side / target-side terminal cells.

    The ball holds the free, non-forbidden cells within ``radius`` steps of
    ``w``. Rim cells (those with a way out of the ball) are compared by how
    their distances to the attackers and to the targets, travelling outside
    the ball, differ from the distances at ``w``: a rim cell is on the
    attacker side when it is relatively closer to the attackers, and on the
    target side when it is relatively closer to the targets. Attacker
    starts and targets inside the ball are terminals of their own side.
    Everything is returned as cell indices.
    """
    forbidden = set(forbidden)
    blocked = grid.blocked_mask(forbidden)
    dw = grid.multi_source_distances([w], blocked, max_depth=radius)
    ball = [int(i) for i in np.flatnonzero(dw >= 0)]
    in_ball = set(ball)
    attackers = [c for c in attacker_cells if c not in forbidden]
    targets = [c for c in target_cells if c not in forbidden]

    outside = blocked.copy()
    outside[(dw >= 0) & (dw < radius)] = 1
    rim = [
        i
        for i in ball
        if dw[i] == radius and any(blocked[j] == 0 and dw[j] < 0 for j in grid.neighbor_indices(i))
    ]
    sources: set[int] = set()
    sinks: set[int] = set()
    iw = grid.index(w)
    if rim and attackers and targets:
        da_w = grid.multi_source_distances(attackers, blocked)[iw]
        dt_w = grid.multi_source_distances(targets, blocked)[iw]
        outer_a = [c for c in attackers if not outside[grid.index(c)]]
        outer_t = [c for c in targets if not outside[grid.index(c)]]
        da = grid.multi_source_distances(outer_a, outside) if outer_a else None
        dt = grid.multi_source_distances(outer_t, outside) if outer_t else None
        if da_w >= 0 and dt_w >= 0:
            for i in rim:
                a = da[i] - da_w if da is not None and da[i] >= 0 else math.inf
                t = dt[i] - dt_w if dt is not None and dt[i] >= 0 else math.inf
                if a < t:
                    sources.add(i)
                elif t < a:
                    sinks.add(i)
    own_a = {grid.index(c) for c in attackers} & in_ball
    own_t = {grid.index(c) for c in targets} & in_ball
    sources = (sources - own_t) | own_a
    sinks = (sinks - own_a) | own_t
    return ball, sources, sinks


def _max_flow(grid: GridMap, ball: Sequence[int], sources, sinks, removed, limit: int) -> int:
    """Vertex-disjoint source-sink path count in the ball, capped at ``limit + 1``."""
    local = {cell: k for k, cell in enumerate(ball) if cell not in removed}
    n = 2 * len(ball) + 2
    s, t = n - 2, n - 1
    inf = limit + len(ball) + 2
    head: list[list[int]] = [[] for _ in range(n)]
    to: list[int] = []
    cap: list[int] = []

    def add(u, v, c):
        head[u].append(len(to))
        to.append(v)
        cap.append(c)
        head[v].append(len(to))
        to.append(u)
        cap.append(0)

    for cell, k in local.items():
        add(2 * k, 2 * k + 1, inf if cell in sources or cell in sinks else 1)
        for j in grid.neighbor_indices(cell):
            m = local.get(j)
            if m is not None:
                add(2 * k + 1, 2 * m, inf)
        if cell in sources:
            add(s, 2 * k, inf)
        if cell in sinks:
            add(2 * k + 1, t, inf)

    flow = 0
    while flow <= limit:
        prev = [-1] * n
        prev[s] = -2
        queue = deque([s])
        while queue and prev[t] == -1:
            u = queue.popleft()
            for e in head[u]:
                v = to[e]
                if cap[e] > 0 and prev[v] == -1:
                    prev[v] = e
                    queue.append(v)
        if prev[t] == -1:
            break
        # every augmenting path crosses at least one unit-capacity split edge
        v = t
        while v != s:
            e = prev[v]
            cap[e] -= 1
            cap[e ^ 1] += 1
            v = to[e ^ 1]
        flow += 1
    return flow


def min_vertex_cut(
    grid: GridMap,
    ball: Sequence[int],
    sources: set[int],
    sinks: set[int],
    limit: int,
    near: int | None = None,
) -> set[int] | None:
    """Minimum set of non-terminal ball cells separating sources from sinks.

    Max-flow on the vertex-split graph gives the cut size. Returns None when
    no finite cut exists or the minimum exceeds ``limit``; an empty set when
    the sides are already disconnected. Among several minimum cuts, cells
    with fewer free neighbours are preferred, then cells closer to ``near``,
    then row-major order: each candidate is kept when removing it lowers the
    flow by one.
    """
    if not sources or not sinks:
        return set()
    k = _max_flow(grid, ball, sources, sinks, (), limit)
    if k > limit:
        return None
    candidates = [i for i in ball if i not in sources and i not in sinks]
    dist = grid.distance_array(near) if near is not None else None
    # narrow cells (fewest free neighbours) first, then closeness to ``near``
    candidates.sort(
        key=lambda i: (len(grid.neighbor_indices(i)), dist[i] if dist is not None else 0, i)
    )
    cut: set[int] = set()
    for i in candidates:
        if k == 0:
            break
        if _max_flow(grid, ball, sources, sinks, cut | {i}, k) == k - 1:
            cut.add(i)
            k -= 1
    return cut


def explore_vicinity(
    grid: GridMap,
    w: Cell,
    radius: int,
    attacker_side: Iterable[Cell],
    target_side: Iterable[Cell],
    budget: int,
    forbidden: Iterable[Cell] = (),
) -> set[Cell]:
    """Bottleneck near ``w``: a local minimum vertex cut of size 1..budget, else empty."""
    ball, sources, sinks = local_sides(grid, w, radius, attacker_side, target_side, forbidden)
    cut = min_vertex_cut(grid, ball, sources, sinks, budget, grid.index(w))
    if not cut:
        return set()
    return {grid.cell(i) for i in cut}


def allocate_bottleneck_sim(
    instance: Instance,
    seed,
    defenders: Iterable[int] | None = None,
) -> dict[int, Cell]:
    grid = instance.grid
    available = sorted(range(instance.n_defenders) if defenders is None else defenders)
    starts = set(instance.attackers)
    targets = set(instance.targets)
    forbidden: set[Cell] = set()
    out: dict[int, Cell] = {}
    while available:
        # re-seeding repeats the same guess of attacker targets every round
        freq = simulate_frequencies(instance, forbidden, random.Random(seed), instance.sim_draws)
        if not freq:
            break
        w = max(freq, key=lambda c: (freq[c], -c.y, -c.x))
        cut = explore_vicinity(
            grid, w, instance.vicinity_radius, starts, targets, len(available), forbidden
        )
        if not cut:
            break
        for cell in sorted(cut, key=_row_major):
            d = _closest(grid, cell, available, instance.defenders)
            out[d] = cell
            available.remove(d)
        forbidden |= cut
    taken = set(out.values())
    out.update(
        allocate_random(
            instance,
            f"{seed}/leftover",
            available,
            [t for t in instance.targets if t not in taken],
        )
    )
    return out


# -- communicators -----------------------------------------------------------


def split_defenders(n_defenders: int, ratio: float) -> tuple[list[int], list[int]]:
    """(occupiers, communicators); the highest indices become communicators."""
    if not 0 <= ratio < 1:
        raise ConfigError(f"communicator ratio must be in [0, 1), got {ratio}")
    n_comm = math.floor(ratio * n_defenders + 1e-9)
    cut = n_defenders - n_comm
    return list(range(cut)), list(range(cut, n_defenders))


def best_relay(g: VisibilityGraph, components: Sequence[int], taken: int) -> tuple[Cell, list[int]] | None:
    """Free cell seeing the components of largest total size (at least two of them).

    ``components`` and ``taken`` are bitmasks; ties go to the first cell in
    row-major order. Returns the cell and the covered component masks.
    """
    masks = g.masks
    union = 0
    for c in components:
        union |= c
    reach = 0
    bits = union
    while bits:
        low = bits & -bits
        reach |= masks[low.bit_length() - 1]
        bits ^= low
    reach &= ~taken
    best = None
    best_score = -1
    while reach:
        low = reach & -reach
        reach ^= low
        seen = masks[low.bit_length() - 1]
        covered = [c for c in components if c & seen]
        if len(covered) < 2:
            continue
        score = sum(c.bit_count() for c in covered)
        if score > best_score:
            best_score = score
            best = (g.grid.cell(low.bit_length() - 1), covered)
    return best


def allocate_communicators(
    g: VisibilityGraph,
    occupier_targets: Iterable[Cell],
    communicators: Iterable[int],
    starts: Sequence[Cell],
) -> dict[int, Cell]:
    """Place communicators on relay cells that merge visibility components.

    ``starts`` are the defender start cells indexed by defender. Each round
    recomputes the components of the allocated cells; within a round a relay
    is placed greedily and the components it covers are set aside. Stops
    when communicators run out or no cell sees two components.
    """
    grid = g.grid
    taken = g.mask_of(occupier_targets)
    available = sorted(communicators)
    out: dict[int, Cell] = {}
    while available:
        components = g.component_masks(taken)
        placed = False
        while components and available:
            step = best_relay(g, components, taken)
            if step is None:
                break
            cell, covered = step
            d = _closest(grid, cell, available, starts)
            out[d] = cell
            available.remove(d)
            taken |= 1 << grid.index(cell)
            placed = True
            components = [c for c in components if c not in covered]
        if not placed:
            break
    return out


_BASE = {"rnd": allocate_random, "grd": allocate_greedy, "sim": allocate_bottleneck_sim}


def allocate(strategy_id: str, instance: Instance, seed) -> Allocation:
    """Initial target allocation for all defenders under one strategy."""
    base, with_comms = parse_strategy(strategy_id)
    if not with_comms:
        occupiers, comms = list(range(instance.n_defenders)), []
    else:
        occupiers, comms = split_defenders(instance.n_defenders, instance.communicator_ratio)
    assignments = _BASE[base](instance, seed, occupiers)
    roles = {d: Role.OCCUPIER for d in occupiers}
    roles.update({d: Role.COMMUNICATOR for d in comms})
    if comms:
        g = visibility_graph(instance.grid, instance.r)
        occupied_targets = set(assignments.values())
        if not g.mask_connected(g.mask_of(occupied_targets)):
            assignments.update(
                allocate_communicators(g, occupied_targets, comms, instance.defenders)
            )
    return Allocation(assignments, roles)
