"""Game loop: move validation, conflict resolution, capture and metrics.

Each time step applies the attackers' moves as one simultaneous batch and
then the defenders' moves as a second batch that sees the attackers' new
cells.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

from .grid import Cell, GridMap
from .model import AgentId, Configuration, Instance, Team
from .pathfinding import PlanState, attacker_policy, defender_policy
from .strategies import Allocation, allocate, parse_strategy
from .visibility import visibility_graph

log = logging.getLogger(__name__)

SWAP = "swap"
SAME_DESTINATION = "same_destination"
OCCUPIED = "occupied"
NOT_ADJACENT = "not_adjacent"
BLOCKED_CELL = "blocked_cell"


@dataclass(frozen=True)
class Violation:
    rule: str
    agents: tuple[AgentId, ...]

    def __str__(self):
        return f"{self.rule}: {', '.join(str(a) for a in self.agents)}"


def validate_moves(
    current: Configuration,
    moves: Mapping[AgentId, Cell],
    grid: GridMap | None = None,
) -> list[Violation]:
    """Check one simultaneous batch against the movement rules.

    Agents absent from ``moves`` (or mapped to their own cell) wait. An empty
    list means the batch is legal. Rotations of three or more agents are legal.
    """
    out = []
    movers = {}
    for agent, dest in moves.items():
        src = current[agent]
        if dest == src:
            continue
        if abs(dest[0] - src[0]) + abs(dest[1] - src[1]) != 1:
            out.append(Violation(NOT_ADJACENT, (agent,)))
        elif grid is not None and not grid.is_free(dest):
            out.append(Violation(BLOCKED_CELL, (agent,)))
        movers[agent] = dest

    owner = {cell: agent for agent, cell in current.placement().items()}
    by_dest: dict[Cell, list[AgentId]] = {}
    for agent, dest in movers.items():
        by_dest.setdefault(dest, []).append(agent)
    for dest, agents in by_dest.items():
        if len(agents) > 1:
            out.append(Violation(SAME_DESTINATION, tuple(sorted(agents))))
    for agent, dest in sorted(movers.items()):
        other = owner.get(dest)
        if other is None:
            continue
        if other not in movers:
            out.append(Violation(OCCUPIED, (agent, other)))
        elif movers[other] == current[agent] and agent < other:
            out.append(Violation(SWAP, (agent, other)))
    return out


def resolve_batch(
    current: Configuration,
    moves: Mapping[AgentId, Cell],
    grid: GridMap | None = None,
) -> dict[AgentId, Cell]:
    """Largest legal sub-batch, downgrading conflicting agents to wait in index order.

    Each pass walks agents in index order: a move into a waiting agent's cell,
    into a cell already claimed this pass, or swapping with a lower-index
    agent is dropped. Passes repeat until nothing changes.
    """
    proposed = {}
    for agent, dest in moves.items():
        src = current[agent]
        if dest == src:
            continue
        if abs(dest[0] - src[0]) + abs(dest[1] - src[1]) != 1:
            continue
        if grid is not None and not grid.is_free(dest):
            continue
        proposed[agent] = dest
    owner = {cell: agent for agent, cell in current.placement().items()}
    changed = True
    while changed:
        changed = False
        claimed: dict[Cell, AgentId] = {}
        for agent in sorted(proposed):
            dest = proposed[agent]
            other = owner.get(dest)
            stays = other is not None and other not in proposed
            swaps = (
                other is not None
                and other < agent
                and proposed.get(other) == current[agent]
            )
            if stays or dest in claimed or swaps:
                del proposed[agent]
                changed = True
                continue
            claimed[dest] = agent
    return proposed


def step(
    instance: Instance,
    current: Configuration,
    attacker_moves: Mapping[AgentId, Cell],
    defender_moves: Mapping[AgentId, Cell] | Callable[[Configuration], Mapping[AgentId, Cell]],
) -> Configuration:
    """Advance one time step: attackers' batch, then defenders' batch.

    ``defender_moves`` may be a callable receiving the post-attacker
    configuration. Illegal moves are downgraded to waits; attackers already on
    their targets never move.
    """
    grid = instance.grid
    attacker_moves = {
        a: c
        for a, c in attacker_moves.items()
        if a.team is Team.ATTACKER and current[a] != instance.targets[a.index]
    }
    committed = resolve_batch(current, attacker_moves, grid)
    mid = current.moved(committed)
    if callable(defender_moves):
        defender_moves = defender_moves(mid)
    defender_moves = {a: c for a, c in defender_moves.items() if a.team is Team.DEFENDER}
    committed = resolve_batch(mid, defender_moves, grid)
    return mid.moved(committed)


@dataclass(frozen=True)
class Metrics:
    targets_saved: int
    targets_saved_within_limit: int
    sum_attacker_target_distance: int
    time_at_captured_targets: int


@dataclass
class EpisodeResult:
    trace: list[Configuration]
    captured: dict[int, int]  # attacker index -> capture time
    allocation: Allocation
    strategy: str
    seed: object
    replans: int = 0
    metrics: Metrics | None = field(default=None)

    @property
    def n_captured(self) -> int:
        return len(self.captured)


def compute_metrics(instance: Instance, result: EpisodeResult) -> Metrics:
    grid = instance.grid
    final = result.trace[-1]
    horizon = instance.horizon
    n = instance.n_attackers
    saved = n - len(result.captured)
    saved_in_limit = n - sum(1 for t in result.captured.values() if t <= horizon)
    unreachable = grid.width + grid.height
    distance = 0
    for pos, target in zip(final.attackers, instance.targets):
        d = grid.distance(pos, target)
        distance += unreachable if d is None else d
    at_targets = sum(instance.step_limit - t for t in result.captured.values())
    return Metrics(saved, saved_in_limit, distance, at_targets)


def run_episode(instance: Instance, strategy: str, seed) -> EpisodeResult:
    """Play one episode; a deterministic function of (instance, strategy, seed).

    Stops after ``step_limit`` steps, once every attacker is on its target, or
    after two consecutive steps in which nobody moved.
    """
    _, guarded = parse_strategy(strategy)
    allocation = allocate(strategy, instance, seed)
    g = visibility_graph(instance.grid, instance.r) if guarded else None
    state = PlanState()
    config = instance.start
    trace = [config]
    captured = {i: 0 for i, (p, t) in enumerate(zip(config.attackers, instance.targets)) if p == t}
    idle = 0
    for t in range(instance.step_limit):
        if len(captured) == instance.n_attackers or idle >= 2:
            break
        att_moves = attacker_policy(instance, config, state, captured)

        def defenders_move(mid):
            return defender_policy(instance, mid, allocation.assignments, state, g)

        nxt = step(instance, config, att_moves, defenders_move)
        for i, (p, goal) in enumerate(zip(nxt.attackers, instance.targets)):
            if p == goal and i not in captured:
                captured[i] = t + 1
        idle = idle + 1 if nxt == config else 0
        config = nxt
        trace.append(config)
    result = EpisodeResult(trace, captured, allocation, strategy, seed, state.replans)
    result.metrics = compute_metrics(instance, result)
    log.debug(
        "episode %s seed=%s: %d steps, %d captured, %d replans",
        strategy, seed, len(trace) - 1, len(captured), state.replans,
    )
    return result

