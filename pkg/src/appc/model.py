"""Agents, configurations and problem instances."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

from .grid import Cell, GridMap


class ConfigError(ValueError):
    """Invalid strategy id, parameter or configuration file."""


class Team(str, enum.Enum):
    ATTACKER = "a"
    DEFENDER = "d"


class AgentId(NamedTuple):
    team: Team
    index: int

    def __str__(self):
        return f"{self.team.value}{self.index}"


def attacker(i: int) -> AgentId:
    return AgentId(Team.ATTACKER, i)


def defender(i: int) -> AgentId:
    return AgentId(Team.DEFENDER, i)


@dataclass(frozen=True)
class Configuration:
    """Placement of every agent at one time step; attacker and defender cells by index."""

    attackers: tuple[Cell, ...]
    defenders: tuple[Cell, ...]

    def __getitem__(self, agent: AgentId) -> Cell:
        if agent.team is Team.ATTACKER:
            return self.attackers[agent.index]
        return self.defenders[agent.index]

    def agents(self) -> list[AgentId]:
        return [attacker(i) for i in range(len(self.attackers))] + [
            defender(i) for i in range(len(self.defenders))
        ]

    def placement(self) -> dict[AgentId, Cell]:
        return {a: self[a] for a in self.agents()}

    def occupied(self) -> set[Cell]:
        return set(self.attackers) | set(self.defenders)

    def is_injective(self) -> bool:
        n = len(self.attackers) + len(self.defenders)
        return len(self.occupied()) == n

    def moved(self, moves: dict[AgentId, Cell]) -> Configuration:
        att = list(self.attackers)
        dfd = list(self.defenders)
        for agent, cell in moves.items():
            if agent.team is Team.ATTACKER:
                att[agent.index] = cell
            else:
                dfd[agent.index] = cell
        return Configuration(tuple(att), tuple(dfd))

    def to_line(self) -> str:
        """Trace record: comma-separated ``team:index:x:y`` entries."""
        parts = [f"a:{i}:{c.x}:{c.y}" for i, c in enumerate(self.attackers)]
        parts += [f"d:{i}:{c.x}:{c.y}" for i, c in enumerate(self.defenders)]
        return ",".join(parts)

    @classmethod
    def from_line(cls, line: str) -> Configuration:
        att: dict[int, Cell] = {}
        dfd: dict[int, Cell] = {}
        line = line.strip()
        for rec in line.split(",") if line else []:
            team, idx, x, y = rec.split(":")
            target = att if team == "a" else dfd if team == "d" else None
            if target is None:
                raise ValueError(f"unknown team {team!r} in trace record {rec!r}")
            target[int(idx)] = Cell(int(x), int(y))
        if sorted(att) != list(range(len(att))) or sorted(dfd) != list(range(len(dfd))):
            raise ValueError("trace line has non-contiguous agent indices")
        return cls(
            tuple(att[i] for i in range(len(att))),
            tuple(dfd[i] for i in range(len(dfd))),
        )


@dataclass(frozen=True)
class Instance:
    """One APPC instance plus the episode parameters used to play it.

    ``targets[i]`` is the fixed target of attacker ``i``. ``time_limit`` is the
    horizon for the "saved within limit" objective and defaults to
    ``step_limit``.
    """

    grid: GridMap
    attackers: tuple[Cell, ...]
    defenders: tuple[Cell, ...]
    targets: tuple[Cell, ...]
    r: int = 5
    step_limit: int = 150
    communicator_ratio: float = 0.0
    sim_draws: int = 1
    vicinity_radius: int = 4
    time_limit: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "attackers", tuple(Cell(*c) for c in self.attackers))
        object.__setattr__(self, "defenders", tuple(Cell(*c) for c in self.defenders))
        object.__setattr__(self, "targets", tuple(Cell(*c) for c in self.targets))
        if len(self.targets) != len(self.attackers):
            raise ValueError(
                f"{len(self.attackers)} attackers but {len(self.targets)} targets"
            )
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("attacker targets must be distinct")
        for c in self.attackers + self.defenders + self.targets:
            self.grid.require_free(c)
        if not self.start.is_injective():
            raise ValueError("two agents share a start cell")
        if not 0 <= self.communicator_ratio < 1:
            raise ValueError(f"communicator_ratio must be in [0, 1), got {self.communicator_ratio}")
        if self.r < 1 or self.step_limit < 0 or self.sim_draws < 1 or self.vicinity_radius < 1:
            raise ValueError("r, sim_draws and vicinity_radius must be >= 1, step_limit >= 0")

    @property
    def start(self) -> Configuration:
        return Configuration(self.attackers, self.defenders)

    @property
    def n_attackers(self) -> int:
        return len(self.attackers)

    @property
    def n_defenders(self) -> int:
        return len(self.defenders)

    @property
    def horizon(self) -> int:
        return self.step_limit if self.time_limit is None else self.time_limit
