"""Trace files and post-hoc invariant checks.

A trace holds one configuration per line as comma-separated ``team:index:x:y``
records. Optional ``# key: value`` lines at the top carry the map path, the
visibility range, the strategy and the attacker targets so that a trace can
be checked on its own.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .engine import validate_moves
from .grid import Cell, GridMap
from .model import AgentId, Configuration, attacker, defender
from .strategies import parse_strategy
from .visibility import is_connected, visibility_graph


@dataclass
class Trace:
    configs: list[Configuration]
    meta: dict[str, str] = field(default_factory=dict)

    def targets(self) -> list[Cell] | None:
        raw = self.meta.get("targets")
        if raw is None:
            return None
        return [Cell(*map(int, rec.split(":"))) for rec in raw.split(",") if rec]


@dataclass(frozen=True)
class Issue:
    """One invariant failure; ``t`` is the step whose configuration or transition failed."""

    t: int
    kind: str
    detail: str

    def __str__(self):
        return f"t={self.t} {self.kind}: {self.detail}"


def format_trace(configs: Iterable[Configuration], meta: dict[str, object] | None = None) -> str:
    lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
    lines += [c.to_line() for c in configs]
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> Trace:
    meta: dict[str, str] = {}
    configs = []
    for n, line in enumerate(text.splitlines(), 1):
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        if not line.strip():
            continue
        try:
            configs.append(Configuration.from_line(line))
        except ValueError as exc:
            raise ValueError(f"trace line {n}: {exc}") from None
    return Trace(configs, meta)


def write_trace(path, configs: Iterable[Configuration], meta: dict[str, object] | None = None) -> None:
    Path(path).write_text(format_trace(configs, meta))


def read_trace(path) -> Trace:
    return parse_trace(Path(path).read_text())


def targets_meta(targets: Sequence[Cell]) -> str:
    return ",".join(f"{c.x}:{c.y}" for c in targets)


def _diff(before: Configuration, after: Configuration, agents: list[AgentId]) -> dict[AgentId, Cell]:
    return {a: after[a] for a in agents if after[a] != before[a]}


def check_trace(
    configs: Sequence[Configuration],
    grid: GridMap | None = None,
    r: int | None = None,
    guarded: bool = False,
    targets: Sequence[Cell] | None = None,
) -> list[Issue]:
    """Every invariant failure in a trace; empty means the trace is clean.

    Each transition is split into the attackers' half-step (seen against
    alpha_t) and the defenders' half-step (seen against the configuration
    after the attackers moved), and both are validated against the movement
    rules. With ``grid`` the cells must be free; with ``grid``, ``r`` and
    ``guarded`` the defenders must stay connected in G_r; with ``targets``
    captured attackers must never leave their targets.
    """
    issues = []
    if not configs:
        return issues
    shape = (len(configs[0].attackers), len(configs[0].defenders))
    atts = [attacker(i) for i in range(shape[0])]
    defs = [defender(j) for j in range(shape[1])]
    g = visibility_graph(grid, r) if guarded and grid is not None and r is not None else None
    captured: set[int] = set()
    for t, cfg in enumerate(configs):
        if (len(cfg.attackers), len(cfg.defenders)) != shape:
            issues.append(Issue(t, "shape", "agent counts change during the trace"))
            return issues
        if not cfg.is_injective():
            issues.append(Issue(t, "injectivity", "two agents share a cell"))
        if grid is not None:
            for a, c in cfg.placement().items():
                if not grid.is_free(c):
                    issues.append(Issue(t, "blocked_cell", f"{a} on {tuple(c)}"))
        if g is not None and not is_connected(g, cfg.defenders):
            issues.append(Issue(t, "connectivity", "defenders are disconnected in G_r"))
        if targets is not None:
            for i in sorted(captured):
                if cfg.attackers[i] != targets[i]:
                    issues.append(Issue(t, "capture", f"a{i} left its target"))
            captured.update(i for i, c in enumerate(cfg.attackers) if c == targets[i])
        if t == 0:
            continue
        prev = configs[t - 1]
        mid = Configuration(cfg.attackers, prev.defenders)
        for before, after, agents in ((prev, mid, atts), (mid, cfg, defs)):
            for v in validate_moves(before, _diff(before, after, agents), grid):
                issues.append(Issue(t, v.rule, ", ".join(str(a) for a in v.agents)))
    return issues


def check_trace_file(path, grid: GridMap | None = None, r: int | None = None) -> list[Issue]:
    """Check a trace file, taking map, range, strategy and targets from its header."""
    path = Path(path)
    trace = read_trace(path)
    meta = trace.meta
    if grid is None and "map" in meta:
        grid = GridMap.load(path.parent / meta["map"])
    if r is None and "r" in meta:
        r = int(meta["r"])
    guarded = "strategy" in meta and parse_strategy(meta["strategy"])[1]
    return check_trace(trace.configs, grid, r, guarded, trace.targets())
