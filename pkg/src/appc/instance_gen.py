"""Seeded benchmark instances: map families, spawn rectangles and instance files.

The three map families stand in for the evaluation maps, which exist only as
pictures:

* ``orthogonal-rooms`` - rectangular rooms joined by 1-2 cell doors, with a
  tall protected hall on the right reachable through three doors.
* ``ruins`` - open ground littered with short wall fragments.
* ``waterfront`` - a long two-cell barrier with a few bridges, debris on the
  near shore.

Every family uses the same layout: attackers spawn on the left, defenders in
the middle band and targets on the right.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from pathlib import Path

from .grid import Cell, GridMap
from .model import ConfigError, Instance
from .visibility import visibility_graph

FAMILIES = ("orthogonal-rooms", "ruins", "waterfront")


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class Rect:
    """Inclusive cell rectangle."""

    x0: int
    y0: int
    x1: int
    y1: int

    def cells(self, grid: GridMap) -> list[Cell]:
        """Free cells inside the rectangle, row-major."""
        return [
            Cell(x, y)
            for y in range(self.y0, self.y1 + 1)
            for x in range(self.x0, self.x1 + 1)
            if grid.is_free((x, y))
        ]

    def within(self, grid: GridMap) -> bool:
        return 0 <= self.x0 <= self.x1 < grid.width and 0 <= self.y0 <= self.y1 < grid.height

    def overlaps(self, other: Rect) -> bool:
        return not (
            self.x1 < other.x0 or other.x1 < self.x0 or self.y1 < other.y0 or other.y1 < self.y0
        )


def parse_ratio(text: str) -> tuple[int, int]:
    """``"d:a"`` -> (defenders, attackers)."""
    try:
        d, a = (int(p) for p in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad ratio {text!r}; expected 'd:a' such as '1:2'") from exc
    if d < 0 or a <= 0:
        raise ConfigError(f"bad ratio {text!r}")
    return d, a


def format_ratio(ratio: tuple[int, int]) -> str:
    return f"{ratio[0]}:{ratio[1]}"


@dataclass(frozen=True)
class SpawnSpec:
    attacker_rect: Rect
    defender_rect: Rect
    target_rect: Rect
    n_attackers: int = 50
    ratio: tuple[int, int] = (1, 1)
    seed: int = 0

    @property
    def n_defenders(self) -> int:
        d, a = self.ratio
        return round(self.n_attackers * d / a)

    def check(self, grid: GridMap) -> None:
        for name in ("attacker_rect", "defender_rect", "target_rect"):
            if not getattr(self, name).within(grid):
                raise GenerationError(f"{name} {getattr(self, name)} lies outside the map")
        if self.attacker_rect.overlaps(self.defender_rect):
            raise GenerationError("attacker and defender rectangles overlap")


def default_spawn(width: int, height: int) -> tuple[Rect, Rect, Rect]:
    """(attacker, defender, target) rectangles for a map of the given size."""
    y0, y1 = 1, height - 2
    return (
        Rect(1, y0, max(1, width // 5), y1),
        Rect(round(width * 0.35), y0, round(width * 0.62), y1),
        Rect(round(width * 0.78), y0, width - 2, y1),
    )


def spawn_spec(grid: GridMap, n_attackers: int = 50, ratio=(1, 1), seed: int = 0) -> SpawnSpec:
    a, d, t = default_spawn(grid.width, grid.height)
    return SpawnSpec(a, d, t, n_attackers, tuple(ratio), seed)


def _connected_sample(g, cells: list[Cell], k: int, rng: random.Random) -> list[Cell]:
    # grow a random team one visible cell at a time so it starts connected in G_r
    if k == 0:
        return []
    if len(cells) < k:
        raise GenerationError(f"defender rectangle has {len(cells)} usable cells, need {k}")
    allowed = g.mask_of(cells)
    first = rng.choice(cells)
    chosen = [first]
    taken = g.mask_of([first])
    frontier = g.masks[g.grid.index(first)] & allowed
    while len(chosen) < k:
        frontier &= ~taken
        if not frontier:
            raise GenerationError(
                f"defender rectangle cannot hold {k} defenders connected at range {g.r}"
            )
        cell = rng.choice(g.cells_of(frontier))
        chosen.append(cell)
        taken |= 1 << g.grid.index(cell)
        frontier |= g.masks[g.grid.index(cell)] & allowed
    return chosen


def generate_instance(
    grid: GridMap,
    spec: SpawnSpec,
    *,
    r: int = 5,
    step_limit: int = 150,
    communicator_ratio: float = 0.0,
    sim_draws: int = 1,
    vicinity_radius: int = 4,
) -> Instance:
    """Place attackers, targets and a G_r-connected defender team; seeded.

    Targets never coincide with start cells. Attacker ``i`` is paired with
    target ``i`` of a shuffled target list.
    """
    spec.check(grid)
    rng = random.Random(spec.seed)
    n = spec.n_attackers
    att_cells = spec.attacker_rect.cells(grid)
    if len(att_cells) < n:
        raise GenerationError(f"attacker rectangle has {len(att_cells)} free cells, need {n}")
    attackers = rng.sample(att_cells, n)
    used = set(attackers)
    tgt_cells = [c for c in spec.target_rect.cells(grid) if c not in used]
    if len(tgt_cells) < n:
        raise GenerationError(f"target rectangle has {len(tgt_cells)} usable cells, need {n}")
    targets = rng.sample(tgt_cells, n)
    rng.shuffle(targets)
    used.update(targets)
    def_cells = [c for c in spec.defender_rect.cells(grid) if c not in used]
    defenders = _connected_sample(visibility_graph(grid, r), def_cells, spec.n_defenders, rng)
    return Instance(
        grid,
        tuple(attackers),
        tuple(defenders),
        tuple(targets),
        r=r,
        step_limit=step_limit,
        communicator_ratio=communicator_ratio,
        sim_draws=sim_draws,
        vicinity_radius=vicinity_radius,
    )


# -- map families ------------------------------------------------------------


def _fill_pockets(width: int, height: int, obstacles: set[Cell]) -> set[Cell]:
    """Turn every free cell outside the largest free component into an obstacle."""
    grid = GridMap(width, height, obstacles)
    seen: set[Cell] = set()
    best: set[Cell] = set()
    for c in grid.free_cells():
        if c in seen:
            continue
        comp = set(grid.cell(int(i)) for i, d in enumerate(grid.distance_array(grid.index(c))) if d >= 0)
        seen |= comp
        if len(comp) > len(best):
            best = comp
    return {Cell(x, y) for y in range(height) for x in range(width)} - best


def _door(rng: random.Random, lo: int, hi: int) -> range:
    width = rng.choice((1, 2))
    start = rng.randint(lo + 1, hi - width)
    return range(start, start + width)


def orthogonal_rooms(width: int = 40, height: int = 40, seed: int = 0) -> GridMap:
    rng = random.Random(f"orthogonal-rooms/{seed}")
    xs = (width // 3, 2 * width // 3)
    ys = (height // 3, 2 * height // 3)
    walls: set[Cell] = set()
    for x in xs:
        walls.update(Cell(x, y) for y in range(height))
    for y in ys:
        walls.update(Cell(x, y) for x in range(xs[1]))
    # one door per wall segment between junctions
    bounds_y = (-1, *ys, height)
    for x in xs:
        for lo, hi in zip(bounds_y, bounds_y[1:]):
            for y in _door(rng, lo, hi):
                walls.discard(Cell(x, y))
    bounds_x = (-1, *xs)
    for y in ys:
        for lo, hi in zip(bounds_x, bounds_x[1:]):
            for x in _door(rng, lo, hi):
                walls.discard(Cell(x, y))
    return GridMap(width, height, _fill_pockets(width, height, walls))


def ruins(width: int = 40, height: int = 40, seed: int = 0, fragments: int | None = None) -> GridMap:
    rng = random.Random(f"ruins/{seed}")
    fragments = fragments if fragments is not None else width * height // 22
    walls: set[Cell] = set()
    for _ in range(fragments):
        length = rng.randint(2, 5)
        x, y = rng.randrange(width), rng.randrange(height)
        dx, dy = rng.choice(((1, 0), (0, 1)))
        for k in range(length):
            cx, cy = x + k * dx, y + k * dy
            if cx < width and cy < height:
                walls.add(Cell(cx, cy))
    return GridMap(width, height, _fill_pockets(width, height, walls))


def waterfront(width: int = 40, height: int = 40, seed: int = 0, bridges: int = 3) -> GridMap:
    rng = random.Random(f"waterfront/{seed}")
    shore = round(width * 0.68)
    walls = {Cell(x, y) for x in (shore, shore + 1) for y in range(height)}
    band = height // bridges
    for b in range(bridges):
        span = rng.choice((2, 3))
        y0 = rng.randint(b * band + 1, (b + 1) * band - span - 1)
        for y in range(y0, y0 + span):
            walls.discard(Cell(shore, y))
            walls.discard(Cell(shore + 1, y))
    for _ in range(width * height // 60):
        x, y = rng.randrange(width // 5 + 2, shore - 1), rng.randrange(height)
        walls.add(Cell(x, y))
        if rng.random() < 0.5:
            walls.add(Cell(x, min(height - 1, y + 1)))
    return GridMap(width, height, _fill_pockets(width, height, walls))


_BUILDERS = {"orthogonal-rooms": orthogonal_rooms, "ruins": ruins, "waterfront": waterfront}


def generate_map(family: str, width: int = 40, height: int = 40, seed: int = 0) -> GridMap:
    try:
        build = _BUILDERS[family]
    except KeyError:
        raise ConfigError(f"unknown map family {family!r}; expected one of {', '.join(FAMILIES)}")
    return build(width, height, seed)


# -- instance files ----------------------------------------------------------

_PARAM_TYPES = {
    "r": int,
    "step_limit": int,
    "communicator_ratio": float,
    "sim_draws": int,
    "vicinity_radius": int,
    "time_limit": int,
}


def format_instance(instance: Instance, map_ref: str) -> str:
    lines = ["[map]", map_ref, "[params]"]
    lines.append(f"r = {instance.r}")
    lines.append(f"step_limit = {instance.step_limit}")
    lines.append(f"communicator_ratio = {instance.communicator_ratio!r}")
    lines.append(f"sim_draws = {instance.sim_draws}")
    if instance.vicinity_radius != 4:
        lines.append(f"vicinity_radius = {instance.vicinity_radius}")
    if instance.time_limit is not None:
        lines.append(f"time_limit = {instance.time_limit}")
    for name, cells in (
        ("attackers", instance.attackers),
        ("defenders", instance.defenders),
        ("targets", instance.targets),
    ):
        lines.append(f"[{name}]")
        lines.extend(f"{c.x} {c.y}" for c in cells)
    return "\n".join(lines) + "\n"


def parse_instance(text: str, base_dir=".") -> Instance:
    sections: dict[str, list[str]] = {}
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current in sections:
                raise ConfigError(f"line {n}: duplicate section [{current}]")
            sections[current] = []
        elif current is None:
            raise ConfigError(f"line {n}: content before the first section")
        else:
            sections[current].append(line)
    for name in ("map", "attackers", "defenders", "targets"):
        if name not in sections:
            raise ConfigError(f"instance file lacks a [{name}] section")
    if len(sections["map"]) != 1:
        raise ConfigError("[map] must hold exactly one path")
    grid = GridMap.load(Path(base_dir) / sections["map"][0])

    params = {}
    for line in sections.get("params", []):
        key, sep, value = (p.strip() for p in line.partition("="))
        if not sep or key not in _PARAM_TYPES:
            raise ConfigError(f"bad [params] entry {line!r}")
        params[key] = _PARAM_TYPES[key](value)

    def cells(name):
        out = []
        for line in sections[name]:
            parts = line.split()
            if len(parts) != 2:
                raise ConfigError(f"[{name}] entry {line!r} is not an 'x y' pair")
            out.append(Cell(int(parts[0]), int(parts[1])))
        return tuple(out)

    return Instance(grid, cells("attackers"), cells("defenders"), cells("targets"), **params)


def save_instance(instance: Instance, path, map_path) -> None:
    path = Path(path)
    ref = os.path.relpath(Path(map_path).resolve(), path.resolve().parent)
    path.write_text(format_instance(instance, Path(ref).as_posix()))


def load_instance(path) -> Instance:
    path = Path(path)
    return parse_instance(path.read_text(), path.parent)
