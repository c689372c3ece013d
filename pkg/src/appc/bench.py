"""Benchmark harness: run every (map, ratio, strategy, seed) episode and tabulate.

Seeds are derived per tuple with a stable hash, so results depend only on the
config and never on the worker count or execution order.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .engine import run_episode
from .grid import GridMap
from .instance_gen import (
    FAMILIES,
    format_ratio,
    generate_instance,
    generate_map,
    parse_ratio,
    spawn_spec,
)
from .model import ConfigError
from .replay import targets_meta, write_trace
from .strategies import STRATEGIES, parse_strategy

log = logging.getLogger(__name__)


class BenchmarkError(RuntimeError):
    """An episode failed; the message names the (map, ratio, strategy, seed) tuple."""


@dataclass(frozen=True)
class BenchmarkConfig:
    maps: tuple[str, ...] = FAMILIES
    ratios: tuple[tuple[int, int], ...] = ((1, 1), (1, 2), (1, 5))
    strategies: tuple[str, ...] = STRATEGIES
    seeds: int = 10
    attackers: int = 50
    r: int = 5
    step_limit: int = 150
    communicator_ratio: float = 0.2
    sim_draws: int = 1
    map_seed: int = 0
    seed: int = 0
    base_dir: str = "."

    def __post_init__(self):
        if self.seeds < 1:
            raise ConfigError(f"seeds must be >= 1, got {self.seeds}")
        if self.attackers < 1:
            raise ConfigError(f"attackers must be >= 1, got {self.attackers}")
        if not self.maps:
            raise ConfigError("at least one map is required")
        for s in self.strategies:
            parse_strategy(s)
        object.__setattr__(
            self, "strategies", tuple(s.strip().lower() for s in self.strategies)
        )
        if not 0 <= self.communicator_ratio < 1:
            raise ConfigError(f"communicator_ratio must be in [0, 1), got {self.communicator_ratio}")
        if self.r < 1 or self.step_limit < 0 or self.sim_draws < 1:
            raise ConfigError("r and sim_draws must be >= 1 and step_limit >= 0")

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> BenchmarkConfig:
        known = set(cls.__dataclass_fields__) - {"base_dir"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kw = dict(data)
        try:
            if "maps" in kw:
                kw["maps"] = tuple(str(m) for m in kw["maps"])
            if "ratios" in kw:
                kw["ratios"] = tuple(
                    parse_ratio(x) if isinstance(x, str) else tuple(x) for x in kw["ratios"]
                )
            if "strategies" in kw:
                kw["strategies"] = tuple(kw["strategies"])
            for key in ("seeds", "attackers", "r", "step_limit", "sim_draws", "map_seed", "seed"):
                if key in kw and not isinstance(kw[key], int):
                    raise ConfigError(f"{key} must be an integer")
            return cls(**kw, base_dir=str(base_dir))
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> BenchmarkConfig:
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        return cls.from_dict(data, path.parent)


def stable_seed(*parts) -> int:
    """64-bit seed from sha256 of the '|'-joined parts; stable across runs and platforms."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def map_label(spec: str) -> str:
    return spec if spec in FAMILIES else Path(spec).stem


@lru_cache(maxsize=16)
def load_map(spec: str, map_seed: int = 0, base_dir: str = ".") -> GridMap:
    """A map family name or a path to an ASCII map file."""
    if spec in FAMILIES:
        return generate_map(spec, seed=map_seed)
    path = Path(base_dir) / spec
    if not path.exists():
        raise ConfigError(f"map {spec!r} is neither a family ({', '.join(FAMILIES)}) nor a file")
    return GridMap.load(path)


@dataclass
class ResultTable:
    """Captured-attacker counts keyed by (map, ratio, strategy), one value per seed."""

    maps: list[str] = field(default_factory=list)
    ratios: list[tuple[int, int]] = field(default_factory=list)
    strategies: list[str] = field(default_factory=list)
    values: dict[tuple[str, tuple[int, int], str], list[int]] = field(default_factory=dict)

    def mean(self, m, ratio, strategy) -> float:
        return statistics.fmean(self.values[m, ratio, strategy])

    def stddev(self, m, ratio, strategy) -> float:
        v = self.values[m, ratio, strategy]
        return statistics.stdev(v) if len(v) > 1 else 0.0

    def rows(self):
        for m in self.maps:
            for ratio in self.ratios:
                for s in self.strategies:
                    if (m, ratio, s) in self.values:
                        yield m, ratio, s


def _episode_batch(job):
    """All strategies on one generated instance; runs inside a worker process."""
    spec, map_seed, base_dir, ratio, i, cfg, trace_dir = job
    label = map_label(spec)
    grid = load_map(spec, map_seed, base_dir)
    inst_seed = stable_seed(cfg.seed, label, format_ratio(ratio), i)
    try:
        inst = generate_instance(
            grid,
            spawn_spec(grid, cfg.attackers, ratio, inst_seed),
            r=cfg.r,
            step_limit=cfg.step_limit,
            communicator_ratio=cfg.communicator_ratio,
            sim_draws=cfg.sim_draws,
        )
    except Exception as exc:
        raise BenchmarkError(f"instance ({label}, {format_ratio(ratio)}, seed {i}): {exc}") from exc
    out = []
    for s in cfg.strategies:
        seed = stable_seed(cfg.seed, label, format_ratio(ratio), s, i)
        try:
            res = run_episode(inst, s, seed)
        except Exception as exc:
            raise BenchmarkError(
                f"episode ({label}, {format_ratio(ratio)}, {s}, seed {i}): {exc}"
            ) from exc
        if trace_dir is not None:
            name = f"{label}_{ratio[0]}-{ratio[1]}_{s}_{i}.txt"
            meta = {
                "map": f"{label}.map",
                "r": cfg.r,
                "strategy": s,
                "seed": seed,
                "targets": targets_meta(inst.targets),
            }
            write_trace(Path(trace_dir) / name, res.trace, meta)
        out.append((label, ratio, s, i, res.n_captured))
    return out


def run_benchmark(config: BenchmarkConfig, workers: int = 1, trace_dir=None) -> ResultTable:
    """Play every episode of the protocol; ``workers`` > 1 uses a process pool."""
    labels = [map_label(m) for m in config.maps]
    if len(set(labels)) != len(labels):
        raise ConfigError("map names must be distinct")
    for m in config.maps:
        grid = load_map(m, config.map_seed, config.base_dir)
        if trace_dir is not None:
            Path(trace_dir).mkdir(parents=True, exist_ok=True)
            grid.save(Path(trace_dir) / f"{map_label(m)}.map")
    jobs = [
        (m, config.map_seed, config.base_dir, ratio, i, config, trace_dir)
        for m in config.maps
        for ratio in config.ratios
        for i in range(config.seeds)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_episode_batch, jobs))
    else:
        batches = [_episode_batch(job) for job in jobs]

    table = ResultTable(labels, list(config.ratios), list(config.strategies))
    results = {}
    for batch in batches:
        for label, ratio, s, i, captured in batch:
            results[label, ratio, s, i] = captured
    for label in labels:
        for ratio in config.ratios:
            for s in config.strategies:
                table.values[label, ratio, s] = [
                    results[label, ratio, s, i] for i in range(config.seeds)
                ]
                log.info(
                    "%s %s %s: mean %.2f",
                    label, format_ratio(ratio), s, table.mean(label, ratio, s),
                )
    return table


def to_csv(table: ResultTable) -> str:
    """One row per cell; a leading ``map`` column appears when the table spans several maps."""
    multi = len(table.maps) > 1
    buf = io.StringIO()
    buf.write(("map," if multi else "") + "ratio,strategy,mean,stddev,seeds\n")
    for m, ratio, s in table.rows():
        row = [format_ratio(ratio), s, repr(table.mean(m, ratio, s)),
               repr(table.stddev(m, ratio, s)), str(len(table.values[m, ratio, s]))]
        if multi:
            row.insert(0, m)
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def to_markdown(table: ResultTable) -> str:
    """Ratios as rows and strategies as columns, one table per map."""
    parts = []
    for m in table.maps:
        lines = [f"### {m}", ""]
        lines.append("| ratio | " + " | ".join(s.upper() for s in table.strategies) + " |")
        lines.append("|---" * (len(table.strategies) + 1) + "|")
        for ratio in table.ratios:
            cells = [
                f"{table.mean(m, ratio, s):.1f}" if (m, ratio, s) in table.values else ""
                for s in table.strategies
            ]
            lines.append(f"| {format_ratio(ratio)} | " + " | ".join(cells) + " |")
        parts.append("\n".join(lines) + "\n")
    return "\n".join(parts)


def emit(table: ResultTable, fmt: str = "csv", out=None) -> str:
    """Render the table; with ``out`` also write it there."""
    if fmt == "csv":
        text = to_csv(table)
    elif fmt == "markdown":
        text = to_markdown(table)
    else:
        raise ConfigError(f"unknown format {fmt!r}; expected csv or markdown")
    if out is not None:
        Path(out).write_text(text)
    return text
