"""Simulator, defender strategies and benchmark harness for area protection
with a connected defending team."""

from .engine import EpisodeResult, Metrics, Violation, compute_metrics, run_episode, step, validate_moves
from .grid import Cell, GridError, GridMap, bfs_distances, neighbors, shortest_path
from .instance_gen import SpawnSpec, generate_instance, generate_map
from .model import AgentId, ConfigError, Configuration, Instance, Team, attacker, defender
from .strategies import STRATEGIES, Allocation, allocate
from .visibility import VisibilityGraph, build_visibility_graph, line_of_sight

__version__ = "0.1.0"
