"""Small builders shared by the test modules."""

from appc.grid import GridMap
from appc.model import Instance


def grid(*rows: str) -> GridMap:
    """Map from rows of '.' and '#', top row first."""
    return GridMap.from_text(f"{len(rows[0])} {len(rows)}\n" + "\n".join(rows) + "\n")


def empty(width: int, height: int) -> GridMap:
    return GridMap(width, height, ())


def instance(g, attackers, defenders, targets, **kw) -> Instance:
    return Instance(g, tuple(attackers), tuple(defenders), tuple(targets), **kw)
