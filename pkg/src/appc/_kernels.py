"""Compiled breadth-first search kernels over flat grid indices.

The neighbour table is an ``(n, 4)`` int32 array holding, for each cell index,
its up/right/down/left neighbour index or -1.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def bfs_parents(nbr, blocked, src, dst, parent, queue):
    """Fill ``parent`` with BFS discovery parents from ``src``; stop at ``dst``.

    Returns True if ``dst`` was reached. ``parent[src] == src``; undiscovered
    cells hold -1.
    """
    parent[:] = -1
    parent[src] = src
    queue[0] = src
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        if u == dst:
            return True
        for k in range(4):
            v = nbr[u, k]
            if v >= 0 and parent[v] < 0 and blocked[v] == 0:
                parent[v] = u
                queue[tail] = v
                tail += 1
    return False


@numba.njit(cache=True)
def bfs_distances(nbr, blocked, sources, max_depth, dist, queue):
    """Multi-source BFS distances, -1 where unreachable or beyond ``max_depth``.

    A negative ``max_depth`` means unbounded.
    """
    dist[:] = -1
    tail = 0
    for i in range(sources.shape[0]):
        s = sources[i]
        if dist[s] < 0 and blocked[s] == 0:
            dist[s] = 0
            queue[tail] = s
            tail += 1
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        d = dist[u]
        if max_depth >= 0 and d >= max_depth:
            continue
        for k in range(4):
            v = nbr[u, k]
            if v >= 0 and dist[v] < 0 and blocked[v] == 0:
                dist[v] = d + 1
                queue[tail] = v
                tail += 1
    return tail

