"""Maximum bipartite matching (Hopcroft-Karp) and bottleneck assignment."""

from __future__ import annotations

from collections import deque
from typing import Sequence

import numpy as np

_FREE = -1


def hopcroft_karp(adj: Sequence[Sequence[int]], n_right: int) -> tuple[int, list[int]]:
    """Maximum matching of a bipartite graph given by left-to-right adjacency lists.

    Returns the matching size and ``match[u]``, the right partner of left
    vertex ``u`` or -1.
    """
    n_left = len(adj)
    match_l = [_FREE] * n_left
    match_r = [_FREE] * n_right
    dist = [0] * n_left
    inf = n_left + n_right + 1

    def bfs() -> bool:
        q = deque()
        for u in range(n_left):
            if match_l[u] == _FREE:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = inf
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == _FREE:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        # iterative augmenting-path search along the BFS layering
        stack = [(u, iter(adj[u]))]
        path = []
        while stack:
            x, it = stack[-1]
            advanced = False
            for v in it:
                w = match_r[v]
                if w == _FREE:
                    path.append((x, v))
                    for a, b in path:
                        match_l[a] = b
                        match_r[b] = a
                    return True
                if dist[w] == dist[x] + 1:
                    path.append((x, v))
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[x] = inf
                stack.pop()
                if path:
                    path.pop()
        return False

    size = 0
    while bfs():
        for u in range(n_left):
            if match_l[u] == _FREE and dfs(u):
                size += 1
    return size, match_l


def threshold_graph(cost: np.ndarray, t: float) -> list[list[int]]:
    return [np.flatnonzero(row <= t).tolist() for row in cost]


def bottleneck_assignment(cost) -> tuple[float, list[int]]:
    """Match every row to a distinct column minimizing the largest matched cost.

    Binary search over the sorted distinct costs; each probe is a maximum
    matching on the edges at or below the threshold.  Requires
    ``rows <= cols`` and returns ``(value, assignment)``; the value is
    ``inf`` when no matching saturates the rows.
    """
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    if n == 0:
        return 0.0, []
    if n > m:
        raise ValueError("bottleneck assignment needs rows <= cols")
    values = np.unique(cost[np.isfinite(cost)])
    lo, hi = 0, len(values) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        size, match = hopcroft_karp(threshold_graph(cost, values[mid]), m)
        if size == n:
            best = (float(values[mid]), match)
            hi = mid - 1
        else:
            lo = mid + 1
    if best is None:
        return float("inf"), []
    return best
