"""Provider network graphs: generators, hop distances and the edge-list format.

Both providers share one topology, so a single :class:`Graph` and a single
distance matrix serve as ``E_A`` and ``E_B``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class GraphError(ValueError):
    """Invalid topology input (bad format, self-loop, duplicate edge, ...)."""


class DisconnectedGraphError(GraphError):
    def __init__(self, u: int, v: int):
        super().__init__(f"graph is disconnected: no path between nodes {u} and {v}")
        self.pair = (u, v)


@dataclass(frozen=True)
class Graph:
    """Undirected simple connected graph on nodes ``0..n-1``."""

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], *, check_connected: bool = True) -> "Graph":
        if n < 1:
            raise GraphError(f"node count must be positive, got {n}")
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
        canon = tuple(sorted(seen))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in canon:
            nbrs[u].append(v)
            nbrs[v].append(u)
        g = cls(n, canon, tuple(tuple(sorted(x)) for x in nbrs))
        if check_connected:
            _check_connected(g)
        return g

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])


def _bfs(g: Graph, source: int) -> list[int]:
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _check_connected(g: Graph) -> None:
    dist = _bfs(g, 0)
    for v, d in enumerate(dist):
        if d < 0:
            raise DisconnectedGraphError(0, v)


def all_pairs_distances(g: Graph) -> np.ndarray:
    """Hop distances by one BFS per source. Returned array is read-only."""
    out = np.empty((g.n, g.n), dtype=np.int64)
    for s in range(g.n):
        row = _bfs(g, s)
        for v, d in enumerate(row):
            if d < 0:
                raise DisconnectedGraphError(s, v)
        out[s] = row
    out.setflags(write=False)
    return out


def generate_ba(n: int, m: int = 2, seed: int | None = 0) -> Graph:
    """Barabasi-Albert growth with preferential attachment.

    Starts from a complete graph on ``m + 1`` nodes; every later node links to
    ``m`` distinct existing nodes drawn without replacement with probability
    proportional to their degree before the step.
    """
    if m < 1 or n < m + 1:
        raise GraphError(f"BA graph needs m >= 1 and n >= m + 1 (got n={n}, m={m})")
    rng = np.random.default_rng(seed)
    edges = [(u, v) for u in range(m + 1) for v in range(u + 1, m + 1)]
    degree = np.zeros(n, dtype=np.int64)
    degree[: m + 1] = m
    for new in range(m + 1, n):
        weights = degree[:new] / degree[:new].sum()
        targets = rng.choice(new, size=m, replace=False, p=weights)
        for t in sorted(int(x) for x in targets):
            edges.append((t, new))
            degree[t] += 1
        degree[new] = m
    return Graph.from_edges(n, edges)


REGULAR_KINDS = ("path", "cycle", "complete")


def generate_regular(kind: str, n: int) -> Graph:
    if kind == "path":
        if n < 2:
            raise GraphError(f"path needs n >= 2, got {n}")
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "cycle":
        if n < 3:
            raise GraphError(f"cycle needs n >= 3, got {n}")
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif kind == "complete":
        if n < 2:
            raise GraphError(f"complete graph needs n >= 2, got {n}")
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    else:
        raise GraphError(f"unknown regular topology {kind!r}; expected one of {REGULAR_KINDS}")
    return Graph.from_edges(n, edges)


def load_graph(text: str) -> Graph:
    """Parse the ``"n m"`` header + ``"u v"`` edge-list format."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise GraphError("empty graph file")
    n, m = _parse_pair(lines[0], 1)
    body = lines[1:]
    if len(body) != m:
        raise GraphError(f"header declares {m} edges but {len(body)} edge lines follow")
    edges = [_parse_pair(ln, k + 2) for k, ln in enumerate(body)]
    return Graph.from_edges(n, edges)


def _parse_pair(line: str, lineno: int) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise GraphError(f"line {lineno}: expected two integers, got {line!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphError(f"line {lineno}: expected two integers, got {line!r}") from None


def save_graph(g: Graph) -> str:
    rows = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(rows) + "\n"
