"""Spin networks as undirected graphs with a shortest-path metric.

Vertices are labelled ``1..vertex_count``. Distances count edges along the
shortest path; disconnected pairs sit at ``INF``.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property

INF = math.inf


@dataclass(frozen=True)
class SpinGraph:
    vertex_count: int
    edges: frozenset[frozenset[int]] = field(default_factory=frozenset)
    local_dims: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("vertex_count must be positive")
        edges = set()
        for e in self.edges:
            pair = frozenset(e)
            if len(pair) != 2:
                raise ValueError(f"self-loop or malformed edge {tuple(e)!r}")
            for v in pair:
                self._check_vertex(v)
            edges.add(pair)
        object.__setattr__(self, "edges", frozenset(edges))
        dims = {v: 2 for v in self.vertices}
        for v, m in dict(self.local_dims).items():
            self._check_vertex(v)
            if int(m) < 2:
                raise ValueError(f"local dimension at vertex {v} must be >= 2, got {m}")
            dims[v] = int(m)
        object.__setattr__(self, "local_dims", dims)

    @classmethod
    def path(cls, n: int, local_dim: int = 2) -> SpinGraph:
        return cls(n, frozenset(frozenset((i, i + 1)) for i in range(1, n)),
                   {v: local_dim for v in range(1, n + 1)})

    @classmethod
    def cycle(cls, n: int) -> SpinGraph:
        edges = {frozenset((i, i + 1)) for i in range(1, n)}
        edges.add(frozenset((n, 1)))
        return cls(n, frozenset(edges))

    @classmethod
    def star(cls, leaves: int) -> SpinGraph:
        return cls(leaves + 1, frozenset(frozenset((1, v)) for v in range(2, leaves + 2)))

    @classmethod
    def from_edge_list(cls, n: int, edges: Iterable[Iterable[int]],
                       local_dims: Mapping[int, int] | None = None) -> SpinGraph:
        return cls(n, frozenset(frozenset(e) for e in edges), dict(local_dims or {}))

    @property
    def vertices(self) -> range:
        return range(1, self.vertex_count + 1)

    def _check_vertex(self, v) -> None:
        if not isinstance(v, int) or not 1 <= v <= self.vertex_count:
            raise ValueError(f"invalid vertex {v!r} (graph has vertices 1..{self.vertex_count})")

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for e in self.edges:
            a, b = sorted(e)
            adj[a].append(b)
            adj[b].append(a)
        return {v: tuple(sorted(n)) for v, n in adj.items()}

    @cached_property
    def _all_pairs(self) -> dict[int, dict[int, int]]:
        # BFS from every vertex; unreachable vertices are simply absent
        table = {}
        for src in self.vertices:
            dist = {src: 0}
            queue = deque([src])
            while queue:
                u = queue.popleft()
                for w in self.adjacency[u]:
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        queue.append(w)
            table[src] = dist
        return table

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return len(self.adjacency[v])


def _vertex_set(g: SpinGraph, X: Iterable[int]) -> frozenset[int]:
    members = frozenset(X)
    if not members:
        raise ValueError("vertex set must be non-empty")
    for v in members:
        g._check_vertex(v)
    return members


def distance(g: SpinGraph, x: int, y: int) -> float:
    """Number of edges on a shortest x-y path, or ``INF`` if none exists."""
    g._check_vertex(x)
    g._check_vertex(y)
    return g._all_pairs[x].get(y, INF)


def set_diameter(g: SpinGraph, X: Iterable[int]) -> float:
    """Largest pairwise distance inside ``X``."""
    members = sorted(_vertex_set(g, X))
    return max(distance(g, x, y) for x in members for y in members)


def set_distance(g: SpinGraph, X: Iterable[int], Y: Iterable[int]) -> float:
    """Smallest distance between a vertex of ``X`` and a vertex of ``Y``."""
    xs = _vertex_set(g, X)
    ys = _vertex_set(g, Y)
    return min(distance(g, x, y) for x in xs for y in ys)


def coordination_number(g: SpinGraph) -> int:
    return max((len(n) for n in g.adjacency.values()), default=0)


def max_local_dim(g: SpinGraph, X: Iterable[int] | None = None) -> int:
    members = g.vertices if X is None else _vertex_set(g, X)
    return max(g.local_dims[v] for v in members)
