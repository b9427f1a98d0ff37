"""Directed acyclic multigraphs, topological order, path enumeration and
the potential-based edge weights used by the Never-Walk-Alone protocol."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from .errors import BadInput, CycleDetected, PathExplosion

Path = tuple  # ordered edge ids


class Edge(NamedTuple):
    id: int
    tail: int
    head: int


@dataclass(frozen=True)
class Graph:
    vertices: tuple
    edges: tuple
    source: int | None = None
    sink: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))
        if len(set(self.vertices)) != len(self.vertices):
            raise BadInput("duplicate vertex id")
        vset = set(self.vertices)
        for i, e in enumerate(self.edges):
            if e.id != i:
                raise BadInput(f"edge ids must be dense 0..m-1 in order, got {e.id} at {i}")
            if e.tail not in vset or e.head not in vset:
                raise BadInput(f"edge {e.id} references an unknown vertex")
        for t in (self.source, self.sink):
            if t is not None and t not in vset:
                raise BadInput(f"terminal {t} is not a vertex")

    @classmethod
    def from_pairs(cls, pairs, vertices=None, source=None, sink=None) -> Graph:
        """Build from a list of (tail, head) pairs; edge ids follow list order."""
        if vertices is None:
            vertices = sorted({v for p in pairs for v in p})
        return cls(tuple(vertices), tuple(Edge(i, u, v) for i, (u, v) in enumerate(pairs)),
                   source, sink)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def out_edges(self) -> dict:
        out = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.tail].append(e.id)
        return {v: tuple(ids) for v, ids in out.items()}

    @cached_property
    def in_edges(self) -> dict:
        inn = {v: [] for v in self.vertices}
        for e in self.edges:
            inn[e.head].append(e.id)
        return {v: tuple(ids) for v, ids in inn.items()}

    @cached_property
    def order(self) -> tuple:
        return tuple(topo_sort(self))

    def reaches(self, target) -> frozenset:
        """Vertices from which ``target`` is reachable (including itself)."""
        seen = {target}
        stack = [target]
        while stack:
            v = stack.pop()
            for eid in self.in_edges[v]:
                u = self.edges[eid].tail
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return frozenset(seen)

    def is_path(self, path, source, sink) -> bool:
        if not path:
            return source == sink
        at = source
        seen = {source}
        for eid in path:
            if not 0 <= eid < self.m:
                return False
            e = self.edges[eid]
            if e.tail != at or e.head in seen:
                return False
            seen.add(e.head)
            at = e.head
        return at == sink


def topo_sort(graph: Graph) -> list:
    """Kahn's algorithm; among ready vertices the smallest id goes first."""
    indeg = {v: 0 for v in graph.vertices}
    for e in graph.edges:
        indeg[e.head] += 1
    ready = [v for v, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        v = heapq.heappop(ready)
        out.append(v)
        for eid in graph.out_edges[v]:
            h = graph.edges[eid].head
            indeg[h] -= 1
            if indeg[h] == 0:
                heapq.heappush(ready, h)
    if len(out) != len(graph.vertices):
        raise CycleDetected("graph contains a directed cycle")
    return out


@dataclass(frozen=True)
class WeightAssignment:
    omega: dict = field(hash=False)
    w: tuple

    def path_weight(self, path) -> int:
        return sum(self.w[e] for e in path)


def assign_weights(graph: Graph) -> WeightAssignment:
    """omega_v is v's 0-based topological position, w_e = omega_head - omega_tail."""
    omega = {v: i for i, v in enumerate(topo_sort(graph))}
    w = tuple(omega[e.head] - omega[e.tail] for e in graph.edges)
    return WeightAssignment(omega, w)


def enumerate_paths(graph: Graph, source, sink, cap: int | None = None) -> list:
    """All source->sink paths in lexicographic edge-id order.

    Raises PathExplosion as soon as more than ``cap`` paths are found.
    """
    if source not in graph.out_edges or sink not in graph.out_edges:
        raise BadInput("unknown source or sink")
    graph.order  # raises CycleDetected
    useful = graph.reaches(sink)
    if source not in useful:
        return []
    paths = []
    prefix = []

    def dfs(v):
        if v == sink:
            paths.append(tuple(prefix))
            if cap is not None and len(paths) > cap:
                raise PathExplosion(len(paths), cap)
            return
        for eid in graph.out_edges[v]:
            h = graph.edges[eid].head
            if h in useful:
                prefix.append(eid)
                dfs(h)
                prefix.pop()

    dfs(source)
    return paths


def count_paths(graph: Graph, source, sink) -> int:
    """Number of source->sink paths, by dynamic programming over the topological order."""
    ways = {v: 0 for v in graph.vertices}
    ways[sink] = 1
    for v in reversed(graph.order):
        if v != sink:
            ways[v] = sum(ways[graph.edges[e].head] for e in graph.out_edges[v])
    return ways[source]
