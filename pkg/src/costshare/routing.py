"""Profiles, loads, social cost and the single-path optimum table OPT(l)."""

from __future__ import annotations

from fractions import Fraction

from .costs import GameInstance
from .errors import NotSymmetric, Unreachable

Profile = tuple  # one edge-id path per player, aligned with instance.players


def load_vector(profile, m: int) -> list:
    loads = [0] * m
    for path in profile:
        for e in path:
            loads[e] += 1
    return loads


def profile_cost(profile, costs) -> Fraction:
    """Sum of c_e(l_e) over all edges; +inf propagates."""
    loads = load_vector(profile, len(costs))
    total = Fraction(0)
    for c, l in zip(costs, loads):
        if l:
            total = total + c(l)
    return total


class OptTable:
    """OPT(l) for a symmetric instance, computed lazily per load.

    Each entry is a minimum-cost s-t path under the edge weights c_e(l);
    among equal-cost paths the lexicographically smallest edge-id sequence
    wins. Every protocol built on one instance should share one table.
    """

    def __init__(self, instance: GameInstance, source=None, sink=None):
        if source is None:
            if not instance.symmetric:
                raise NotSymmetric("OPT(l) needs a symmetric instance")
            source, sink = instance.terminals
        self.instance = instance
        self.source, self.sink = source, sink
        g = instance.graph
        self._useful = g.reaches(sink)
        if source not in self._useful:
            raise Unreachable(f"{sink} unreachable from {source}")
        self._rev = [v for v in reversed(g.order) if v in self._useful]
        self._paths = {}
        self._costs = {}
        self._sets = {}

    @property
    def n_max(self) -> int:
        return self.instance.n_max

    def _solve(self, load: int):
        g = self.instance.graph
        costs = self.instance.costs
        w = [c(load) for c in costs]
        dist = {self.sink: Fraction(0)}
        for v in self._rev:
            if v == self.sink:
                continue
            best = None
            for e in g.out_edges[v]:
                h = g.edges[e].head
                if h in dist:
                    d = w[e] + dist[h]
                    if best is None or d < best:
                        best = d
            dist[v] = best
        path = []
        v = self.source
        while v != self.sink:
            for e in g.out_edges[v]:
                h = g.edges[e].head
                if h in dist and w[e] + dist[h] == dist[v]:
                    path.append(e)
                    v = h
                    break
        self._paths[load] = tuple(path)
        self._costs[load] = dist[self.source]
        self._sets[load] = frozenset(path)

    def path(self, load: int) -> tuple:
        if not 1 <= load <= self.n_max:
            raise IndexError(f"load {load} outside 1..{self.n_max}")
        if load not in self._paths:
            self._solve(load)
        return self._paths[load]

    def cost(self, load: int):
        self.path(load)
        return self._costs[load]

    def contains(self, edge: int, load: int) -> bool:
        self.path(load)
        return edge in self._sets[load]

    def table(self, max_load: int | None = None) -> dict:
        top = self.n_max if max_load is None else min(max_load, self.n_max)
        return {l: self.path(l) for l in range(1, top + 1)}


def opt_path_table(instance: GameInstance, max_load: int | None = None) -> OptTable:
    """Build the OPT table; ``max_load`` eagerly fills loads 1..max_load."""
    table = OptTable(instance)
    if max_load is not None:
        table.table(max_load)
    return table
