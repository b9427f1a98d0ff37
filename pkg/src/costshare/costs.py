"""Load-indexed cost tables, game instances, shape classification and the
two cost transforms (tie-breaking perturbation, strictification)."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .errors import (BadInput, InfiniteCost, InvalidEps, MalformedTable, NotConcave,
                     Unreachable)
from .graph import Graph
from .rat import INF, as_rat, ceil_to_grid


class Shape(NamedTuple):
    concave: bool
    strictly_concave: bool
    convex: bool
    constant: bool
    capacitated: bool


@dataclass(frozen=True, eq=False)
class CostTable:
    """c(0..n_max). ``values`` holds an explicit prefix c(0..L); when
    ``tail_slope`` is set, c(l) = c(L) + tail_slope * (l - L) for l > L.
    Without a tail the prefix must cover every load up to n_max.
    Equality is by value: a compact table equals its dense expansion."""

    values: tuple
    n_max: int
    tail_slope: Fraction | None = None

    def __post_init__(self):
        vals = tuple(as_rat(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if self.tail_slope is not None:
            object.__setattr__(self, "tail_slope", Fraction(self.tail_slope))
        if self.n_max < 1:
            raise MalformedTable("n_max must be positive")
        if not vals or vals[0] != 0:
            raise MalformedTable("c(0) must be 0")
        if self.tail_slope is None:
            if len(vals) != self.n_max + 1:
                raise MalformedTable(f"expected {self.n_max + 1} values, got {len(vals)}")
        else:
            if len(vals) > self.n_max + 1:
                raise MalformedTable("prefix longer than the table")
            if self.tail_slope < 0:
                raise MalformedTable("tail slope must be non-negative")
        for a, b in zip(vals, vals[1:]):
            if b < a:
                raise MalformedTable("cost values must be non-decreasing")

    @classmethod
    def constant(cls, value, n_max: int) -> CostTable:
        return cls((0, value), n_max, Fraction(0))

    @classmethod
    def capacitated(cls, value, cap: int, n_max: int) -> CostTable:
        """``value`` for 1 <= l <= cap and +inf beyond."""
        prefix = (0,) + (value,) * min(cap, n_max)
        if cap < n_max:
            prefix += (INF,)
        return cls(prefix, n_max, Fraction(0))

    @classmethod
    def from_function(cls, f, n_max: int) -> CostTable:
        return cls(tuple(f(l) for l in range(n_max + 1)), n_max)

    def __call__(self, load: int):
        if not 0 <= load <= self.n_max:
            raise IndexError(f"load {load} outside 0..{self.n_max}")
        if load < len(self.values):
            return self.values[load]
        last = len(self.values) - 1
        return self.values[last] + self.tail_slope * (load - last)

    def __len__(self):
        return self.n_max + 1

    def __eq__(self, other):
        if not isinstance(other, CostTable):
            return NotImplemented
        if self.n_max != other.n_max:
            return False
        if self.is_dense and other.is_dense:
            return self.values == other.values
        # two linear tails that agree on consecutive loads agree everywhere
        top = min(self.n_max, max(len(self.values), len(other.values)))
        return all(self(l) == other(l) for l in range(top + 1))

    def __hash__(self):
        return hash((self.n_max, self(1)))

    @property
    def is_dense(self) -> bool:
        return self.tail_slope is None

    @property
    def finite(self) -> bool:
        return INF not in self.values

    def dense(self) -> CostTable:
        if self.tail_slope is None:
            return self
        return CostTable(tuple(self(l) for l in range(self.n_max + 1)), self.n_max)

    def marginal_profile(self) -> list:
        """Marginals c(l) - c(l-1) for l = 1..n_max, with a constant tail collapsed
        to at most two entries (enough for every monotonicity test)."""
        out = [b - a for a, b in zip(self.values, self.values[1:])]
        if self.tail_slope is not None:
            tail_len = self.n_max + 1 - len(self.values)
            out.extend([self.tail_slope] * min(tail_len, 2))
        return out

    def with_n_max(self, n_max: int) -> CostTable:
        if self.tail_slope is not None:
            prefix = self.values[: n_max + 1]
            return CostTable(prefix, n_max, self.tail_slope)
        if n_max <= self.n_max:
            return CostTable(self.values[: n_max + 1], n_max)
        raise MalformedTable("cannot extend a dense table without a tail")


def classify(cost: CostTable) -> Shape:
    if cost.values[0] != 0:
        raise MalformedTable("c(0) must be 0")
    if not cost.finite:
        return Shape(False, False, False, False, True)
    d = cost.marginal_profile()
    pairs = list(zip(d, d[1:]))
    concave = all(b <= a for a, b in pairs)
    strictly = all(b < a for a, b in pairs)
    convex = all(b >= a for a, b in pairs)
    constant = all(x == 0 for x in d[1:])
    return Shape(concave, strictly, convex, constant, False)


class Player(NamedTuple):
    id: int
    source: int
    sink: int


@dataclass(frozen=True)
class Perturbation:
    """Record of a tie-breaking perturbation: rounding grid 10**-r, window
    multiplier K = lcm(1..n_max-1), window width W, and the original tables."""

    r: int
    K: int
    W: int
    original: tuple

    def increment(self, edge: int) -> Fraction:
        return Fraction(self.K, 10 ** (self.r + self.W * (edge + 1)))


@dataclass(frozen=True)
class GameInstance:
    graph: Graph
    costs: tuple
    players: tuple
    n_max: int
    sp_tree: object = None
    protocol: dict | None = None
    metadata: dict = field(default_factory=dict)
    perturbation: Perturbation | None = None

    def __post_init__(self):
        players = tuple(p if isinstance(p, Player) else
                        (Player(*p) if len(p) == 3 else Player(i, *p))
                        for i, p in enumerate(self.players))
        object.__setattr__(self, "players", players)
        object.__setattr__(self, "costs", tuple(self.costs))
        self.graph.order  # acyclicity
        if len(self.costs) != self.graph.m:
            raise BadInput(f"{self.graph.m} edges but {len(self.costs)} cost tables")
        for e, c in enumerate(self.costs):
            if c.n_max != self.n_max:
                raise BadInput(f"edge {e}: table n_max {c.n_max} != instance n_max {self.n_max}")
        if not 1 <= len(players) <= self.n_max:
            raise BadInput(f"need 1..{self.n_max} players, got {len(players)}")
        if len({p.id for p in players}) != len(players):
            raise BadInput("duplicate player id")
        for p in players:
            if p.source not in self.graph.reaches(p.sink):
                raise Unreachable(f"player {p.id}: sink {p.sink} unreachable from {p.source}")

    @property
    def symmetric(self) -> bool:
        return len({(p.source, p.sink) for p in self.players}) == 1

    @property
    def multicast(self) -> bool:
        return len({p.sink for p in self.players}) == 1

    @property
    def terminals(self) -> tuple:
        p = self.players[0]
        return p.source, p.sink

    @property
    def finite(self) -> bool:
        return all(c.finite for c in self.costs)

    @property
    def n(self) -> int:
        return len(self.players)

    def shapes(self) -> list:
        return [classify(c) for c in self.costs]

    def with_players(self, players) -> GameInstance:
        return dataclasses.replace(self, players=tuple(players))

    def with_n_players(self, n: int) -> GameInstance:
        """Symmetric copy with players 0..n-1 on the same terminals."""
        s, t = self.terminals
        return self.with_players(Player(i, s, t) for i in range(n))

    def with_costs(self, costs) -> GameInstance:
        return dataclasses.replace(self, costs=tuple(costs))


def lcm_upto(n: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out = math.lcm(out, k)
    return out


def perturb_for_ties(instance: GameInstance, r: int) -> GameInstance:
    """Round every cost up to the 10**-r grid, then add K * 10**-(r + W*i)
    to edge e_i (i = edge id + 1) at every positive load.

    With K = lcm(1..n_max-1), each c(l)/(l-1) keeps its increment an integer
    multiple of the window unit, and the window width W is chosen so that
    a window's coefficient (at most 2K*max(K, n_max)) cannot carry into the
    next one. Path sums of the NWA share kernel then encode their edge set.
    """
    if r < 0:
        raise BadInput("r must be non-negative")
    if not instance.finite:
        raise InfiniteCost("cannot perturb a table containing +inf")
    n_max = instance.n_max
    K = lcm_upto(n_max - 1)
    W = len(str(2 * K * max(K, n_max))) + 1
    grid = Fraction(1, 10 ** r)
    rec = Perturbation(r, K, W, instance.costs)
    new = []
    for e, c in enumerate(instance.costs):
        inc = rec.increment(e)
        vals = [Fraction(0)] + [ceil_to_grid(c(l), grid) + inc for l in range(1, n_max + 1)]
        new.append(CostTable(tuple(vals), n_max))
    return dataclasses.replace(instance, costs=tuple(new), perturbation=rec)


def perturbation_total(instance: GameInstance) -> Fraction:
    """Sum over edges of the largest per-load increase the perturbation applied."""
    rec = instance.perturbation
    if rec is None:
        return Fraction(0)
    return sum((max(c(l) - o(l) for l in range(1, instance.n_max + 1))
                for c, o in zip(instance.costs, rec.original)), Fraction(0))


def strictify_concave(cost: CostTable, eps) -> CostTable:
    """Strictly concave table c' with c <= c' <= (1+eps)c at every load >= 1.

    Adds eps*c(1)*(1 - 2**-l): its marginals halve at every step, so the sum
    with the (non-increasing) original marginals strictly decreases, and the
    addition never exceeds eps*c(1) <= eps*c(l).
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise InvalidEps("eps must be positive")
    if not cost.finite or not classify(cost).concave:
        raise NotConcave("strictify_concave needs a finite concave table")
    c1 = cost(1)
    if c1 == 0:
        raise InvalidEps("an all-zero table cannot be made strictly concave within (1+eps)")
    vals = tuple(cost(l) + eps * c1 * (1 - Fraction(1, 2 ** l)) for l in range(cost.n_max + 1))
    return CostTable(vals, cost.n_max)
