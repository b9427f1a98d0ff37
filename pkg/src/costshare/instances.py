"""Instance generators: the lower-bound networks and seeded random families.

Edge ids of the fixed constructions are part of their contract and are
listed in each docstring, so checks can name paths by edge id.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .costs import CostTable, GameInstance, Player, classify
from .errors import BadParams, KTooSmall
from .graph import Graph, count_paths
from .rat import as_rat, format_rat, rational_sqrt

SHAPES = ("concave", "strictly-concave", "convex", "constant")
FAMILIES = ("dag", "spg")


def harmonic(n: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def linear_table(slope, n_max: int, intercept=0) -> CostTable:
    """c(l) = intercept + slope * l for l >= 1, stored compactly."""
    slope, intercept = Fraction(slope), Fraction(intercept)
    return CostTable((0, intercept + slope), n_max, slope)


def gen_multicast_const_lb(n: int, c) -> GameInstance:
    """Hub network: t = 0, v = 1, s_i = 1 + i.

    Edge 2(i-1) is s_i -> t (constant 1), edge 2(i-1)+1 is s_i -> v
    (constant 0), edge 2n is v -> t (constant c). Player i-1 routes s_i -> t.
    """
    if n < 1:
        raise BadParams("n must be >= 1")
    c = as_rat(c)
    if not c > 0:
        raise BadParams("c must be positive")
    pairs, costs = [], []
    for i in range(1, n + 1):
        pairs += [(1 + i, 0), (1 + i, 1)]
        costs += [CostTable.constant(1, n), CostTable.constant(0, n)]
    pairs.append((1, 0))
    costs.append(CostTable.constant(c, n))
    g = Graph.from_pairs(pairs, vertices=range(n + 2))
    players = [(1 + i, 0) for i in range(1, n + 1)]
    return GameInstance(g, costs, players, n,
                        metadata={"family": "multicast-const-lb", "n": n, "c": format_rat(c)})


def gen_dag_convex_lb(n: int, players: int | None = None) -> GameInstance:
    """Zig-zag ladder with capacity-one edges; s = 0, t = 1, u_i = 2i, v_i = 2i+1.

    Edge 0 is s -> t (cost 1). For each i = 1..n, in order: s -> v_i (0),
    v_i -> u_i (1), u_i -> t (0), then v_i -> u_{i-1} (0) when i >= 2.
    n_max = n + 1; by default all n + 1 players route s -> t.
    """
    if n < 2:
        raise BadParams("n must be >= 2")
    n_max = n + 1
    players = n_max if players is None else players
    pairs = [(0, 1)]
    unit = [1]
    for i in range(1, n + 1):
        u, v = 2 * i, 2 * i + 1
        pairs += [(0, v), (v, u), (u, 1)]
        unit += [0, 1, 0]
        if i >= 2:
            pairs.append((v, 2 * (i - 1)))
            unit.append(0)
    costs = [CostTable.capacitated(x, 1, n_max) for x in unit]
    g = Graph.from_pairs(pairs, vertices=range(2 * n + 2), source=0, sink=1)
    return GameInstance(g, costs, [(0, 1)] * players, n_max,
                        metadata={"family": "dag-convex-lb", "n": n})


def overcharge_constant(digits: int) -> Fraction:
    """Rational within 10**-digits of (sqrt(33) - 1) / 8."""
    return (rational_sqrt(33, digits + 1) - 1) / 8


def gen_overcharge_lb(digits: int = 12, players: int = 3) -> GameInstance:
    """Braess graph with capacity one; s = 0, v = 1, u = 2, t = 3.

    Edges: 0 s->t (1), 1 s->v (q), 2 s->u (0), 3 u->v (0), 4 v->t (0),
    5 u->t (q), where q approximates (sqrt(33) - 1) / 8. n_max = 3.
    """
    if digits < 6:
        raise BadParams("digits must be >= 6")
    q = overcharge_constant(digits)
    pairs = [(0, 3), (0, 1), (0, 2), (2, 1), (1, 3), (2, 3)]
    unit = [1, q, 0, 0, 0, q]
    costs = [CostTable.capacitated(x, 1, 3) for x in unit]
    g = Graph.from_pairs(pairs, vertices=range(4), source=0, sink=3)
    return GameInstance(g, costs, [(0, 3)] * players, 3,
                        metadata={"family": "overcharge-lb", "digits": digits,
                                  "q": format_rat(q)})


def static_share_costs(k: int):
    """(r, n_max, tables) for the static-share network."""
    r = 2 ** k
    n_max = r * r * k * k
    c0 = CostTable(tuple(range(k + 1)), n_max, Fraction(0))
    tables = [c0, CostTable.constant(0, n_max), CostTable.constant(2 * k, n_max),
              linear_table(1, n_max)]
    unit = Fraction(1, 10 ** (2 * k + 4))
    for j in range(1, r + 1):
        intercept = harmonic(j - 1) / k + j * unit
        tables.append(linear_table(Fraction(1, j * k * k), n_max, intercept))
    return r, n_max, tables


def static_share_lstar(k: int, tables=None) -> int:
    """First load with c_r(l) > k."""
    if tables is None:
        _, _, tables = static_share_costs(k)
    cr = tables[-1]
    # c_r is linear: intercept + l * slope
    slope = cr.tail_slope
    intercept = cr(1) - slope
    l = math.floor((k - intercept) / slope) + 1
    while cr(l - 1) > k:
        l -= 1
    while cr(l) <= k:
        l += 1
    return l


def gen_static_share_lb(k: int, players: int = 1) -> GameInstance:
    """Braess-like network with r = 2**k parallel s -> u edges.

    s = 0, v = 1, u = 2, t = 3. Edges: 0 s->v (min(l, k)), 1 v->u (0),
    2 u->t (2k), 3 v->t (l), and 3+j s->u (c_j) for j = 1..r with
    c_j(l) = l/(j k^2) + H_{j-1}/k + j * 10**-(2k+4). n_max = r^2 k^2.
    """
    if k < 6:
        raise KTooSmall("k must be >= 6")
    r, n_max, tables = static_share_costs(k)
    pairs = [(0, 1), (1, 2), (2, 3), (1, 3)] + [(0, 2)] * r
    g = Graph.from_pairs(pairs, vertices=range(4), source=0, sink=3)
    return GameInstance(g, tables, [(0, 3)] * players, n_max,
                        metadata={"family": "static-share-lb", "k": k, "r": r,
                                  "lstar": static_share_lstar(k, tables)})


def gen_multicast_convex_lb(n: int, players: int | None = None, digits: int = 12) -> GameInstance:
    """Two-source ladder with capacity-one edges.

    s1 = 0, s2 = 1, t = 2, v_i = 2i+1, u_i = 2i+2. For i = 1..n in order:
    src -> v_i (0) where src is s2 for i = 1 and s1 otherwise, v_i -> u_i (1),
    v_i -> u_{i-1} (0) when i >= 2, u_i -> t (0). Last edge: s2 -> t (sqrt n).
    Default players: the first and last start at s2, the n-1 in between at s1.
    """
    if n < 4:
        raise BadParams("n must be >= 4")
    root = rational_sqrt(n, digits)
    n_max = n + 1
    pairs, unit = [], []
    for i in range(1, n + 1):
        v, u = 2 * i + 1, 2 * i + 2
        pairs.append((1 if i == 1 else 0, v))
        unit.append(0)
        pairs.append((v, u))
        unit.append(1)
        if i >= 2:
            pairs.append((v, 2 * i))
            unit.append(0)
        pairs.append((u, 2))
        unit.append(0)
    pairs.append((1, 2))
    unit.append(root)
    costs = [CostTable.capacitated(x, 1, n_max) for x in unit]
    g = Graph.from_pairs(pairs, vertices=range(2 * n + 3))
    if players is None:
        plist = [(1, 2)] + [(0, 2)] * (n - 1) + [(1, 2)]
    else:
        plist = players
    return GameInstance(g, costs, plist, n_max,
                        metadata={"family": "multicast-convex-lb", "n": n,
                                  "sqrt_n": format_rat(root)})


@dataclass(frozen=True)
class GenParams:
    family: str = "dag"
    seed: int = 0
    max_vertices: int = 6
    max_edges: int = 10
    n_players: int = 2
    n_max: int | None = None
    shape: str = "concave"
    mode: str = "symmetric"          # symmetric | multicast | general
    max_value: int = 10
    max_profiles: int | None = None


def random_table(rng: random.Random, shape: str, n_max: int, max_value: int) -> CostTable:
    if shape == "concave":
        d = [rng.randint(1, max_value)]
        for _ in range(n_max - 1):
            d.append(rng.randint(0, d[-1]))
    elif shape == "strictly-concave":
        top = 3 * n_max + rng.randint(0, max_value)
        d = sorted(rng.sample(range(0, top + 1), n_max), reverse=True)
        if d[0] == 0:
            d[0] = 1
    elif shape == "convex":
        d = [rng.randint(0, max_value)]
        for _ in range(n_max - 1):
            d.append(d[-1] + rng.randint(0, max_value))
    elif shape == "constant":
        d = [rng.randint(1, max_value)] + [0] * (n_max - 1)
    else:
        raise BadParams(f"unknown shape {shape!r}")
    vals = [0]
    for x in d:
        vals.append(vals[-1] + x)
    table = CostTable(tuple(vals), n_max)
    s = classify(table)
    ok = {"concave": s.concave, "strictly-concave": s.strictly_concave,
          "convex": s.convex, "constant": s.constant}[shape]
    assert ok, (shape, vals)
    return table


def _random_dag(rng: random.Random, p: GenParams):
    nv = rng.randint(2, max(2, p.max_vertices))
    # positions 0..nv-1 are a hidden topological order; a spine guarantees s -> t
    spine = sorted(rng.sample(range(1, nv - 1), rng.randint(0, nv - 2))) if nv > 2 else []
    chain = [0] + spine + [nv - 1]
    pairs = list(zip(chain, chain[1:]))
    budget = rng.randint(len(pairs), max(len(pairs), p.max_edges))
    while len(pairs) < budget:
        a = rng.randrange(nv - 1)
        b = rng.randrange(a + 1, nv)
        pairs.append((a, b))
    rng.shuffle(pairs)
    label = list(range(nv))
    rng.shuffle(label)
    pairs = [(label[a], label[b]) for a, b in pairs]
    g = Graph.from_pairs(pairs, vertices=range(nv), source=label[0], sink=label[nv - 1])
    return g, None


def _random_sp(rng: random.Random, p: GenParams):
    m = rng.randint(1, max(1, p.max_edges))
    pairs = []
    counter = [2]

    def build(src, dst, k):
        if k == 1:
            pairs.append((src, dst))
            return {"edge": len(pairs) - 1}
        a = rng.randint(1, k - 1)
        if rng.random() < 0.5:
            mid = counter[0]
            counter[0] += 1
            return ["S", build(src, mid, a), build(mid, dst, k - a)]
        return ["P", build(src, dst, a), build(src, dst, k - a)]

    desc = build(0, 1, m)
    g = Graph.from_pairs(pairs, vertices=range(counter[0]), source=0, sink=1)
    return g, desc


def _players(rng: random.Random, g: Graph, p: GenParams):
    s, t = g.source, g.sink
    if p.mode == "symmetric":
        return [(s, t)] * p.n_players
    if p.mode == "multicast":
        srcs = sorted(v for v in g.reaches(t) if v != t)
        return [(rng.choice(srcs), t) for _ in range(p.n_players)]
    if p.mode == "general":
        out = []
        for _ in range(p.n_players):
            while True:
                b = rng.choice(g.vertices)
                srcs = sorted(v for v in g.reaches(b) if v != b)
                if srcs:
                    out.append((rng.choice(srcs), b))
                    break
        return out
    raise BadParams(f"unknown mode {p.mode!r}")


def _profile_count(g: Graph, players) -> int:
    counts = {}
    total = 1
    for s, t in players:
        if (s, t) not in counts:
            counts[(s, t)] = count_paths(g, s, t)
        total *= counts[(s, t)]
    return total


def random_instance(params: GenParams) -> GameInstance:
    """Deterministic per params. With ``max_profiles`` set, draws are repeated
    (from seeds derived from ``seed``) until the profile space fits."""
    if params.family not in FAMILIES:
        raise BadParams(f"unknown family {params.family!r}")
    if params.shape not in SHAPES:
        raise BadParams(f"unknown shape {params.shape!r}")
    if params.n_players < 1:
        raise BadParams("n_players must be >= 1")
    n_max = params.n_max or params.n_players
    if n_max < params.n_players:
        raise BadParams("n_max must be >= n_players")
    if params.family == "spg" and params.mode != "symmetric":
        raise BadParams("spg instances are symmetric")
    for attempt in range(1000):
        rng = random.Random(f"{params.seed}:{attempt}")
        if params.family == "dag":
            g, desc = _random_dag(rng, params)
        else:
            g, desc = _random_sp(rng, params)
        players = _players(rng, g, params)
        if params.max_profiles is not None and _profile_count(g, players) > params.max_profiles:
            continue
        costs = [random_table(rng, params.shape, n_max, params.max_value) for _ in g.edges]
        tree = None
        if desc is not None:
            from .sptree import parse_sp_tree
            tree = parse_sp_tree(g, desc)
        meta = {"family": params.family, "seed": params.seed, "shape": params.shape,
                "attempt": attempt}
        return GameInstance(g, costs, players, n_max, sp_tree=tree, metadata=meta)
    raise BadParams("could not satisfy max_profiles within 1000 draws")


GENERATORS = {
    "multicast-const-lb": gen_multicast_const_lb,
    "dag-convex-lb": gen_dag_convex_lb,
    "overcharge-lb": gen_overcharge_lb,
    "static-share-lb": gen_static_share_lb,
    "multicast-convex-lb": gen_multicast_convex_lb,
}
