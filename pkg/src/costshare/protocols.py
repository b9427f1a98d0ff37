"""Cost-sharing protocols.

Every rule here is resource-aware and order-based: a player's share of an
edge depends only on the edge, its load and the player's rank among that
edge's users (rank 0 = smallest id = the leader). That makes the share a
cached kernel ``share(e, load, rank)``, which the equilibrium engine
evaluates directly when testing deviations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .costs import CostTable, GameInstance, classify
from .errors import (InfiniteCost, NotConcave, NotSymmetric, ProtocolInapplicable,
                     ShareExceedsCost, VerificationFailed, ZeroUnitCost)
from .graph import assign_weights
from .routing import OptTable, load_vector
from .rat import INF, as_rat

PROTOCOL_NAMES = ("equal-split", "incremental", "leader-based", "static-share", "spg", "nwa")


def leader(profile, edge: int, ids=None):
    """Smallest id among the players whose path uses ``edge``; None if unused."""
    if ids is None:
        ids = range(len(profile))
    users = [i for i, path in zip(ids, profile) if edge in path]
    return min(users) if users else None


def user_ranks(profile, ids, m: int):
    """Per player, per edge on its path: (load, rank among the edge's users)."""
    loads = load_vector(profile, m)
    seen = [0] * m
    out = {}
    for idx in sorted(range(len(ids)), key=lambda k: ids[k]):
        ranks = {}
        for e in profile[idx]:
            ranks[e] = (loads[e], seen[e])
            seen[e] += 1
        out[idx] = ranks
    return loads, out


@dataclass
class ShareMatrix:
    xi: dict       # (player id, edge) -> share
    totals: dict   # player id -> total share

    def edge_sum(self, edge: int):
        return sum((v for (i, e), v in self.xi.items() if e == edge), Fraction(0))

    def get(self, player: int, edge: int):
        return self.xi.get((player, edge), Fraction(0))


class Protocol:
    """Base class. Subclasses implement ``_share(e, load, rank)`` and may set
    ``charged`` (the per-edge totals the shares must add up to)."""

    name = "abstract"
    overcharges = False
    stable = False
    tie_free = False

    def __init__(self, instance: GameInstance):
        self.instance = instance
        self._cache = {}
        self._audited = set()

    def charged(self, e: int, load: int):
        """Total collected on edge e at the given load."""
        return self.instance.costs[e](load)

    def cost_tables(self) -> tuple:
        """Tables whose sum over a profile is the social cost this protocol reports."""
        return self.instance.costs

    def share(self, e: int, load: int, rank: int):
        key = (e, load, rank)
        v = self._cache.get(key)
        if v is None:
            v = self._share(e, load, rank)
            self._cache[key] = v
        return v

    def _share(self, e, load, rank):
        raise NotImplementedError

    def edge_total(self, e: int, load: int):
        total = Fraction(0)
        for r in range(load):
            total = total + self.share(e, load, r)
        return total

    def audit(self, e: int, load: int) -> None:
        """Raise VerificationFailed unless the shares on (e, load) add up to charged(e, load)."""
        if load == 0 or (e, load) in self._audited:
            return
        total, want = self.edge_total(e, load), self.charged(e, load)
        if total != want:
            raise VerificationFailed(f"{self.name}: edge {e} load {load} collects {total}, expected {want}")
        self._audited.add((e, load))

    def shares(self, profile, ids=None) -> ShareMatrix:
        ids = [p.id for p in self.instance.players] if ids is None else list(ids)
        _, ranks = user_ranks(profile, ids, self.instance.graph.m)
        xi, totals = {}, {}
        for idx, per_edge in ranks.items():
            pid = ids[idx]
            tot = Fraction(0)
            for e, (l, r) in per_edge.items():
                v = self.share(e, l, r)
                xi[(pid, e)] = v
                tot = tot + v
            totals[pid] = tot
        return ShareMatrix(xi, totals)

    def describe(self) -> dict:
        return {"name": self.name}


class EqualSplit(Protocol):
    name = "equal-split"
    stable = True

    def _share(self, e, load, rank):
        c = self.instance.costs[e](load)
        return c if c is INF else c / load


class Incremental(Protocol):
    """Each user pays its marginal cost given the users ranked before it."""

    name = "incremental"
    stable = True

    def _share(self, e, load, rank):
        c = self.instance.costs[e]
        hi = c(rank + 1)
        if hi is INF:
            return INF
        return hi - c(rank)


class LeaderBased(Protocol):
    """Leader pays psi(e, l); the remaining l-1 users split c_e(l) - psi(e, l) evenly."""

    name = "leader-based"

    def __init__(self, instance: GameInstance, psi):
        super().__init__(instance)
        self.psi = psi

    def _share(self, e, load, rank):
        p = self.psi(e, load)
        if rank == 0:
            return p
        c = self.instance.costs[e](load)
        if c is INF:
            return INF
        return (c - p) / (load - 1)


def static_share_rule(instance: GameInstance, opt_table: OptTable, psi_edge: dict,
                      max_load: int | None = None):
    """psi_e(l) = psi_e when e is on OPT(l), else c_e(l).

    Loads 1..max_load (default n_max) are checked eagerly for psi_e <= c_e(l);
    larger loads are checked when first evaluated.
    """
    costs = instance.costs
    top = instance.n_max if max_load is None else min(max_load, instance.n_max)
    for l in range(1, top + 1):
        for e in opt_table.path(l):
            if psi_edge[e] > costs[e](l):
                raise ShareExceedsCost(f"psi_{e} = {psi_edge[e]} exceeds c_{e}({l}) = {costs[e](l)}")

    def psi(e, load):
        if opt_table.contains(e, load):
            if load > top and psi_edge[e] > costs[e](load):
                raise ShareExceedsCost(f"psi_{e} = {psi_edge[e]} exceeds c_{e}({load})")
            return psi_edge[e]
        return costs[e](load)

    return psi


def first_opt_load(opt_table: OptTable, e: int):
    for l in range(1, opt_table.n_max + 1):
        if opt_table.contains(e, l):
            return l
    return None


class StaticShare(LeaderBased):
    name = "static-share"

    def __init__(self, instance: GameInstance, psi_edge: dict | None = None,
                 opt_table: OptTable | None = None):
        if not instance.symmetric:
            raise ProtocolInapplicable("static-share needs a symmetric instance")
        self.opt = opt_table or OptTable(instance)
        if psi_edge is None:
            psi_edge = {}
            for e, c in enumerate(instance.costs):
                l = first_opt_load(self.opt, e)
                psi_edge[e] = c(l) if l is not None else c(1)
        self.psi_edge = {int(e): as_rat(v) for e, v in psi_edge.items()}
        # eager validation only up to the loads a profile can reach
        rule = static_share_rule(instance, self.opt, self.psi_edge, max_load=instance.n)
        super().__init__(instance, rule)

    def describe(self):
        return {"name": self.name, "psi": self.psi_edge}


class SPGProtocol(StaticShare):
    """Static-share rule with psi_e read off the series-parallel annotations.

    On an edge outside OPT(l) the leader pays everything; on an OPT edge the
    leader pays psi_e and the others split the rest.
    """

    name = "spg"
    stable = True

    def __init__(self, instance: GameInstance, tree=None, opt_table: OptTable | None = None):
        from .sptree import annotate, parse_sp_tree

        tree = tree if tree is not None else instance.sp_tree
        if tree is None:
            raise ProtocolInapplicable("spg needs a series-parallel tree")
        if not hasattr(tree, "nodes"):
            tree = parse_sp_tree(instance.graph, tree)
        if not instance.symmetric:
            raise ProtocolInapplicable("spg needs a symmetric instance")
        s, t = instance.terminals
        if (tree.root.source, tree.root.sink) != (s, t):
            raise ProtocolInapplicable("tree terminals differ from the players' terminals")
        if not instance.finite:
            raise ProtocolInapplicable("spg needs finite costs")
        opt = opt_table or OptTable(instance)
        self.tree = tree
        self.annotations = annotate(tree, instance, opt)
        super().__init__(instance, self.annotations.psi_edge, opt)


def spg_protocol_shares(instance: GameInstance, profile, annotations=None,
                        opt_table: OptTable | None = None, ids=None) -> ShareMatrix:
    if annotations is None:
        return SPGProtocol(instance, opt_table=opt_table).shares(profile, ids)
    proto = StaticShare(instance, annotations.psi_edge, opt_table)
    return proto.shares(profile, ids)


@dataclass(frozen=True)
class NWAConstants:
    C: Fraction
    eps: Fraction
    w: tuple
    omega: dict

    def eps_e(self, e: int, x) -> Fraction:
        return (self.w[e] * self.C - x) * self.eps / self.C


class NeverWalkAlone(Protocol):
    """Non-leaders and sole users pay zeta_e(l): 2c_e(l) off OPT(l) or at
    l = 1, c_e(l)/(l-1) on OPT(l). A leader with company pays the small
    positive eps_e(zeta_e(l)). Edges therefore collect c-hat_e(l) >= c_e(l)."""

    name = "nwa"
    overcharges = True
    stable = True
    tie_free = True

    def __init__(self, instance: GameInstance, opt_table: OptTable | None = None):
        super().__init__(instance)
        if not instance.symmetric:
            raise NotSymmetric("nwa needs a symmetric instance")
        if not instance.finite:
            raise InfiniteCost("nwa needs finite costs")
        for e, c in enumerate(instance.costs):
            if not classify(c).concave:
                raise NotConcave(f"nwa needs concave costs (edge {e})")
        unit = min(c(1) for c in instance.costs)
        if unit <= 0:
            raise ZeroUnitCost("min_e c_e(1) must be positive")
        wa = assign_weights(instance.graph)
        C = 2 * sum((c(instance.n_max) for c in instance.costs), Fraction(0)) + 1
        eps = Fraction(unit) / (2 * sum(wa.w))
        self.const = NWAConstants(C, eps, wa.w, wa.omega)
        self.opt = opt_table or OptTable(instance)
        self._hat = {}

    def zeta(self, e: int, load: int):
        c = self.instance.costs[e](load)
        if load == 1 or not self.opt.contains(e, load):
            return 2 * c
        return c / (load - 1)

    def _share(self, e, load, rank):
        z = self.zeta(e, load)
        if rank == 0 and load > 1:
            return self.const.eps_e(e, z)
        return z

    def charged(self, e: int, load: int):
        key = (e, load)
        v = self._hat.get(key)
        if v is None:
            c = self.instance.costs[e](load)
            if load == 0:
                v = Fraction(0)
            elif load == 1:
                v = 2 * c
            elif not self.opt.contains(e, load):
                v = 2 * (load - 1) * c + self.const.eps_e(e, 2 * c)
            else:
                v = c + self.const.eps_e(e, c / (load - 1))
            self._hat[key] = v
        return v

    def hat_table(self, e: int) -> CostTable:
        n = self.instance.n_max
        return CostTable(tuple(self.charged(e, l) for l in range(n + 1)), n)

    def cost_tables(self) -> tuple:
        return tuple(_HatView(self, e) for e in range(self.instance.graph.m))

    def eps2(self) -> Fraction:
        return sum((self.const.eps_e(e, 0) for e in range(self.instance.graph.m)), Fraction(0))

    def describe(self):
        return {"name": self.name, "C": self.const.C, "eps": self.const.eps}


class _HatView:
    """Callable c-hat_e without materialising the whole table."""

    def __init__(self, proto: NeverWalkAlone, e: int):
        self.proto, self.e = proto, e

    def __call__(self, load):
        return self.proto.charged(self.e, load)


def nwa_context(instance: GameInstance, opt_table: OptTable | None = None) -> NeverWalkAlone:
    return NeverWalkAlone(instance, opt_table)


def nwa_shares(context: NeverWalkAlone, profile, ids=None) -> ShareMatrix:
    return context.shares(profile, ids)


def equal_split_shares(instance: GameInstance, profile, ids=None) -> ShareMatrix:
    return EqualSplit(instance).shares(profile, ids)


def incremental_shares(instance: GameInstance, profile, ids=None) -> ShareMatrix:
    return Incremental(instance).shares(profile, ids)


def leader_based_shares(instance: GameInstance, profile, psi, ids=None) -> ShareMatrix:
    return LeaderBased(instance, psi).shares(profile, ids)


def make_protocol(name: str, instance: GameInstance, params: dict | None = None) -> Protocol:
    """Build a protocol by CLI name. ``params`` is the instance file's protocol block params."""
    params = params or {}
    if name == "equal-split":
        return EqualSplit(instance)
    if name == "incremental":
        return Incremental(instance)
    if name == "static-share":
        psi = params.get("psi")
        if psi is not None:
            psi = {int(k): as_rat(v) for k, v in psi.items()}
        return StaticShare(instance, psi)
    if name == "leader-based":
        table = params.get("psi_table")
        if table is None:
            raise ProtocolInapplicable("leader-based needs params.psi_table: per edge, psi(0..n_max)")
        rows = [[as_rat(x) for x in row] for row in table]
        if len(rows) != instance.graph.m:
            raise ProtocolInapplicable("psi_table needs one row per edge")
        for e, row in enumerate(rows):
            if len(row) != instance.n_max + 1:
                raise ProtocolInapplicable(f"psi_table row {e} needs n_max + 1 entries")
            for l in range(1, instance.n_max + 1):
                if row[l] > instance.costs[e](l):
                    raise ShareExceedsCost(f"psi_{e}({l}) exceeds c_{e}({l})")
        return LeaderBased(instance, lambda e, l: rows[e][l])
    if name == "spg":
        return SPGProtocol(instance)
    if name == "nwa":
        if not instance.symmetric:
            raise ProtocolInapplicable("nwa needs a symmetric instance")
        try:
            return NeverWalkAlone(instance)
        except (NotConcave, InfiniteCost, ZeroUnitCost) as exc:
            raise ProtocolInapplicable(str(exc)) from exc
    raise ProtocolInapplicable(f"unknown protocol {name!r}")
