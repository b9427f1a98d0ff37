"""Pure Nash equilibria by exhaustive enumeration, best-response dynamics,
brute-force optima and price-of-anarchy reports."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .costs import GameInstance, perturbation_total
from .errors import BadInput, PathExplosion
from .graph import enumerate_paths
from .protocols import Protocol
from .rat import INF
from .routing import OptTable, load_vector, opt_path_table, profile_cost

__all__ = [
    "AnalysisReport", "TieDetector", "Witness", "best_response_dynamics",
    "brute_force_optimum", "enumerate_pne", "is_nash", "load_vector",
    "opt_path_table", "poa_report", "profile_cost", "strategy_spaces",
]

DEFAULT_MAX_PROFILES = 10 ** 7


@dataclass
class TieDetector:
    """Counts exact equalities between one player's totals on distinct paths."""

    hits: int = 0
    comparisons: int = 0
    examples: list = field(default_factory=list)

    def feed(self, player, totals) -> None:
        self.comparisons += 1
        for value, k in Counter(totals).items():
            if k > 1:
                self.hits += k * (k - 1) // 2
                if len(self.examples) < 5:
                    self.examples.append((player, value))

    def merge(self, other: TieDetector) -> None:
        self.hits += other.hits
        self.comparisons += other.comparisons
        self.examples.extend(other.examples[: max(0, 5 - len(self.examples))])


@dataclass(frozen=True)
class Witness:
    player: int
    path: tuple
    old_total: object
    new_total: object


def strategy_spaces(instance: GameInstance, max_paths: int | None = None) -> list:
    """Per player, its source->sink paths in lexicographic order."""
    cache = {}
    out = []
    for p in instance.players:
        key = (p.source, p.sink)
        if key not in cache:
            cache[key] = enumerate_paths(instance.graph, p.source, p.sink, cap=max_paths)
        out.append(cache[key])
    return out


def _space_size(strategies) -> int:
    return math.prod(len(s) for s in strategies)


def _deviation_totals(proto: Protocol, profile, idx: int, ids, strategies):
    """Player idx's total on every strategy, holding the others fixed."""
    m = proto.instance.graph.m
    pid = ids[idx]
    others = [0] * m
    before = [0] * m
    for j, path in enumerate(profile):
        if j == idx:
            continue
        earlier = ids[j] < pid
        for e in path:
            others[e] += 1
            if earlier:
                before[e] += 1
    share = proto.share
    totals = []
    for path in strategies[idx]:
        t = Fraction(0)
        for e in path:
            t = t + share(e, others[e] + 1, before[e])
        totals.append(t)
    return totals


def is_nash(instance: GameInstance, proto: Protocol, profile, strategies=None,
            detector: TieDetector | None = None):
    """(True, None) when no player can strictly lower its total by switching paths,
    else (False, Witness) for the lowest-id improving player and its best path
    (ties between improving paths go to the lexicographically smallest)."""
    if strategies is None:
        strategies = strategy_spaces(instance)
    ids = [p.id for p in instance.players]
    for idx in sorted(range(len(ids)), key=lambda k: ids[k]):
        totals = _deviation_totals(proto, profile, idx, ids, strategies)
        if detector is not None:
            detector.feed(ids[idx], totals)
        current = totals[strategies[idx].index(tuple(profile[idx]))]
        best = min(range(len(totals)), key=lambda k: totals[k])
        if totals[best] < current:
            return False, Witness(ids[idx], strategies[idx][best], current, totals[best])
    return True, None


def _mixed_radix(k: int, radices) -> list:
    digits = []
    for r in reversed(radices):
        k, d = divmod(k, r)
        digits.append(d)
    return digits[::-1]


def _scan(instance, proto, strategies, lo, hi, track_ties):
    """PNE among profiles with lexicographic index in [lo, hi)."""
    det = TieDetector() if track_ties else None
    radices = [len(s) for s in strategies]
    digits = _mixed_radix(lo, radices)
    found = []
    for _ in range(lo, hi):
        profile = tuple(strategies[i][d] for i, d in enumerate(digits))
        ok, _w = is_nash(instance, proto, profile, strategies, det)
        if ok:
            found.append(profile)
        for i in range(len(digits) - 1, -1, -1):
            digits[i] += 1
            if digits[i] < radices[i]:
                break
            digits[i] = 0
    return found, det


def audit_budget(proto: Protocol, max_load: int) -> None:
    """Shares depend only on (edge, load, rank), so checking each (e, l) with
    l <= max_load covers every profile with at most max_load players."""
    for e in range(proto.instance.graph.m):
        for l in range(1, max_load + 1):
            if proto.charged(e, l) is INF:
                continue
            proto.audit(e, l)


def enumerate_pne(instance: GameInstance, proto: Protocol, max_profiles: int = DEFAULT_MAX_PROFILES,
                  strategies=None, workers: int = 1, detector: TieDetector | None = None,
                  max_paths: int | None = None) -> list:
    """Every PNE in lexicographic profile order.

    With workers > 1 the index space is cut into contiguous ranges scanned
    independently; results and tie counts are merged in range order.
    """
    if strategies is None:
        strategies = strategy_spaces(instance, max_paths)
    total = _space_size(strategies)
    if total > max_profiles:
        raise PathExplosion(total, max_profiles)
    audit_budget(proto, instance.n)
    track = detector is not None
    if workers <= 1 or total < 2 * workers:
        found, det = _scan(instance, proto, strategies, 0, total, track)
        if track:
            detector.merge(det)
        return found
    step = -(-total // workers)
    ranges = [(a, min(a + step, total)) for a in range(0, total, step)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda r: _scan(instance, proto, strategies, r[0], r[1], track), ranges))
    out = []
    for found, det in parts:
        out.extend(found)
        if track:
            detector.merge(det)
    return out


def best_response_dynamics(instance: GameInstance, proto: Protocol, start, max_iters: int = 1000,
                           strategies=None):
    """Apply improving deviations until a PNE, the iteration cap, or a revisited
    profile. Returns (profile, converged, trace, cycled)."""
    if strategies is None:
        strategies = strategy_spaces(instance)
    ids = [p.id for p in instance.players]
    profile = tuple(tuple(p) for p in start)
    seen = {profile}
    trace = []
    for _ in range(max_iters):
        ok, w = is_nash(instance, proto, profile, strategies)
        if ok:
            return profile, True, trace, False
        idx = ids.index(w.player)
        trace.append((w.player, profile[idx], w.path, w.old_total, w.new_total))
        profile = profile[:idx] + (w.path,) + profile[idx + 1:]
        if profile in seen:
            return profile, False, trace, True
        seen.add(profile)
    ok, _ = is_nash(instance, proto, profile, strategies)
    return profile, ok, trace, False


def brute_force_optimum(instance: GameInstance, costs=None, max_profiles: int = DEFAULT_MAX_PROFILES,
                        strategies=None, max_paths: int | None = None):
    """Minimum social cost profile and its cost.

    Players with identical terminals are interchangeable for the social
    cost, so each group ranges over multisets of paths, assigned in sorted
    order; among equal-cost profiles the lexicographically smallest wins.
    """
    costs = instance.costs if costs is None else costs
    if strategies is None:
        strategies = strategy_spaces(instance, max_paths)
    groups = {}
    for idx, p in enumerate(instance.players):
        groups.setdefault((p.source, p.sink), []).append(idx)
    group_list = list(groups.values())
    count = math.prod(math.comb(len(strategies[g[0]]) + len(g) - 1, len(g)) for g in group_list)
    if count > max_profiles:
        raise PathExplosion(count, max_profiles)
    if any(not strategies[g[0]] for g in group_list):
        raise BadInput("some player has no path")
    choices = [list(itertools.combinations_with_replacement(range(len(strategies[g[0]])), len(g)))
               for g in group_list]
    best = None
    for pick in itertools.product(*choices):
        profile = [None] * instance.n
        for g, combo in zip(group_list, pick):
            for idx, k in zip(g, combo):
                profile[idx] = strategies[idx][k]
        profile = tuple(profile)
        c = profile_cost(profile, costs)
        if best is None or c < best[1] or (c == best[1] and profile < best[0]):
            best = (profile, c)
    return best


@dataclass
class AnalysisReport:
    protocol: str
    pne: list
    worst_eq_cost: object
    best_eq_cost: object
    opt_cost: object
    opt_profile: tuple
    poa: object
    tie_detector_hits: int
    eps_accounting: dict | None
    profiles_evaluated: int
    no_equilibrium: bool
    cost_basis: str


def _ratio(num, den):
    if num is None:
        return None
    if num is INF:
        return INF
    if den == 0:
        return Fraction(1) if num == 0 else INF
    return Fraction(num) / den


def poa_report(instance: GameInstance, proto: Protocol, max_profiles: int = DEFAULT_MAX_PROFILES,
               workers: int = 1, max_paths: int | None = None) -> AnalysisReport:
    """Enumerate all PNE and compare their worst cost against the optimum.

    Equilibrium costs use the protocol's charged tables (c-hat when it
    overcharges); the optimum always uses the unperturbed original tables.
    """
    strategies = strategy_spaces(instance, max_paths)
    det = TieDetector()
    pne = enumerate_pne(instance, proto, max_profiles, strategies, workers, det)
    eq_tables = proto.cost_tables()
    eq_costs = [profile_cost(p, eq_tables) for p in pne]
    original = instance
    if instance.perturbation is not None:
        original = instance.with_costs(instance.perturbation.original)
    opt_profile, opt_cost = brute_force_optimum(original, max_profiles=max_profiles,
                                                strategies=strategies)
    worst = max(eq_costs) if eq_costs else None
    best = min(eq_costs) if eq_costs else None
    eps = None
    if proto.overcharges or instance.perturbation is not None:
        raw1 = perturbation_total(instance)
        raw2 = proto.eps2() if hasattr(proto, "eps2") else Fraction(0)
        eps = {"eps1_raw": raw1, "eps2_raw": raw2,
               "eps1": _ratio(2 * raw1, opt_cost), "eps2": _ratio(raw2, opt_cost)}
    return AnalysisReport(
        protocol=proto.name, pne=pne, worst_eq_cost=worst, best_eq_cost=best,
        opt_cost=opt_cost, opt_profile=opt_profile, poa=_ratio(worst, opt_cost),
        tie_detector_hits=det.hits if proto.tie_free else 0, eps_accounting=eps,
        profiles_evaluated=_space_size(strategies), no_equilibrium=not pne,
        cost_basis="c-hat" if proto.overcharges else "c")


def single_path_optimum(instance: GameInstance, opt: OptTable | None = None):
    """Everyone on OPT(n): the candidate optimum for symmetric concave games."""
    opt = opt or OptTable(instance)
    path = opt.path(instance.n)
    return tuple(path for _ in instance.players), opt.cost(instance.n)
