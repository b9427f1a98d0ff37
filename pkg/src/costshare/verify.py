"""Verification suites shared by ``costshare verify`` and the test-suite.

``paper-facts`` checks the fixed lower-bound constructions; ``properties``
runs seeded randomized batteries. Every check returns a CheckResult and
never raises on a failed comparison.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .costs import perturb_for_ties
from .equilibrium import TieDetector, brute_force_optimum, enumerate_pne, poa_report, strategy_spaces
from .graph import assign_weights, enumerate_paths
from .instances import (GenParams, gen_dag_convex_lb, gen_multicast_const_lb,
                        gen_multicast_convex_lb, gen_overcharge_lb, gen_static_share_lb,
                        random_instance, static_share_lstar)
from .protocols import EqualSplit, Incremental, NeverWalkAlone, SPGProtocol
from .rat import parse_rat, rational_sqrt
from .routing import OptTable, profile_cost
from .sptree import component_paths_psi_violations, psi_violations


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _seed(base: int, tag: int, i: int) -> int:
    return base * 1_000_000 + tag * 10_000 + i


# ---------------------------------------------------------------- fixed constructions

@_timed
def check_multicast_const() -> CheckResult:
    fails = []
    inst = gen_multicast_const_lb(5, 1)
    proto = EqualSplit(inst)
    direct = tuple((2 * i,) for i in range(5))
    ok, _ = _is_pne(inst, proto, direct)
    if not ok:
        fails.append("all-direct profile is not a PNE")
    if profile_cost(direct, inst.costs) != 5:
        fails.append("all-direct cost != 5")
    rep = poa_report(inst, proto)
    if rep.opt_cost != 1:
        fails.append(f"opt {rep.opt_cost} != 1")
    if rep.poa != 5:
        fails.append(f"poa {rep.poa} != 5")
    n = 25
    c = rational_sqrt(n, 12)
    big = gen_multicast_const_lb(n, c)
    direct = tuple((2 * i,) for i in range(n))
    ok, _ = _is_pne(big, EqualSplit(big), direct)
    if not ok:
        fails.append("n=25 all-direct profile is not a PNE")
    shares = EqualSplit(big).shares(direct)
    worst = max(shares.totals.values())
    if not worst <= 5 + Fraction(1, 10 ** 9):
        fails.append(f"n=25 per-player cost {worst} > 5 + 1e-9")
    return CheckResult("multicast-const-lb facts", not fails, "; ".join(fails) or
                       "all-direct PNE cost 5, opt 1, poa 5/1; n=25 all-direct PNE, per-player <= 5")


def _is_pne(inst, proto, profile):
    from .equilibrium import is_nash
    return is_nash(inst, proto, profile)


@_timed
def check_dag_convex() -> CheckResult:
    inst = gen_dag_convex_lb(4)
    fails = []
    _, c5 = brute_force_optimum(inst)
    _, c4 = brute_force_optimum(inst.with_n_players(4))
    # straight path for player i: s -> v_i -> u_i -> t
    g = inst.graph
    straight = []
    for i in range(1, 5):
        u, v = 2 * i, 2 * i + 1
        ids = [e.id for e in g.edges if (e.tail, e.head) in ((0, v), (v, u), (u, 1))]
        straight.append(tuple(ids))
    c_straight = profile_cost(tuple(straight), inst.costs)
    if c5 != 5:
        fails.append(f"5-player opt {c5} != 5")
    if c4 != 1:
        fails.append(f"4-player opt {c4} != 1")
    if c_straight != 4:
        fails.append(f"straight profile {c_straight} != 4")
    return CheckResult("dag-convex-lb facts", not fails, "; ".join(fails) or
                       f"opt(5)={c5}, opt(4)={c4}, straight={c_straight}")


@_timed
def check_overcharge() -> CheckResult:
    inst = gen_overcharge_lb(12)
    q = parse_rat(inst.metadata["q"])
    fails = []
    _, c3 = brute_force_optimum(inst)
    _, c2 = brute_force_optimum(inst.with_n_players(2))
    if c3 != 2 * q + 1:
        fails.append(f"3-player opt {c3} != 2q+1")
    if c2 != 1:
        fails.append(f"2-player opt {c2} != 1")
    gap = abs((q + 2) / (2 * q + 1) - 2 * q)
    if not gap <= Fraction(1, 10 ** 9):
        fails.append(f"|(q+2)/(2q+1) - 2q| = {float(gap):.3e}")
    return CheckResult("overcharge-lb facts", not fails, "; ".join(fails) or
                       f"opt(3)=2q+1, opt(2)=1, identity gap {float(gap):.2e}")


def static_share_inequalities(k: int = 6, max_load: int = 4000):
    """Violations (ordering, j, l) of the three cost orderings of the static-share network:
    "1": c_0(l) + l > c_1(l) + 2k for l >= k+1;
    "2": c_j(l) < c_{j+1}(l) for l <= (j+1)k, 1 <= j < r;
    "3": c_{j-1}(l) > c_j(l) for l >= jk+1, 1 <= j <= r.

    At j = 1 the third ordering compares c_1 with the capped s->v edge c_0 = k,
    so it fails once c_1(l) exceeds k (l > k^3); those violations are reported.
    """
    inst = gen_static_share_lb(k)
    c = inst.costs
    r = 2 ** k
    cj = lambda j, l: c[0](l) if j == 0 else c[3 + j](l)  # noqa: E731
    bad = []
    for l in range(k + 1, max_load + 1):
        if not c[0](l) + l > cj(1, l) + 2 * k:
            bad.append(("1", 1, l))
    for j in range(1, r):
        for l in range(1, min((j + 1) * k, max_load) + 1):
            if not cj(j, l) < cj(j + 1, l):
                bad.append(("2", j, l))
    for j in range(1, r + 1):
        for l in range(j * k + 1, max_load + 1):
            if not cj(j - 1, l) > cj(j, l):
                bad.append(("3", j, l))
    return bad


def static_share_regime_mismatches(k: int = 6, beyond: int = 50):
    inst = gen_static_share_lb(k)
    r = 2 ** k
    lstar = static_share_lstar(k, inst.costs)
    opt = OptTable(inst)
    svt, svut = (0, 3), (0, 1, 2)
    bad = []
    for l in range(1, lstar + beyond + 1):
        if l <= k:
            want = svt
        elif l < lstar:
            j = min((l - 1) // k, r)
            want = (3 + j, 2)
        else:
            want = svut
        got = opt.path(l)
        if got != want:
            bad.append((l, got, want))
    return lstar, bad


@_timed
def check_static_share() -> CheckResult:
    ineq = static_share_inequalities()
    lstar, regimes = static_share_regime_mismatches()
    fails = []
    if ineq:
        groups = {}
        for which, j, l in ineq:
            groups.setdefault((which, j), []).append(l)
        parts = [f"ordering {w} at j={j}: {len(ls)} loads in [{min(ls)}, {max(ls)}]"
                 for (w, j), ls in sorted(groups.items())]
        fails.append("inequality violations: " + ", ".join(parts))
    if regimes:
        fails.append(f"{len(regimes)} OPT regime mismatches, first {regimes[0]}")
    return CheckResult("static-share-lb structure", not fails,
                       "; ".join(fails + ([f"OPT regimes match, lstar = {lstar}"] if not regimes else []))
                       or f"inequalities hold for l <= 4000; OPT regimes match, lstar = {lstar}",
                       {"violations": len(ineq), "regime_mismatches": len(regimes), "lstar": lstar})


@_timed
def check_multicast_convex() -> CheckResult:
    n = 4
    inst = gen_multicast_convex_lb(n)
    root = parse_rat(inst.metadata["sqrt_n"])
    fails = []
    _, full = brute_force_optimum(inst)
    if full != n + root:
        fails.append(f"(n+1)-player opt {full} != n + sqrt(n)")
    solo = inst.with_players([(1, 2)])
    _, one = brute_force_optimum(solo)
    if one != 1:
        fails.append(f"single s2 player opt {one} != 1")
    # first n players: s2 -> v1 -> u1 -> t, and s1 -> v_i -> u_i -> t
    g = inst.graph
    described = []
    for i, src in zip(range(1, n + 1), [1] + [0] * (n - 1)):
        v, u = 2 * i + 1, 2 * i + 2
        described.append(tuple(e.id for e in g.edges if (e.tail, e.head) in ((src, v), (v, u), (u, 2))))
    cost = profile_cost(tuple(described), inst.costs)
    if not cost >= n:
        fails.append(f"described n-player profile costs {cost} < n")
    return CheckResult("multicast-convex-lb facts", not fails, "; ".join(fails) or
                       f"opt(n+1) = {full}, single s2 opt = {one}, described = {cost}")


PAPER_FACTS = (check_multicast_const, check_dag_convex, check_overcharge,
               check_static_share, check_multicast_convex)


# ---------------------------------------------------------------- properties

def nwa_instances(seed: int, count: int = 200, max_profiles: int = 4096):
    for i in range(count):
        n = 2 + i % 3
        p = GenParams("dag", _seed(seed, 1, i), max_vertices=6, max_edges=10, n_players=n,
                      n_max=4, shape="concave", max_profiles=max_profiles)
        yield perturb_for_ties(random_instance(p), 3)


@_timed
def check_nwa_theorem(seed: int = 0, count: int = 200) -> CheckResult:
    """Every NWA equilibrium sits on OPT(n) and respects the overcharged PoA bound;
    the tie-detector must stay silent."""
    fails = []
    hits = 0
    pne_total = 0
    for inst in nwa_instances(seed, count):
        for sub in (inst, inst.with_n_players(1)):
            proto = NeverWalkAlone(sub)
            rep = poa_report(sub, proto)
            hits += rep.tie_detector_hits
            pne_total += len(rep.pne)
            n = sub.n
            tag = f"seed {sub.metadata['seed']} n={n}"
            if not rep.pne:
                fails.append(f"{tag}: no PNE")
                continue
            opt_path = proto.opt.path(n)
            if any(path != opt_path for prof in rep.pne for path in prof):
                fails.append(f"{tag}: PNE off OPT(n)")
            e = rep.eps_accounting
            bound = 1 + e["eps1"] + e["eps2"] if n >= 2 else 2 + e["eps1"]
            if not rep.poa <= bound:
                fails.append(f"{tag}: ratio {rep.poa} > {bound}")
            if rep.tie_detector_hits:
                fails.append(f"{tag}: {rep.tie_detector_hits} ties")
    return CheckResult("nwa overcharged PoA bound", not fails,
                       "; ".join(fails[:5]) or f"{count} instances (+ n=1 each), {pne_total} PNE, 0 ties",
                       {"tie_hits": hits, "pne": pne_total})


def spg_instances(seed: int, count: int = 100, tag: int = 2, shape: str = "strictly-concave",
                  n_lo: int = 2, n_hi: int = 5, max_profiles: int = 20000):
    span = n_hi - n_lo + 1
    for i in range(count):
        n = n_lo + i % span
        p = GenParams("spg", _seed(seed, tag, i), max_edges=12, n_players=n, n_max=n_hi,
                      shape=shape, max_profiles=max_profiles)
        yield random_instance(p)


@_timed
def check_spg_poa(seed: int = 0, count: int = 100) -> CheckResult:
    fails = []
    for inst in spg_instances(seed, count):
        proto = SPGProtocol(inst)
        tag = f"seed {inst.metadata['seed']}"
        rep = poa_report(inst, proto)  # audits budget balance for loads <= n
        if not rep.pne:
            fails.append(f"{tag}: no PNE")
            continue
        if any(profile_cost(p, inst.costs) != rep.opt_cost for p in rep.pne):
            fails.append(f"{tag}: PNE cost differs from optimum (poa {rep.poa})")
        all_opt = tuple(proto.opt.path(inst.n) for _ in range(inst.n))
        if all_opt not in rep.pne:
            fails.append(f"{tag}: all-on-OPT(n) is not a PNE")
    return CheckResult("spg PoA = 1", not fails, "; ".join(fails[:5]) or
                       f"{count} strictly concave SPGs, every PNE optimal, budget balanced")


@_timed
def check_psi_invariants(seed: int = 0, count: int = 100, profiles: int = 1000) -> CheckResult:
    fails = []
    per = max(1, profiles // count)
    checked = 0
    for inst in spg_instances(seed, count):
        proto = SPGProtocol(inst)
        ann = proto.annotations
        tag = f"seed {inst.metadata['seed']}"
        bad = psi_violations(proto.tree, ann, inst.n_max)
        bad += component_paths_psi_violations(proto.tree, inst.graph, ann)
        if bad:
            fails.append(f"{tag}: {bad[0]}")
        rng = random.Random(inst.metadata["seed"])
        strategies = strategy_spaces(inst)
        for _ in range(per):
            prof = tuple(rng.choice(s) for s in strategies)
            checked += 1
            sm = proto.shares(prof)
            ids = [p.id for p in inst.players]
            loads = [0] * inst.graph.m
            for path in prof:
                for e in path:
                    loads[e] += 1
            for e, l in enumerate(loads):
                if l == 0:
                    continue
                users = [pid for pid, path in zip(ids, prof) if e in path]
                lead = min(users)
                if sm.edge_sum(e) != inst.costs[e](l):
                    fails.append(f"{tag}: budget on edge {e}")
                psi = ann.psi_edge[e]
                if not sm.get(lead, e) >= psi:
                    fails.append(f"{tag}: leader share below psi on edge {e}")
                if l >= 2 and proto.opt.contains(e, l):
                    if any(not sm.get(u, e) < psi for u in users if u != lead):
                        fails.append(f"{tag}: non-leader share >= psi on edge {e}")
    return CheckResult("psi invariants and share bounds", not fails, "; ".join(fails[:5]) or
                       f"{count} SPGs exact; share bounds on {checked} random profiles")


@_timed
def check_incremental_poa(seed: int = 0, count: int = 100) -> CheckResult:
    fails = []
    for inst in spg_instances(seed, count, tag=4, shape="convex", n_lo=1, n_hi=4):
        tag = f"seed {inst.metadata['seed']}"
        proto = Incremental(inst)
        pne = enumerate_pne(inst, proto)
        _, opt = brute_force_optimum(inst)
        if not pne:
            fails.append(f"{tag}: no PNE")
        elif any(profile_cost(p, inst.costs) != opt for p in pne):
            fails.append(f"{tag}: PNE above optimum")
    return CheckResult("incremental PoA = 1 on convex SPGs", not fails, "; ".join(fails[:5]) or
                       f"{count} convex SPGs, every PNE optimal")


@_timed
def check_single_path_optimum(seed: int = 0, count: int = 100) -> CheckResult:
    fails = []
    for i in range(count):
        n = 1 + i % 4
        p = GenParams("dag", _seed(seed, 5, i), max_vertices=6, max_edges=8, n_players=n,
                      n_max=4, shape="concave", max_profiles=50000)
        inst = random_instance(p)
        _, best = brute_force_optimum(inst)
        single = OptTable(inst).cost(n)
        if best != single:
            fails.append(f"seed {p.seed}: brute force {best} != single path {single}")
    return CheckResult("single-path concave optimum", not fails, "; ".join(fails[:5]) or
                       f"{count} symmetric concave instances agree exactly")


@_timed
def check_weight_path_independence(seed: int = 0, count: int = 100) -> CheckResult:
    fails = []
    paths = 0
    for i in range(count):
        p = GenParams("dag", _seed(seed, 6, i), max_vertices=10, max_edges=20)
        g = random_instance(p).graph
        wa = assign_weights(g)
        for u in g.vertices:
            for v in g.vertices:
                if u == v:
                    continue
                for path in enumerate_paths(g, u, v):
                    paths += 1
                    if wa.path_weight(path) != wa.omega[v] - wa.omega[u]:
                        fails.append(f"seed {p.seed}: path {path}")
        if any(x <= 0 for x in wa.w):
            fails.append(f"seed {p.seed}: non-positive weight")
    return CheckResult("weight path-independence", not fails, "; ".join(fails[:5]) or
                       f"{count} DAGs, {paths} paths")


def check_no_ties(nwa_result: CheckResult) -> CheckResult:
    hits = nwa_result.stats.get("tie_hits")
    ok = hits == 0
    return CheckResult("no-tie certification", ok, f"tie-detector hits across NWA runs: {hits}")


def run_suite(name: str, seed: int = 0) -> list:
    if name == "paper-facts":
        return [fn() for fn in PAPER_FACTS]
    if name == "properties":
        nwa = check_nwa_theorem(seed)
        return [nwa, check_no_ties(nwa), check_spg_poa(seed), check_psi_invariants(seed),
                check_incremental_poa(seed), check_single_path_optimum(seed),
                check_weight_path_independence(seed)]
    raise ValueError(f"unknown suite {name!r}")
