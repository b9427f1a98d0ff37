import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costshare.costs import CostTable, GameInstance, Player
from costshare.equilibrium import strategy_spaces
from costshare.errors import ProtocolInapplicable, ShareExceedsCost
from costshare.graph import Graph
from costshare.instances import GenParams, random_instance
from costshare.protocols import (EqualSplit, Incremental, LeaderBased, NeverWalkAlone,
                                 NWAConstants, SPGProtocol, StaticShare, leader,
                                 make_protocol, static_share_rule)
from costshare.rat import INF
from costshare.routing import OptTable, load_vector


def parallel(tables, n_max, ids=(0,)):
    g = Graph.from_pairs([(0, 1)] * len(tables), source=0, sink=1)
    costs = [CostTable(tuple(t), n_max) for t in tables]
    return GameInstance(g, costs, [Player(i, 0, 1) for i in ids], n_max)


# ---- leader ----------------------------------------------------------------

def test_leader():
    prof = ((0,), (1,), (0,))
    assert leader(prof, 0, ids=[5, 7, 2]) == 2
    assert leader(prof, 2, ids=[5, 7, 2]) is None
    assert leader(((0,),), 0, ids=[7]) == 7


# ---- equal split / incremental --------------------------------------------

def test_equal_split():
    inst = parallel([(0, 1, 3)], 2, ids=(0, 1))
    sh = EqualSplit(inst).shares(((0,), (0,)))
    assert sh.get(0, 0) == sh.get(1, 0) == F(3, 2)
    solo = EqualSplit(inst).shares(((0,),), ids=[0])
    assert solo.get(0, 0) == 1


def test_equal_split_infinite():
    g = Graph.from_pairs([(0, 1)])
    inst = GameInstance(g, [CostTable((0, 1, INF), 2)], [(0, 1), (0, 1)], 2)
    sh = EqualSplit(inst).shares(((0,), (0,)))
    assert sh.get(0, 0) is INF and sh.get(1, 0) is INF


def test_incremental():
    inst = parallel([(0, 1, 4, 9)], 3, ids=(1, 2))
    sh = Incremental(inst).shares(((0,), (0,)))
    assert (sh.get(1, 0), sh.get(2, 0)) == (1, 3)
    inst = parallel([(0, 2, 5)], 2, ids=(3, 8))
    sh = Incremental(inst).shares(((0,), (0,)))
    assert (sh.get(3, 0), sh.get(8, 0)) == (2, 3)
    assert Incremental(inst).shares(((0,),), ids=[8]).get(8, 0) == 2


# ---- leader based / static share ----------------------------------------

def test_leader_based():
    inst = parallel([(0, 1, 4, 9)], 3, ids=(0, 1, 2))
    psi = lambda e, l: F(l)  # noqa: E731
    lb = LeaderBased(inst, psi)
    sh = lb.shares(((0,), (0,), (0,)))
    assert [sh.get(i, 0) for i in range(3)] == [3, 3, 3]
    assert lb.shares(((0,),), ids=[0]).get(0, 0) == 1
    full = LeaderBased(inst, lambda e, l: inst.costs[e](l))
    sh = full.shares(((0,), (0,), (0,)))
    assert [sh.get(i, 0) for i in range(3)] == [9, 0, 0]


def test_static_share_rule():
    inst = parallel([(0, 1, 2, 3, 4, 5), (0, 3, 4, 5, 6, 7)], 5)
    opt = OptTable(inst)
    rule = static_share_rule(inst, opt, {0: F(1), 1: F(3)})
    assert rule(0, 2) == 1
    assert rule(1, 5) == inst.costs[1](5)
    with pytest.raises(ShareExceedsCost):
        static_share_rule(inst, opt, {0: F(2), 1: F(3)})


def test_static_share_requires_symmetric():
    g = Graph.from_pairs([(0, 1), (1, 2)])
    inst = GameInstance(g, [CostTable((0, 1, 2), 2)] * 2, [(0, 1), (1, 2)], 2)
    with pytest.raises(ProtocolInapplicable):
        StaticShare(inst)


# ---- SPG -----------------------------------------------------------------

def test_spg_sole_user_on_opt1():
    inst = parallel([(0, 1, 10), (0, 2, 2)], 2, ids=(1, 4))
    proto = SPGProtocol(inst, tree=["P", {"edge": 0}, {"edge": 1}])
    assert proto.shares(((0,),), ids=[1]).get(1, 0) == 1


def test_spg_off_opt_leader_pays_all():
    inst = parallel([(0, 1, 10), (0, 2, 2)], 2, ids=(1, 4))
    proto = SPGProtocol(inst, tree=["P", {"edge": 0}, {"edge": 1}])
    sh = proto.shares(((0,), (0,)))
    assert (sh.get(1, 0), sh.get(4, 0)) == (10, 0)


def test_spg_series_example():
    g = Graph.from_pairs([(0, 1), (1, 2)], source=0, sink=2)
    costs = [CostTable((0, 4, 6), 2), CostTable((0, 2, 3), 2)]
    inst = GameInstance(g, costs, [(0, 2), (0, 2)], 2)
    proto = SPGProtocol(inst, tree=["S", {"edge": 0}, {"edge": 1}])
    sh = proto.shares(((0, 1), (0, 1)))
    assert sh.totals == {0: 6, 1: 3}


def test_spg_needs_tree():
    with pytest.raises(ProtocolInapplicable):
        SPGProtocol(parallel([(0, 1, 2)], 2))


# ---- never walk alone ----------------------------------------------------

def test_nwa_hat_formula():
    const = NWAConstants(C=F(10), eps=F(1, 100), w=(1,), omega={})
    # c(2) = 3/2 on OPT(2): c-hat = c + eps_e(c/(l-1))
    assert F(3, 2) + const.eps_e(0, F(3, 2)) == F(3, 2) + F(17, 2000)


def test_nwa_constants():
    inst = parallel([(0, 2, 3, 4), (0, 5, 9, 13)], 3, ids=(1, 2, 5))
    nwa = NeverWalkAlone(inst)
    assert nwa.const.C == 35
    assert nwa.const.eps == F(1, 2)
    assert nwa.const.eps < min(c(1) for c in inst.costs) / sum(nwa.const.w)


def test_nwa_on_opt_shares():
    inst = parallel([(0, 2, 3, 4), (0, 5, 9, 13)], 3, ids=(1, 2, 5))
    nwa = NeverWalkAlone(inst)
    sh = nwa.shares(((0,), (0,), (0,)))
    assert sh.get(2, 0) == sh.get(5, 0) == 2
    assert sh.get(1, 0) == F(33, 70)
    assert sh.edge_sum(0) == nwa.charged(0, 3) > inst.costs[0](3)


def test_nwa_off_opt_shares():
    inst = parallel([(0, 1, 2), (0, 2, 3)], 2, ids=(1, 9))
    nwa = NeverWalkAlone(inst)
    sh = nwa.shares(((1,), (1,)))
    assert sh.get(9, 1) == 6
    assert sh.get(1, 1) == F(5, 44)


def test_nwa_sole_user_pays_double():
    inst = parallel([(0, 1, 2), (0, 2, 3)], 2, ids=(1, 9))
    nwa = NeverWalkAlone(inst)
    assert nwa.shares(((1,),), ids=[9]).get(9, 1) == 4
    assert nwa.charged(1, 1) == 4


def test_make_protocol_maps_nwa_errors():
    inst = parallel([(0, 1, 3)], 2)
    with pytest.raises(ProtocolInapplicable):
        make_protocol("nwa", inst)
    with pytest.raises(ProtocolInapplicable):
        make_protocol("leader-based", inst)


# ---- properties ----------------------------------------------------------

def _random_profile(inst, rng):
    spaces = strategy_spaces(inst)
    return tuple(rng.choice(s) for s in spaces)


def _protocols(inst):
    out = [EqualSplit(inst), Incremental(inst)]
    if inst.symmetric:
        out.append(StaticShare(inst))
        if inst.shapes() and all(s.concave for s in inst.shapes()) and min(c(1) for c in inst.costs) > 0:
            out.append(NeverWalkAlone(inst))
    if inst.sp_tree is not None:
        out.append(SPGProtocol(inst))
    return out


instance_params = st.builds(
    GenParams,
    family=st.sampled_from(["dag", "spg"]),
    seed=st.integers(0, 10**6),
    n_players=st.integers(1, 4),
    n_max=st.just(5),
    shape=st.sampled_from(["concave", "strictly-concave"]),
    max_profiles=st.just(5000),
)


@settings(max_examples=60, deadline=None)
@given(instance_params, st.integers(0, 2**32))
def test_budget_balance(params, seed):
    inst = random_instance(params)
    prof = _random_profile(inst, random.Random(seed))
    loads = load_vector(prof, inst.graph.m)
    for proto in _protocols(inst):
        sh = proto.shares(prof)
        for e, l in enumerate(loads):
            if l:
                assert sh.edge_sum(e) == proto.charged(e, l)
                assert proto.charged(e, l) >= inst.costs[e](l)
        if not proto.overcharges:
            for e, l in enumerate(loads):
                assert proto.charged(e, l) == inst.costs[e](l)


@settings(max_examples=60, deadline=None)
@given(instance_params, st.integers(0, 2**32))
def test_resource_awareness(params, seed):
    """Removing a player never changes shares on edges that player avoided."""
    inst = random_instance(params)
    if inst.n < 2:
        return
    rng = random.Random(seed)
    prof = _random_profile(inst, rng)
    j = rng.randrange(inst.n)
    rest = inst.with_players(p for k, p in enumerate(inst.players) if k != j)
    rest_prof = prof[:j] + prof[j + 1:]
    for full, part in zip(_protocols(inst), _protocols(rest)):
        a, b = full.shares(prof), part.shares(rest_prof)
        for (pid, e), v in b.xi.items():
            if e not in prof[j]:
                assert a.xi[(pid, e)] == v


@settings(max_examples=40, deadline=None)
@given(instance_params, st.integers(0, 2**32))
def test_equal_split_relabel(params, seed):
    inst = random_instance(params)
    rng = random.Random(seed)
    prof = _random_profile(inst, rng)
    ids = [p.id for p in inst.players]
    perm = ids[:]
    rng.shuffle(perm)
    a = EqualSplit(inst).shares(prof, ids)
    b = EqualSplit(inst).shares(prof, perm)
    for k in range(inst.n):
        assert a.totals[ids[k]] == b.totals[perm[k]]


@settings(max_examples=40, deadline=None)
@given(instance_params, st.integers(0, 2**32))
def test_incremental_edge_total_label_free(params, seed):
    inst = random_instance(params)
    rng = random.Random(seed)
    prof = _random_profile(inst, rng)
    perm = [p.id for p in inst.players]
    rng.shuffle(perm)
    a = Incremental(inst).shares(prof)
    b = Incremental(inst).shares(prof, perm)
    for e in range(inst.graph.m):
        assert a.edge_sum(e) == b.edge_sum(e)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 5), st.integers(0, 2**32))
def test_spg_leader_structure(gseed, n, seed):
    inst = random_instance(GenParams("spg", gseed, n_players=n, n_max=5, shape="strictly-concave",
                                     max_profiles=5000))
    proto = SPGProtocol(inst)
    prof = _random_profile(inst, random.Random(seed))
    loads = load_vector(prof, inst.graph.m)
    sh = proto.shares(prof)
    for e, l in enumerate(loads):
        if not l:
            continue
        users = sorted(p.id for p, path in zip(inst.players, prof) if e in path)
        lead = proto.annotations.psi_edge[e] if proto.opt.contains(e, l) else inst.costs[e](l)
        assert sh.get(users[0], e) == lead
        assert len({sh.get(u, e) for u in users[1:]}) <= 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4), st.integers(0, 2**32))
def test_nwa_leader_pays_little(gseed, n, seed):
    inst = random_instance(GenParams("dag", gseed, n_players=n, n_max=4, max_profiles=5000))
    nwa = NeverWalkAlone(inst)
    prof = _random_profile(inst, random.Random(seed))
    loads = load_vector(prof, inst.graph.m)
    sh = nwa.shares(prof)
    for e, l in enumerate(loads):
        users = sorted(p.id for p, path in zip(inst.players, prof) if e in path)
        if l < 2:
            continue
        lead = sh.get(users[0], e)
        assert 0 < lead <= nwa.const.w[e] * nwa.const.eps
        for u in users[1:]:
            assert sh.get(u, e) == nwa.zeta(e, l) >= lead
