import itertools
from decimal import Decimal, getcontext
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costshare.costs import classify
from costshare.equilibrium import brute_force_optimum, is_nash
from costshare.errors import BadParams, KTooSmall
from costshare.graph import enumerate_paths
from costshare.instances import (GenParams, gen_dag_convex_lb, gen_multicast_const_lb,
                                 gen_multicast_convex_lb, gen_overcharge_lb, gen_static_share_lb,
                                 harmonic, random_instance, static_share_lstar)
from costshare.protocols import EqualSplit
from costshare.rat import parse_rat, rational_sqrt
from costshare.routing import OptTable, profile_cost


def naive_optimum(inst):
    spaces = [enumerate_paths(inst.graph, p.source, p.sink) for p in inst.players]
    return min(profile_cost(prof, inst.costs) for prof in itertools.product(*spaces))


def edges_between(g, hops):
    return tuple(e.id for e in g.edges if (e.tail, e.head) in hops)


# ---- hub network ---------------------------------------------------------

def test_multicast_const_shape():
    inst = gen_multicast_const_lb(5, 1)
    assert len(inst.graph.vertices) == 7 and inst.graph.m == 11
    assert inst.multicast and not inst.symmetric


def test_multicast_const_costs():
    inst = gen_multicast_const_lb(5, 1)
    assert naive_optimum(inst) == 1
    direct = tuple((2 * i,) for i in range(5))
    assert profile_cost(direct, inst.costs) == 5
    assert is_nash(inst, EqualSplit(inst), direct)[0]


@pytest.mark.parametrize("c", [F(1, 2), F(1), F(3)])
def test_multicast_const_single(c):
    assert naive_optimum(gen_multicast_const_lb(1, c)) == min(1, c)


def test_multicast_const_sqrt_hub():
    root = rational_sqrt(25, 12)
    inst = gen_multicast_const_lb(25, root)
    assert inst.costs[-1](1) == 5
    direct = tuple((2 * i,) for i in range(25))
    ok, _ = is_nash(inst, EqualSplit(inst), direct)
    assert ok


def test_multicast_const_bad_params():
    with pytest.raises(BadParams):
        gen_multicast_const_lb(0, 1)
    with pytest.raises(BadParams):
        gen_multicast_const_lb(3, 0)


# ---- zig-zag ladder ------------------------------------------------------

def test_dag_convex_facts():
    inst = gen_dag_convex_lb(4)
    assert inst.n == inst.n_max == 5
    assert naive_optimum(inst) == 5
    assert naive_optimum(inst.with_n_players(4)) == 1
    straight = tuple(edges_between(inst.graph, {(0, 2 * i + 1), (2 * i + 1, 2 * i), (2 * i, 1)})
                     for i in range(1, 5))
    assert profile_cost(straight, inst.costs) == 4


def test_dag_convex_capacity():
    inst = gen_dag_convex_lb(3)
    assert all(c(2) == c(3) and not c.finite for c in inst.costs)


# ---- Braess network ------------------------------------------------------

def test_overcharge_constant_precision():
    getcontext().prec = 40
    true = (Decimal(33).sqrt() - 1) / 8
    q = parse_rat(gen_overcharge_lb(12).metadata["q"])
    assert abs(Decimal(q.numerator) / Decimal(q.denominator) - true) < Decimal(10) ** -12


def test_overcharge_facts():
    inst = gen_overcharge_lb(12)
    q = parse_rat(inst.metadata["q"])
    assert naive_optimum(inst) == 2 * q + 1
    assert naive_optimum(inst.with_n_players(2)) == 1
    assert abs((q + 2) / (2 * q + 1) - 2 * q) < F(1, 10 ** 9)
    assert abs(float(2 * q + 1) - 2.186) < 1e-3


def test_overcharge_digits():
    with pytest.raises(BadParams):
        gen_overcharge_lb(5)


# ---- static-share network ------------------------------------------------

@pytest.fixture(scope="module")
def static6():
    return gen_static_share_lb(6)


def test_static_share_shape(static6):
    assert static6.graph.m == 4 + 64
    assert static6.n_max == 64 * 64 * 36
    assert static6.metadata["r"] == 64


def test_static_share_c1(static6):
    c1 = static6.costs[4]
    for l in (1, 7, 100):
        assert c1(l) == F(l, 36) + F(1, 10 ** 16)


def test_static_share_cj(static6):
    j = 5
    cj = static6.costs[3 + j]
    assert cj(3) == F(3, j * 36) + harmonic(j - 1) / 6 + j * F(1, 10 ** 16)


def test_static_share_ordering(static6):
    c = static6.costs
    for j in (1, 2, 17, 63):
        for l in range(1, (j + 1) * 6 + 1):
            assert c[3 + j](l) < c[4 + j](l)


def test_static_share_small_loads(static6):
    opt = OptTable(static6)
    for l in range(1, 7):
        assert opt.path(l) == (0, 3)


def test_static_share_lstar(static6):
    lstar = static6.metadata["lstar"]
    cr = static6.costs[-1]
    assert cr(lstar) > 6 >= cr(lstar - 1)
    assert lstar == static_share_lstar(6)


def test_static_share_k_too_small():
    with pytest.raises(KTooSmall):
        gen_static_share_lb(5)


# ---- two-source ladder ---------------------------------------------------

def test_multicast_convex_facts():
    inst = gen_multicast_convex_lb(4)
    assert parse_rat(inst.metadata["sqrt_n"]) == 2
    assert brute_force_optimum(inst)[1] == naive_optimum(inst) == 6
    assert naive_optimum(inst.with_players([(1, 2)])) == 1


def test_multicast_convex_approx_root():
    inst = gen_multicast_convex_lb(5, players=[(1, 2)])
    root = parse_rat(inst.metadata["sqrt_n"])
    assert abs(root * root - 5) < F(1, 10 ** 11)


# ---- random instances ----------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["dag", "spg"]),
       st.sampled_from(["concave", "strictly-concave", "convex", "constant"]))
def test_random_deterministic_and_shaped(seed, family, shape):
    p = GenParams(family, seed, n_players=2, n_max=4, shape=shape)
    a, b = random_instance(p), random_instance(p)
    assert a == b
    flag = {"concave": "concave", "strictly-concave": "strictly_concave",
            "convex": "convex", "constant": "constant"}[shape]
    assert all(getattr(classify(c), flag) for c in a.costs)
    if family == "spg":
        assert a.sp_tree.root.edges == frozenset(range(a.graph.m))
        assert (a.sp_tree.root.source, a.sp_tree.root.sink) == a.terminals


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_random_multicast(seed, n):
    inst = random_instance(GenParams("dag", seed, n_players=n, mode="multicast"))
    assert inst.multicast and inst.n == n


def test_random_profile_cap():
    inst = random_instance(GenParams("dag", 3, n_players=3, max_profiles=10))
    count = 1
    for p in inst.players:
        count *= len(enumerate_paths(inst.graph, p.source, p.sink))
    assert count <= 10


def test_random_bad_params():
    with pytest.raises(BadParams):
        random_instance(GenParams("grid"))
    with pytest.raises(BadParams):
        random_instance(GenParams("spg", mode="multicast"))
    with pytest.raises(BadParams):
        random_instance(GenParams(n_players=3, n_max=2))


def test_generators_pure():
    assert gen_static_share_lb(6) == gen_static_share_lb(6)
    assert gen_overcharge_lb(12) == gen_overcharge_lb(12)


def test_static_share_orderings_exact():
    from costshare.verify import static_share_inequalities
    bad = static_share_inequalities(6, 4000)
    # only the c_0 comparison breaks, and exactly once c_1 passes the cap k = 6
    assert {(w, j) for w, j, _ in bad} == {("3", 1)}
    assert [l for _, _, l in bad] == list(range(216, 4001))
