from fractions import Fraction as F
import random

import pytest
from hypothesis import given, strategies as st

from trees import random_labelled_tree
from treetop.embeddings import countably_branching_expansion, special_decomposition
from treetop.errors import NotMonotone, NotStrict
from treetop.expansions import build_T2
from treetop.interval import Interval
from treetop.labels import OrderLabel, verify_order_label
from treetop.renorming import (
    Bad,
    Good,
    KadecLabel,
    bad_points,
    check_good,
    kadec_gap,
    kadec_value,
    kadec_witness,
    rho_check,
    t2_rho,
)
from treetop.tree import AffineMap, Node, Pair, SuccFamily, Tree, chain_tree, index_tree
from treetop.woset import EMPTY, rational_at

seeds = st.integers(0, 2**32 - 1)
INF = float("inf")


def label(values):
    return OrderLabel("Q", {t: F(v) for t, v in values.items()})


def node_with_family(fam):
    return Tree([Node(0, None, EMPTY)], families={0: [fam]})


# -- bad points --------------------------------------------------------------------


def test_family_approaching_the_label_is_bad():
    fam = SuccFamily(Interval(F(0), F(1), lo_closed=False), value=AffineMap(F(1), F(0)))
    (v,) = bad_points(node_with_family(fam), label({0: 0}))
    assert v == Bad(0, 0, fam)


def test_family_bounded_away_is_good():
    fam = SuccFamily(Interval(F(1, 2), F(1)), value=AffineMap(F(1), F(0)))
    t = node_with_family(fam)
    (v,) = bad_points(t, label({0: 0}))
    assert v == Good(0, F(1, 4), frozenset())
    assert check_good(t, label({0: 0}), v)


def test_finitely_branching_nodes_are_good():
    t = Tree([Node(0, None), Node(1, 0), Node(2, 0)])
    f = label({0: 0, 1: 0, 2: 3})
    v = bad_points(t, f)[0]
    assert isinstance(v, Good) and check_good(t, f, v)
    assert 1 in v.removed


def test_family_below_the_label_is_not_monotone():
    fam = SuccFamily(Interval(F(-1), F(1)), value=AffineMap(F(1), F(0)))
    with pytest.raises(NotMonotone):
        bad_points(node_with_family(fam), label({0: 0}))


def test_decreasing_child_is_not_monotone():
    with pytest.raises(NotMonotone):
        bad_points(chain_tree(2), label({0: 1, 1: 0}))


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_t2_with_zero_label_has_no_bad_points(depth):
    E, _ = build_T2(depth, 2)
    zero = OrderLabel("Q", {u: F(0) for u in E.ids()})
    verdicts = bad_points(E, zero)
    assert not any(isinstance(v, Bad) for v in verdicts)
    assert all(check_good(E, zero, v) for v in verdicts)


@st.composite
def families(draw):
    lo = draw(st.fractions(-4, 4, max_denominator=8))
    width = draw(st.fractions(F(1, 8), 4, max_denominator=8))
    hi = draw(st.sampled_from([lo + width, INF]))
    alpha = draw(st.sampled_from([F(1), F(2), F(1, 2)]))
    iv = Interval(lo, hi, draw(st.booleans()), False)
    beta = draw(st.fractions(-4, 4, max_denominator=8))
    return SuccFamily(iv, value=AffineMap(alpha, beta))


@given(families(), st.fractions(F(1, 16), 2, max_denominator=16))
def test_raising_a_family_never_hurts(fam, delta):
    t = node_with_family(fam)
    inf = fam.value.inf_over(fam.interval)
    f = label({0: inf if inf != -INF else -100})
    before = bad_points(t, f)[0]
    raised = SuccFamily(fam.interval, value=AffineMap(fam.value.alpha, fam.value.beta + delta))
    after = bad_points(node_with_family(raised), f)[0]
    assert isinstance(before, Bad)
    assert isinstance(after, Good) and check_good(node_with_family(raised), f, after)
    again = SuccFamily(fam.interval, value=AffineMap(fam.value.alpha, fam.value.beta + 2 * delta))
    assert isinstance(bad_points(node_with_family(again), f)[0], Good)


@given(seeds)
def test_good_verdicts_self_certify(seed):
    t, f = random_labelled_tree(random.Random(seed), 30)
    for v in bad_points(t, f):
        assert isinstance(v, Good) and check_good(t, f, v)


# -- Kadec relabelling ---------------------------------------------------------------


def test_kadec_value_by_brute_force():
    # h(q) sums 2^-(n+1) over the enumerated rationals below q
    q = F(1, 2)
    brute = sum(F(1, 2 ** (n + 1)) for n in range(64) if rational_at(n) < q)
    assert kadec_value(q).lo == brute
    assert kadec_gap(F(1, 2)) == F(1, 16)


def test_kadec_on_a_chain():
    t = chain_tree(2)
    k = kadec_witness(t, label({0: 0, 1: 1}))
    assert k[0].hi < k[1].lo
    assert all(isinstance(v, Good) for v in bad_points(t, k))


def test_kadec_single_node():
    k = kadec_witness(chain_tree(1), label({0: 3}))
    assert bad_points(chain_tree(1), k) == [Good(0, kadec_gap(F(3)) / 2, frozenset())]


def test_kadec_needs_strict_label():
    with pytest.raises(NotStrict):
        kadec_witness(chain_tree(2), label({0: 0, 1: 0}))


def test_kadec_survives_approaching_families():
    # successors approach f(t) from above in Q; after relabelling they
    # stay a full right gap away
    fam = SuccFamily(Interval(F(0), F(1), lo_closed=False), value=AffineMap(F(1), F(0)))
    t = node_with_family(fam)
    k = kadec_witness(t, label({0: 0}))
    (v,) = bad_points(t, k)
    assert isinstance(v, Good) and check_good(t, k, v)


@given(seeds)
def test_kadec_on_random_special_trees(seed):
    rng = random.Random(seed)
    t, f = random_labelled_tree(rng, 20)
    fams = {}
    for u in t.ids():
        if rng.random() < 0.3:
            lo = f[u] + F(rng.randint(0, 3), 4)
            fams[u] = [SuccFamily(Interval(lo, lo + 1, lo_closed=lo != f[u]),
                                  value=AffineMap(F(1), F(0)))]
    t = Tree(t.nodes(), families=fams)
    k = kadec_witness(t, f)
    assert isinstance(k, KadecLabel)
    assert verify_order_label(t, k, strict=True) is None
    assert not any(isinstance(v, Bad) for v in bad_points(t, k))


@given(seeds)
def test_kadec_after_binary_expansion_is_strict(seed):
    t, f = random_labelled_tree(random.Random(seed), 20)
    E, g = countably_branching_expansion(t, f, 4)
    assert verify_order_label(E, kadec_witness(E, g), strict=True) is None


@given(seeds)
def test_good_verdicts_feed_the_special_decomposition(seed):
    rng = random.Random(seed)
    t, f = random_labelled_tree(rng, 25)
    gvals = {0: F(0)}
    for u in t.bfs()[1:]:
        gvals[u] = gvals[t.parent(u)] + F(rng.randint(1, 4), rng.choice((1, 2, 4)))
    g = OrderLabel("Q", gvals)
    verdicts = bad_points(t, g)
    assert all(isinstance(v, Good) and not v.removed for v in verdicts)
    h = OrderLabel("Q", {u: f[u] + g[u] for u in t.ids()})
    d = special_decomposition(t, h, {v.node: v.eps for v in verdicts})
    assert set().union(*d.antichains) == set(t.ids())


# -- rho criterion -----------------------------------------------------------------------


def test_rho_on_t2_follows_left_branches():
    E, _ = build_T2(2, 3)
    rho = t2_rho(E)
    rep = rho_check(E, rho, cantor_depth=4)
    assert rep.ok and rep.cantor_constant is None
    for u in E.ids():
        p = E.payload(u)
        if isinstance(p, Pair):
            continue
        same = {s for s in E.up_set(u) if rho.compare(s, u) == 0}
        expected = {u} | {s for s in same if isinstance(E.payload(s), Pair)
                          and E.payload(s).base == u and set(E.payload(s).index) == {0}}
        assert same == expected


def test_injective_rho_has_singleton_up_sets():
    t = chain_tree(4)
    rep = rho_check(t, label({i: i for i in range(4)}))
    assert rep.ok and all(rep.chains.values())


def test_constant_rho_on_a_binary_tree():
    t = index_tree("cantor", 4)
    rep = rho_check(t, OrderLabel("Q", {u: F(0) for u in t.ids()}), cantor_depth=4)
    assert rep.cantor_constant is not None and len(rep.cantor_constant) == 31
    assert not rep.ok and rep.note == "refutation-only"
    shallow = index_tree("cantor", 3)
    rep = rho_check(shallow, OrderLabel("Q", {u: F(0) for u in shallow.ids()}), cantor_depth=4)
    assert rep.cantor_constant is None


def test_rho_counts_bad_points():
    fam = SuccFamily(Interval(F(0), F(1), lo_closed=False), value=AffineMap(F(1), F(0)))
    t = Tree([Node(0, None), Node(1, 0)], families={0: [fam], 1: [fam]})
    f = label({0: 0, 1: 0})
    rep = rho_check(t, label({0: 0, 1: 0}), f=f)
    assert rep.bad_counts[0] == 2 and not rep.ok


def test_rho_must_be_monotone():
    with pytest.raises(NotMonotone):
        rho_check(chain_tree(2), label({0: 1, 1: 0}))


def test_huge_gaps_stay_symbolic():
    from treetop.renorming import Pow2
    q = F(200)  # its enumeration index has about 200 bits
    gap = kadec_gap(q)
    assert isinstance(gap, Pow2)
    assert F(0) < gap / 2 < gap < F(1, 2**4096)
    t = chain_tree(2)
    k = kadec_witness(t, label({0: 200, 1: 201}))
    v = bad_points(t, k)[0]
    assert check_good(t, k, v) and str(v.eps).startswith("2^-")
