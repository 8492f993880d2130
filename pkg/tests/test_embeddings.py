from fractions import Fraction as F
import random

import pytest
from hypothesis import given, strategies as st

from trees import random_labelled_tree
from treetop.embeddings import (
    EmbeddingWitness,
    IncreasingRun,
    Witness,
    close_image,
    countably_branching_expansion,
    dyadic_pick,
    embed_into_sigmaQ,
    kurepa_refute,
    ring_index,
    special_decomposition,
    verify_embedding,
)
from treetop.errors import CandidateNotRational, NotStrict, PartialLabel, PickExhausted, PreconditionFailed
from treetop.labels import OrderLabel, phi_label, verify_order_label
from treetop.tree import Node, Pair, Tree, chain_tree, gen_tree, is_antichain, tree_from_parents
from treetop.woset import EMPTY, Omega, WOSet, is_initial_segment

seeds = st.integers(0, 2**32 - 1)


def S(*xs):
    return WOSet.of(*xs)


def label(values):
    return OrderLabel("Q", {t: F(v) for t, v in values.items()})


# -- order labels ---------------------------------------------------------------------


def test_constant_label_strictness():
    t = chain_tree(2)
    f = label({0: 1, 1: 1})
    assert verify_order_label(t, f, strict=False) is None
    v = verify_order_label(t, f, strict=True)
    assert (v.s, v.t) == (0, 1)


def test_partial_label_rejected():
    with pytest.raises(PartialLabel):
        verify_order_label(chain_tree(2), label({0: 0}))


def test_phi_label_is_strict_on_sigma_q():
    t = gen_tree("sigma-q", 3, 2)
    assert verify_order_label(t, phi_label(t), strict=True) is None


# -- dyadic picks ------------------------------------------------------------------------


def test_pick_prefers_the_label_itself():
    assert dyadic_pick(F(0), F(1), set()) == 1


def test_pick_avoids_used_values():
    q = dyadic_pick(F(0), F(1), {F(1)})
    assert 0 < q < 1 and q == F(1, 2)


@given(st.fractions(-5, 5), st.fractions(F(1, 64), 4), st.integers(0, 6))
def test_pick_stays_in_window(lo, width, n_used):
    hi = lo + width
    used = set()
    for _ in range(n_used):
        q = dyadic_pick(lo, hi, used)
        assert lo < q <= hi and q not in used
        used.add(q)


def test_pick_exhaustion():
    with pytest.raises(PickExhausted):
        dyadic_pick(F(1), F(1), set(), include_hi=False)


# -- the embedding ----------------------------------------------------------------------


def test_embed_chain():
    t = chain_tree(3)
    w = embed_into_sigmaQ(t, label({0: 0, 1: 1, 2: 2}))
    assert [w[i] for i in range(3)] == [EMPTY, S(1), S(1, 2)]


def test_embed_single_root():
    t = chain_tree(1)
    assert embed_into_sigmaQ(t, label({0: 5})).psi == {0: EMPTY}


def test_embed_equal_siblings():
    t = tree_from_parents({0: None, 1: 0, 2: 0})
    w = embed_into_sigmaQ(t, label({0: 0, 1: 1, 2: 1}))
    assert (w[1], w[2]) == (S(1), S(F(1, 2)))


def test_embed_needs_strict_label():
    with pytest.raises(NotStrict):
        embed_into_sigmaQ(chain_tree(2), label({0: 1, 1: 1}))


def test_embed_limit_node_gets_a_run():
    t = Tree([Node(0, None), Node(1, 0, limit=True), Node(2, 1)])
    w = embed_into_sigmaQ(t, label({0: 0, 1: 1, 2: 2}))
    assert isinstance(w[1].blocks[-1], Omega) and w[1].sup() == 1
    assert verify_embedding(t, label({0: 0, 1: 1, 2: 2}), w).ok


@given(seeds)
def test_embedding_invariants(seed):
    t, f = random_labelled_tree(random.Random(seed), 30)
    w = embed_into_sigmaQ(t, f)
    assert w.properties == {"order_both_ways": True, "sup_bound": True, "initial_image": True}
    # brute re-check of the order, independent of the verifier
    for s in t.ids():
        for u in t.ids():
            assert t.le(s, u) == is_initial_segment(w[s], w[u])
        assert w[s].sup() <= f[s] or w[s] == EMPTY


def test_verifier_catches_a_broken_witness():
    t = chain_tree(3)
    f = label({0: 0, 1: 1, 2: 2})
    w = embed_into_sigmaQ(t, f)
    bad = EmbeddingWitness({0: EMPTY, 1: S(1), 2: S(2)})
    assert "order" in verify_embedding(t, f, bad).kinds()
    too_big = EmbeddingWitness({**w.psi, 2: S(1, 3)})
    assert "sup bound" in verify_embedding(t, f, too_big).kinds()


# -- closing the image ------------------------------------------------------------------


def test_close_image_without_limits_is_identity():
    t = chain_tree(3)
    w = embed_into_sigmaQ(t, label({0: 0, 1: 1, 2: 2}))
    assert close_image(w, t).psi == w.psi


def test_close_image_on_root_only():
    t = chain_tree(1)
    w = EmbeddingWitness({0: EMPTY})
    assert close_image(w, t).psi == {0: EMPTY}


def test_close_image_drops_padding_after_a_run():
    t = Tree([Node(0, None), Node(1, 0, limit=True), Node(2, 1)])
    run = WOSet([Omega(F(0), F(1))])
    padded = EmbeddingWitness({0: EMPTY, 1: run.extend(5), 2: run.extend(5).extend(6)})
    closed = close_image(padded, t)
    assert closed[1] == run
    assert closed[2] == run.extend(6)
    assert close_image(closed, t).psi == closed.psi


# -- countably branching expansion -----------------------------------------------


def test_ring_index_examples():
    assert ring_index(F(0), F(2)) == 1
    assert ring_index(F(0), F(1, 2)) == 2
    assert ring_index(F(0), F(1, 3)) == 3


def test_expansion_of_a_leaf_is_unchanged():
    t = chain_tree(1)
    out, g = countably_branching_expansion(t, label({0: 0}))
    assert len(out) == 1 and g[0] == 0


def test_expansion_rings_example():
    t = tree_from_parents({0: None, 1: 0, 2: 0})
    out, g = countably_branching_expansion(t, label({0: 0, 1: F(1, 2), 2: 2}))
    ring_of = {x: out.payload(out.parent(x)).index for x in (1, 2)}
    assert ring_of == {1: (2,), 2: (1,)}
    assert verify_order_label(out, g, strict=True) is None


@given(seeds, st.integers(1, 6))
def test_expansion_is_strict_and_binary(seed, depth):
    t, f = random_labelled_tree(random.Random(seed), 25)
    out, g = countably_branching_expansion(t, f, depth)
    assert verify_order_label(out, g, strict=True) is None
    for u in out.ids():
        node = out.node(u)
        if isinstance(node.payload, Pair) and not node.frontier:
            # halving nodes split in two; ring nodes may also hold one member
            assert len(out.children(u)) <= 2
    # the original order survives
    for a in t.ids():
        for b in t.ids():
            assert t.le(a, b) == out.le(a, b)


@given(seeds)
def test_expansion_then_embedding(seed):
    t, f = random_labelled_tree(random.Random(seed), 25)
    out, g = countably_branching_expansion(t, f)
    w = embed_into_sigmaQ(out, g)
    assert all(w.properties.values())


# -- special decomposition --------------------------------------------------------


def test_decomposition_of_a_chain():
    t = chain_tree(3)
    d = special_decomposition(t, label({0: 0, 1: 1, 2: 2}), {0: 1, 1: 1, 2: 1})
    assert d.antichains == [{0}, {1}, {2}]


def test_decomposition_of_a_fan():
    t = tree_from_parents({0: None, 1: 0, 2: 0, 3: 0})
    d = special_decomposition(t, label({0: 0, 1: 1, 2: 1, 3: 1}), {u: 1 for u in range(4)})
    assert d.antichains == [{0}, {1, 2, 3}]


def test_decomposition_needs_positive_eps():
    t = chain_tree(2)
    with pytest.raises(PreconditionFailed):
        special_decomposition(t, label({0: 0, 1: 1}), {0: 0, 1: 1})


def test_decomposition_needs_spread():
    t = chain_tree(2)
    with pytest.raises(PreconditionFailed) as exc:
        special_decomposition(t, label({0: 0, 1: F(1, 2)}), {0: 1, 1: 1})
    assert exc.value.witness == (0, 1)


@given(seeds)
def test_decomposition_covers_by_antichains(seed):
    t, f = random_labelled_tree(random.Random(seed), 30)
    # the least gap above each node is a valid eps
    eps = {}
    for u in t.ids():
        gaps = [f[s] - f[u] for s in t.up_set(u) if s != u]
        eps[u] = min(gaps) if gaps else F(1)
        if eps[u] == 0:
            eps[u] = F(1)
    d = special_decomposition(t, f, eps)
    seen = set()
    for a in d.antichains:
        assert is_antichain(t, a)
        assert not (seen & a)
        seen |= a
    assert seen == set(t.ids())


# -- Kurepa refuter ----------------------------------------------------------------


def test_refute_zero():
    out = kurepa_refute("zero")
    assert out == Witness(EMPTY, S(0), 1)


def test_refute_capped():
    out = kurepa_refute("sup-plus-one-capped:10")
    assert out == Witness(S(*range(10)), S(*range(11)), 11)


@pytest.mark.parametrize("steps", [5, 32])
def test_uncapped_run_keeps_increasing(steps):
    out = kurepa_refute("sup-plus-one", steps)
    assert isinstance(out, IncreasingRun) and len(out.sets) == steps
    for a, b in zip(out.sets, out.sets[1:]):
        assert is_initial_segment(a, b) and a != b
    assert out.sets[4] == S(0, 1, 2, 3)


def test_limit_stage_gives_a_witness():
    # values close in on 1 geometrically: the union stage sees a value
    # already reached by an approach stage
    out = kurepa_refute("halfway:1", 32)
    assert isinstance(out, Witness)
    assert is_initial_segment(out.s, out.t) and out.s != out.t


def test_custom_candidate_and_bad_outputs():
    out = kurepa_refute(lambda t: F(len(t) % 3), 10)
    assert isinstance(out, Witness)
    with pytest.raises(CandidateNotRational):
        kurepa_refute(lambda t: 0.5, 3)
    with pytest.raises(ValueError):
        kurepa_refute("no-such-rule")
