from fractions import Fraction as F
import json

import pytest
from hypothesis import given, strategies as st

from treetop.errors import BadParams, SchemaError, UnknownNode
from treetop.interval import Interval
from treetop.tree import (
    AffineMap,
    IntSeq,
    Node,
    Pair,
    SuccFamily,
    Tree,
    chain_tree,
    gamma_h,
    gen_tree,
    index_tree,
    is_antichain,
    replace_node,
    tree_from_parents,
    validate_tree,
)
from treetop.woset import EMPTY, Omega, OrdinalRep, WOSet, is_initial_segment, order_type


def S(*xs):
    return WOSet.of(*xs)


def payload_set(tree):
    return {tree.payload(t) for t in tree.ids()}


# -- validation ---------------------------------------------------------------


def test_chain_of_three_is_valid():
    assert validate_tree(chain_tree(3)).ok


def test_two_parentless_nodes():
    rep = validate_tree(tree_from_parents({0: None, 1: None}))
    assert "two minimal elements" in rep.kinds()


def test_mutated_payload_breaks_order():
    t = gen_tree("sigma-q", 2, 2)
    leaf = t.leaves()[0]
    nodes = [replace_node(n, payload=S(5)) if n.id == leaf else n for n in t.nodes()]
    rep = validate_tree(t.with_nodes(nodes))
    assert "payload order" in rep.kinds()


def test_cycle_is_reported():
    t = Tree([Node(0, None), Node(1, 2), Node(2, 1)])
    rep = validate_tree(t)
    assert not rep.ok


def test_overlapping_families_reported():
    fams = {0: [SuccFamily(Interval(F(0), F(2))), SuccFamily(Interval(F(1), F(3)))]}
    t = Tree([Node(0, None, EMPTY)], families=fams)
    assert "overlapping families" in validate_tree(t).kinds()


def test_empty_family_interval_reported():
    fams = {0: [SuccFamily(Interval(F(1), F(1)))]}
    t = Tree([Node(0, None, EMPTY)], families=fams)
    assert "empty family interval" in validate_tree(t).kinds()


# -- structure ------------------------------------------------------------------


def test_unknown_node():
    with pytest.raises(UnknownNode):
        chain_tree(2).height(7)
    with pytest.raises(UnknownNode):
        is_antichain(chain_tree(2), [0, 9])


def test_meet_and_order_in_small_tree():
    t = tree_from_parents({0: None, 1: 0, 2: 0, 3: 1, 4: 1})
    assert t.meet(3, 4) == 1
    assert t.meet(3, 2) == 0
    assert t.lt(0, 3) and not t.lt(3, 3) and t.le(3, 3)
    assert not t.comparable(2, 3)
    assert sorted(t.up_set(1)) == [1, 3, 4]


def test_heights_on_a_chain():
    t = chain_tree(3)
    assert t.height(0) == OrdinalRep(0, 0)
    assert t.height(2) == OrdinalRep(0, 2)


def test_height_of_omega_run_node():
    t = Tree([Node(0, None, EMPTY), Node(1, 0, WOSet([Omega(F(0), F(1))]), limit=True)])
    assert t.height(1) == OrdinalRep(1, 0)


@pytest.mark.parametrize("depth, branching", [(2, 2), (3, 2), (2, 3)])
def test_heights_match_order_types(depth, branching):
    t = gen_tree("sigma-q", depth, branching, limits=True)
    for u in t.ids():
        assert t.height(u) == order_type(t.payload(u))


@pytest.mark.parametrize("nodes, expected", [([], True), ([1, 2], True), ([0, 1], False)])
def test_is_antichain_examples(nodes, expected):
    t = tree_from_parents({0: None, 1: 0, 2: 0})
    assert is_antichain(t, nodes) is expected


def test_antichain_agrees_with_brute_comparability():
    t = gen_tree("sigma-q", 3, 2)
    ids = t.ids()
    for a in ids:
        for b in ids:
            # comparable iff one payload extends the other
            pa, pb = t.payload(a), t.payload(b)
            brute = is_initial_segment(pa, pb) or is_initial_segment(pb, pa)
            assert is_antichain(t, [a, b]) == (a == b or not brute)


# -- generators ------------------------------------------------------------------


def test_sigma_q_depth_one():
    assert payload_set(gen_tree("sigma-q", 1, 2)) == {EMPTY, S(0), S(1)}


def test_sigma_q_depth_zero_is_a_root():
    t = gen_tree("sigma-q", 0, 3)
    assert len(t) == 1 and t.payload(0) == EMPTY


@pytest.mark.parametrize("depth, branching, size", [(2, 2, 7), (3, 3, 40), (4, 3, 121)])
def test_sigma_q_sizes(depth, branching, size):
    assert len(gen_tree("sigma-q", depth, branching)) == size


def test_sigma_q_grid_denominator():
    t = gen_tree("sigma-q", 2, 2, grid=2)
    assert S(0, F(1, 2)) in payload_set(t)


def test_frontier_markers_on_last_level():
    t = gen_tree("sigma-q", 2, 2)
    assert {u for u in t.ids() if t.is_frontier(u)} == set(t.leaves())


@given(st.integers(0, 3), st.integers(1, 3), st.integers(1, 3), st.booleans())
def test_sigma_q_children_add_one_point_above(depth, branching, grid, limits):
    t = gen_tree("sigma-q", depth, branching, grid, limits)
    assert validate_tree(t).ok
    for u in t.ids():
        p = t.parent(u)
        if p is None or t.node(u).limit:
            continue
        parent, child = t.payload(p), t.payload(u)
        new = [q for q in child.elements() if q not in parent]
        assert len(new) == 1 and new[0] >= parent.sup()
        assert is_initial_segment(parent, child)


def test_gen_tree_rejects_bad_params():
    with pytest.raises(BadParams):
        gen_tree("sigma-q", -1, 2)
    with pytest.raises(BadParams):
        gen_tree("sigma-q", 2, 0)
    with pytest.raises(BadParams):
        gen_tree("nonsense", 2, 2)


def test_gamma_depth_one():
    t = gen_tree("gamma", 1, grid=2)
    seqs = {t.payload(u).seq: t.labels["h"][u] for u in t.ids()}
    assert seqs == {(): 0, (0,): 1, (1,): F(1, 2)}


def test_gamma_sequences_are_one_to_one():
    t = gen_tree("gamma", 3, grid=3)
    for u in t.ids():
        seq = t.payload(u).seq
        assert len(set(seq)) == len(seq)
    # 1 + 3 + 6 + 6 injective words over three letters
    assert len(t) == 16


@given(st.integers(1, 3), st.integers(1, 4))
def test_gamma_label_strictly_increasing(depth, grid):
    t = gen_tree("gamma", depth, grid=grid)
    h = t.labels["h"]
    for u in t.ids():
        for a in t.ancestors(u):
            assert h[a] < h[u]


def test_gamma_h_by_hand():
    assert gamma_h((0, 2)) == F(5, 4)


def test_index_trees():
    assert len(index_tree("S2", 0)) == 3
    assert len(index_tree("cantor", 2)) == 7
    with pytest.raises(BadParams):
        index_tree("bogus", 1)


# -- families and serialization -------------------------------------------------


def test_affine_infimum():
    m = AffineMap(F(1), F(-2))
    assert m.inf_over(Interval(F(2), float("inf"))) == 0
    assert AffineMap(F(-1), F(0)).inf_over(Interval(F(0), F(3), hi_closed=True)) == -3
    assert AffineMap(F(-1), F(0)).inf_over(Interval(F(0), float("inf"))) == float("-inf")


def test_json_roundtrip_with_families_and_pairs():
    fams = {0: [SuccFamily(Interval(F(0), float("inf")), value=AffineMap(F(1), F(0)))]}
    nodes = [Node(0, None, EMPTY), Node(1, 0, S(0), frontier=True),
             Node(2, 1, Pair(1, (0, 1), Interval(F(0), F(1)))), Node(3, 0, IntSeq((2,)))]
    t = Tree(nodes, families=fams, meta={"kind": "demo"})
    back = Tree.from_json(json.loads(t.dumps()))
    assert back.dumps() == t.dumps()
    assert back.payload(2) == t.payload(2)
    assert back.is_frontier(1)


@pytest.mark.parametrize("obj", [
    {"nodes": []},
    {"nodes": [{"id": 0, "parent": None, "payload": {"weird": 1}}]},
    {"edges": []},
])
def test_schema_errors(obj):
    with pytest.raises(SchemaError):
        Tree.from_json(obj)


def test_dot_export():
    dot = chain_tree(3).to_dot()
    assert dot.count("->") == 2
    dot = gen_tree("sigma-q", 1, 2).to_dot()
    assert "style=dashed" in dot and "{0}" in dot
