"""S-expansions of trees and the concrete expanded trees T1, T2 and Upsilon.

An expansion inserts a copy of a small index tree S above each node t.  The
copy's nodes <t, s> govern a nested partition D_s(t) of the successors of t,
and each successor r is re-attached above the deepest <t, s> whose part
contains it.

For the trees built on well-ordered sets, parts are rational intervals and
r = t | {q} lies in D_s(t) iff q lies in I_s(t).  The matching set family is

    A_<t,s> = {x in A_t : inf(x - t) in I_s(t)}

with inf of the empty set taken as +inf.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import BadParams, InvalidScheme, NotBaseLabeled
from .interval import Interval
from .labels import OrderLabel
from .report import Report
from .setfamily import Closed, ClosedIn, RelOpenIn, SetFamily
from .tree import IntSeq, Node, Pair, Tree, gen_tree, index_tree
from .woset import NEG_INF, POS_INF, WOSet, is_initial_segment, rat

# ---------------------------------------------------------------------------
# partition schemes


def successor_param(tree: Tree, t: int, r: int):
    """The first element r's payload adds above t's payload."""
    pt, pr = tree.payload(t), tree.payload(r)
    if isinstance(pt, WOSet) and isinstance(pr, WOSet):
        return pr.first_above(pt.sup(), strict=pt.sup_attained())
    return None


@dataclass
class PartitionScheme:
    """Per node t: S-index -> frozenset of child ids or an Interval."""

    parts: dict

    def get(self, t) -> dict:
        return self.parts.get(t, {})


def _resolve(tree: Tree, t: int, desc) -> frozenset:
    if isinstance(desc, Interval):
        return frozenset(r for r in tree.children(t)
                         if (q := successor_param(tree, t, r)) is not None and desc.contains(q))
    return frozenset(desc)


def _s_le(a: tuple, b: tuple) -> bool:
    return b[:len(a)] == a


def validate_partition_scheme(T: Tree, S: Tree, D: PartitionScheme) -> Report:
    rep = Report("partition_scheme")
    indices = [S.payload(i).seq for i in S.ids()]
    for t in T.ids():
        parts = D.get(t)
        if not parts:
            continue
        kids = frozenset(T.children(t))
        if () in parts and _resolve(T, t, parts[()]) != kids:
            rep.add("root part is not suc", node=t)
        for s in parts:
            if s not in indices:
                rep.add("unknown index", node=t, index=list(s))
        resolved = {s: _resolve(T, t, d) for s, d in parts.items()}
        for s, ds in resolved.items():
            if not ds <= kids:
                rep.add("foreign successor", node=t, index=list(s))
        keys = sorted(parts)
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                da, db = parts[a], parts[b]
                if _s_le(a, b) or _s_le(b, a):
                    lo, hi = (a, b) if _s_le(a, b) else (b, a)
                    dl, dh = parts[lo], parts[hi]
                    if isinstance(dl, Interval) and isinstance(dh, Interval):
                        ok = dh.is_subset(dl)
                    else:
                        ok = resolved[hi] <= resolved[lo]
                    if not ok:
                        rep.add("monotonicity", node=t, lower=list(lo), upper=list(hi))
                else:
                    if isinstance(da, Interval) and isinstance(db, Interval):
                        ok = da.is_disjoint(db)
                    else:
                        ok = not (resolved[a] & resolved[b])
                    if not ok:
                        rep.add("incomparable not disjoint", node=t, indices=[list(a), list(b)])
    return rep


def s_expansion(T: Tree, S: Tree, D: PartitionScheme, s_frontier=None) -> Tree:
    """T | (T x (S minus root)) with <t,s> above t and r above the deepest
    <t,s> whose part contains r.  Copies at S-nodes listed in ``s_frontier``
    are marked frontier: their parts would be refined further."""
    rep = validate_partition_scheme(T, S, D)
    if not rep.ok:
        raise InvalidScheme("partition scheme violates the tree-of-sets rules", rep.violations)
    s_frontier = set(s_frontier or ())
    s_nodes = sorted((S.payload(i).seq for i in S.ids()), key=lambda s: (len(s), s))
    nodes = {n.id: n for n in T.nodes()}
    next_id = max(nodes) + 1
    for t in T.ids():
        parts = D.get(t)
        if T.is_frontier(t) or not parts:
            continue
        copy = {(): t}
        for s in s_nodes:
            if not s:
                continue
            desc = parts.get(s)
            iv = desc if isinstance(desc, Interval) else None
            nodes[next_id] = Node(next_id, copy[s[:-1]], Pair(t, s, iv),
                                  frontier=s in s_frontier)
            copy[s] = next_id
            next_id += 1
        resolved = {s: _resolve(T, t, d) for s, d in parts.items()}
        for r in T.children(t):
            deepest = max((s for s in s_nodes if r in resolved.get(s, ())),
                          key=len, default=())
            n = nodes[r]
            nodes[r] = Node(r, copy[deepest], n.payload, n.frontier, n.limit)
    return Tree(nodes.values(), T.families, T.labels, T.meta)


def order_restriction_ok(T: Tree, E: Tree) -> bool:
    ids = T.ids()
    return all(T.le(a, b) == E.le(a, b) for a in ids for b in ids)


# ---------------------------------------------------------------------------
# interval schemes on sigma-Q truncations


def t1_cut(t: WOSet) -> Fraction:
    return Fraction(0) if t.sup() == NEG_INF else t.sup() + 1


def t1_intervals(t: WOSet) -> dict:
    s, r = t.sup(), t1_cut(t)
    # the +inf endpoint is included so that x = t itself lands in I_1
    return {(): Interval(s, POS_INF, lo_closed=s != NEG_INF, hi_closed=True),
            (0,): Interval(s, r, lo_closed=s != NEG_INF),
            (1,): Interval(r, POS_INF, True, True)}


def split_point(iv: Interval) -> Fraction:
    a, b = iv.lo, iv.hi
    if a == NEG_INF and b == POS_INF:
        return Fraction(0)
    if b == POS_INF:
        return a + 1
    if a == NEG_INF:
        return b - 1
    return (a + b) / 2


def t2_intervals(t: WOSet, s_depth: int) -> dict:
    s = t.sup()
    out = {(): Interval(s, POS_INF, lo_closed=s != NEG_INF, hi_closed=True)}
    level = [()]
    for _ in range(s_depth):
        nxt = []
        for idx in level:
            left, right = out[idx].split(split_point(out[idx]))
            out[idx + (0,)] = left
            out[idx + (1,)] = right
            nxt.extend([idx + (0,), idx + (1,)])
        level = nxt
    return out


def _interval_scheme(T: Tree, rule) -> PartitionScheme:
    return PartitionScheme({t: rule(T.payload(t)) for t in T.ids() if not T.is_frontier(t)})


def _with_meta(tree: Tree, kind: str, params: dict) -> Tree:
    return Tree(tree.nodes(), tree.families, tree.labels, {"kind": kind, "params": params})


def build_T1(depth: int, branching: int = 2, grid=1, limits: bool = False):
    """sigma-Q truncation expanded by the three-element binary tree with
    I_0(t) = [sup t, r), I_1(t) = [r, +inf], r = sup t + 1 (r = 0 at the root)."""
    T = gen_tree("sigma-q", depth, branching, grid, limits)
    S = index_tree("S2", 1)
    E = s_expansion(T, S, _interval_scheme(T, t1_intervals))
    E = _with_meta(E, "t1", {**T.meta["params"]})
    return E, expansion_family(E)


def build_T2(depth: int, s_depth: int, grid=1, branching: int = 2):
    """sigma-Q truncation expanded by the binary tree of height s_depth with
    midpoint splits; copies at the last S-level are frontier."""
    if s_depth < 1:
        raise BadParams("s_depth must be >= 1")
    T = gen_tree("sigma-q", depth, branching, grid)
    S = index_tree("cantor", s_depth)
    leaves = {S.payload(i).seq for i in S.ids() if len(S.payload(i).seq) == s_depth}
    E = s_expansion(T, S, _interval_scheme(T, lambda w: t2_intervals(w, s_depth)), leaves)
    E = _with_meta(E, "t2", {**T.meta["params"], "s_depth": s_depth})
    return E, expansion_family(E)


def build_upsilon(depth: int, grid: int = 2) -> Tree:
    """Gamma truncation expanded by the three-element binary tree; the
    successors of t split at the h-threshold h(t) + 2^-depth."""
    G = gen_tree("gamma", depth, grid=grid)
    h = G.labels["h"]
    S = index_tree("S2", 1)
    parts = {}
    for t in G.ids():
        kids = G.children(t)
        if G.is_frontier(t) or not kids:
            continue
        cut = h[t] + Fraction(1, 2**depth)
        parts[t] = {(): frozenset(kids),
                    (0,): frozenset(r for r in kids if h[r] < cut),
                    (1,): frozenset(r for r in kids if h[r] >= cut)}
    E = s_expansion(G, S, PartitionScheme(parts))
    E = Tree(E.nodes(), E.families, {"h": h, "g": lex_label(E, h)},
             {"kind": "upsilon", "params": {"depth": depth, "grid": grid}})
    return E


# ---------------------------------------------------------------------------
# set families of expansion trees


def _constraint(tree: Tree, t: int):
    p = tree.payload(t)
    if isinstance(p, Pair):
        return tree.payload(p.base), p.interval
    return p, None


def descriptor_member(base: WOSet, iv: Optional[Interval], x: WOSet) -> bool:
    if not is_initial_segment(base, x):
        return False
    if iv is None:
        return True
    return iv.contains(x.first_above(base.sup(), strict=base.sup_attained()))


def expansion_family(tree: Tree) -> SetFamily:
    """Descriptor family of a T1/T2 tree, rebuilt from payloads alone."""
    kind = tree.meta.get("kind")
    cons = {t: _constraint(tree, t) for t in tree.ids()}
    for t, (w, _) in cons.items():
        if not isinstance(w, WOSet):
            raise BadParams(f"node {t} has no well-ordered base")

    def member(t, x):
        w, iv = cons[t]
        return descriptor_member(w, iv, x)

    def disjoint(a, b):
        (wa, ia), (wb, ib) = cons[a], cons[b]
        if wa == wb:
            if ia is None or ib is None:
                return False
            return ia.is_disjoint(ib)
        if not is_initial_segment(wa, wb):
            if not is_initial_segment(wb, wa):
                return True
            (wa, ia), (wb, ib) = (wb, ib), (wa, ia)
        # wa is a proper initial segment of wb: inf(x - wa) is pinned
        q0 = wb.first_above(wa.sup(), strict=wa.sup_attained())
        return ia is not None and not ia.contains(q0)

    certs, descriptors = {}, {}
    for t in tree.ids():
        p = tree.payload(t)
        if not isinstance(p, Pair):
            certs[t] = Closed()
            continue
        parent = tree.parent(t)
        if kind == "t1":
            certs[t] = Closed() if p.index[-1] == 1 else RelOpenIn(parent)
        else:
            certs[t] = ClosedIn(parent) if p.index[-1] == 1 else RelOpenIn(parent)
        descriptors[t] = {"base": p.base, "interval": p.interval.to_json(),
                          "certificate": certs[t].to_json()}

    anchors = {}
    for t in tree.ids():
        w, iv = cons[t]
        if iv is not None:
            pts = [e for e in (iv.lo, iv.hi) if e not in (NEG_INF, POS_INF)]
            anchors.setdefault(t, []).extend(pts)
            anchors.setdefault(tree.payload(t).base, []).extend(pts)

    return SetFamily(tree, member, certs, disjoint,
                     base=lambda t: cons[t][0],
                     anchors=lambda t: sorted(set(anchors.get(t, []))),
                     descriptors=descriptors)


# ---------------------------------------------------------------------------
# lexicographic labels


def lex_label(tree: Tree, f: OrderLabel) -> OrderLabel:
    """Base node t -> (f(t), 0); copy <t, s> -> (f(t), |s|)."""
    values = {}
    for t in tree.ids():
        p = tree.payload(t)
        base = p.base if isinstance(p, Pair) else t
        if base not in f.values:
            raise NotBaseLabeled(f"base node {base} has no label")
        rank = len(p.index) if isinstance(p, Pair) else 0
        values[t] = (f.values[base], Fraction(rank))
    return OrderLabel("RlexR", values, certifier=_lex_certifier(tree, f))


def _lex_certifier(tree: Tree, f: OrderLabel):
    if f.certifier is None:
        return None

    def cert(s, t):
        bs, bt = _base_of(tree, s), _base_of(tree, t)
        if bs == bt:
            return False
        return f.certifier(bs, bt)

    return cert


def _base_of(tree: Tree, t: int) -> int:
    p = tree.payload(t)
    return p.base if isinstance(p, Pair) else t


def base_nodes(tree: Tree) -> list:
    return [t for t in tree.ids() if not isinstance(tree.payload(t), Pair)]


def restrict_label(tree: Tree, f: OrderLabel) -> OrderLabel:
    """f restricted to the base nodes of an expansion."""
    keep = set(base_nodes(tree))
    return OrderLabel(f.codomain, {t: v for t, v in f.values.items() if t in keep},
                      f.certifier, {t: v for t, v in f.limit_values.items() if t in keep})


def base_height_label(tree: Tree) -> OrderLabel:
    """Ordinal height of the well-ordered payload, on base nodes only."""
    from .labels import ordinal_value
    from .woset import order_type

    vals = {t: ordinal_value(order_type(tree.payload(t))) for t in base_nodes(tree)}
    limits = {t: vals[t] for t in vals if tree.node(t).limit}
    return OrderLabel("Q", vals, limit_values=limits)
