"""Order embeddings of labelled trees into the tree of well-ordered sets of
rationals, and the related constructions on strictly labelled trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

from .errors import CandidateNotRational, NotStrict, PickExhausted, PreconditionFailed
from .labels import OrderLabel, verify_order_label
from .report import Report
from .tree import Node, Pair, Tree
from .woset import (
    EMPTY,
    NEG_INF,
    Enclosure,
    Fin,
    Omega,
    WOSet,
    is_initial_segment,
    rat,
)

MAX_REFINEMENTS = 2**16


# ---------------------------------------------------------------------------
# helpers


def _upper_bound(v) -> Fraction:
    """A rational known to be <= the labelled value."""
    return v.lo if isinstance(v, Enclosure) else rat(v)


def _exact(v) -> Optional[Fraction]:
    if isinstance(v, Enclosure):
        return v.lo if v.is_exact else None
    return rat(v)


def part_above(w: WOSet, bound, strict: bool) -> list:
    """Blocks of w restricted to elements > bound (>= bound if not strict)."""
    out = []
    for b in w.blocks:
        if isinstance(b, Fin):
            items = [q for q in b.items if q > bound or (q == bound and not strict)]
            if items:
                out.append(Fin(tuple(items)))
        else:
            if b.limit <= bound:
                continue
            skip = b.count_below(bound, inclusive=strict)
            out.append(b.tail(max(skip, 0)))
    return out


def dyadic_pick(lo, hi, used, include_hi: bool = True) -> Fraction:
    """Deterministic rational in (lo, hi] avoiding ``used``.

    ``hi`` itself is taken when allowed and free.  Otherwise the search runs
    over the upper half [a, hi) of the window, a = (lo + hi) / 2, preferring
    the dyadic k / 2^m with the least m and then the least |k|; the window is
    halved again whenever a whole level is used up.
    """
    if include_hi and hi not in used:
        return hi
    lo = hi - 1 if lo == NEG_INF else lo
    if not lo < hi:
        raise PickExhausted(f"empty window ({lo}, {hi}]")
    for _ in range(MAX_REFINEMENTS):
        a = (lo + hi) / 2
        m = 0
        while Fraction(1, 2**m) > (hi - a) / 4:
            m += 1
        for mm in range(m + 3):
            scale = 2**mm
            k_lo = math.ceil(a * scale)
            k_hi = math.ceil(hi * scale) - 1
            if k_lo > k_hi:
                continue
            ks = sorted(range(k_lo, k_hi + 1), key=lambda k: (abs(k), k))
            for k in ks[:64]:
                q = Fraction(k, scale)
                if q not in used:
                    return q
        lo = a
    raise PickExhausted(f"no free rational found in ({lo}, {hi}]")


# ---------------------------------------------------------------------------
# embedding witnesses


@dataclass
class EmbeddingWitness:
    psi: dict
    properties: dict = field(default_factory=dict)

    def __getitem__(self, t) -> WOSet:
        return self.psi[t]

    def to_json(self):
        return {"psi": {str(t): w.to_json() for t, w in sorted(self.psi.items())},
                "properties": self.properties}


def _require_strict(tree, f):
    v = verify_order_label(tree, f, strict=True)
    if v is not None:
        raise NotStrict(f"label not strictly increasing on {v.s} < {v.t}", v)


def embed_into_sigmaQ(tree: Tree, f: OrderLabel) -> EmbeddingWitness:
    """psi(root) = empty; a successor r of s gets psi(s) | {j(r)} with
    sup psi(s) < j(r) <= f(r) distinct among siblings; a node flagged as a
    limit gets psi(s) | omega-run ending at f(r)."""
    _require_strict(tree, f)
    psi = {}
    for t in tree.bfs():
        node = tree.node(t)
        if node.parent is None:
            psi[t] = EMPTY
            continue
        if node.parent not in psi:
            raise ValueError(f"parent of {t} not reached")
        base = psi[node.parent]
        # siblings stay incomparable as long as their first new elements differ
        used = {_first_new(psi[c], base) for c in tree.children(node.parent) if c in psi}
        hi = _upper_bound(f[t])
        lo = base.sup()
        if lo != NEG_INF and hi <= lo:
            raise PickExhausted(f"no room above {lo} below label {hi} at node {t}")
        if node.limit:
            start = dyadic_pick(lo, hi, used, include_hi=False)
            psi[t] = base.extend_omega(start, hi)
        else:
            include = _exact(f[t]) is not None
            psi[t] = base.extend(dyadic_pick(lo, hi, used, include_hi=include))
    w = EmbeddingWitness(psi)
    w.properties = verify_embedding(tree, f, w).info
    return w


def _first_new(w: WOSet, base: WOSet):
    rest = part_above(w, base.sup(), strict=base.sup_attained())
    return rest[0].first if rest else None


def verify_embedding(tree: Tree, f: Optional[OrderLabel], w: EmbeddingWitness) -> Report:
    """The three witness invariants, exactly on all pairs."""
    rep = Report("embedding")
    ids = tree.ids()
    order_ok = True
    for i, s in enumerate(ids):
        for t in ids:
            a = tree.le(s, t)
            b = is_initial_segment(w[s], w[t])
            if a != b:
                order_ok = False
                rep.add("order", s=s, t=t, tree_le=a, image_le=b)
    sup_ok = True
    if f is not None:
        for t in ids:
            s = w[t].sup()
            if s != NEG_INF and s > _upper_bound(f[t]):
                sup_ok = False
                rep.add("sup bound", node=t, sup=s)
    initial_ok = True
    root = tree.root
    if w[root] != EMPTY:
        initial_ok = False
        rep.add("root image", node=root)
    for t in ids:
        p = tree.parent(t)
        if p is None:
            continue
        rest = part_above(w[t], w[p].sup(), strict=w[p].sup_attained())
        step = (len(rest) == 1 and isinstance(rest[0], Fin) and len(rest[0].items) == 1) \
            or any(isinstance(b, Omega) for b in rest)
        if not (is_initial_segment(w[p], w[t]) and w[p] != w[t] and step):
            initial_ok = False
            rep.add("image step", node=t, parent=p)
    rep.info = {"order_both_ways": order_ok, "sup_bound": sup_ok, "initial_image": initial_ok}
    return rep


def close_image(w: EmbeddingWitness, tree: Tree) -> EmbeddingWitness:
    """At nodes whose image gains an omega-run, drop the finite tail after
    the run so the image is the supremum of the implied approach chain;
    descendants are re-based on the new image."""
    new = {}
    for t in tree.bfs():
        p = tree.parent(t)
        if p is None:
            new[t] = w[t]
            continue
        old_p = w[p]
        rest = part_above(w[t], old_p.sup(), strict=old_p.sup_attained())
        last_omega = max((i for i, b in enumerate(rest) if isinstance(b, Omega)), default=None)
        if last_omega is not None:
            rest = rest[:last_omega + 1]
        new[t] = WOSet.from_parts(list(new[p].blocks) + rest)
    return EmbeddingWitness(new, dict(w.properties))


# ---------------------------------------------------------------------------
# countably branching expansion


def ring_index(ft: Fraction, fx: Fraction) -> int:
    """Least n >= 1 with fx >= ft + 1/n."""
    d = fx - ft
    if d <= 0:
        raise NotStrict(f"label gap {d} is not positive", None)
    return max(1, math.ceil(1 / d))


def countably_branching_expansion(tree: Tree, f: OrderLabel, depth: int = 8):
    """Insert ring nodes (t, n) above each t and binary halving nodes inside
    each ring; returns (expanded tree, extended label).

    Ring n collects successors x with f(t) + 1/n <= f(x) < f(t) + 1/(n-1).
    Ring nodes are labelled f(t) + 1/(2n) and halving nodes at depth k inside
    ring n are labelled a + (b - a)(1 - 2^-k) with a = f(t) + 1/(2n),
    b = f(t) + 1/n.  Subdivision stops at ``depth``; a node cut there keeps
    all remaining members as children and is marked frontier.
    """
    _require_strict(tree, f)
    vals = {t: f.exact_value(t) for t in tree.ids()}
    nodes = {n.id: n for n in tree.nodes()}
    labels = dict(vals)
    next_id = [max(nodes) + 1]

    def new_node(parent, base, index, label, frontier=False):
        nid = next_id[0]
        next_id[0] += 1
        nodes[nid] = Node(nid, parent, Pair(base, tuple(index)), frontier=frontier)
        labels[nid] = label
        return nid

    def attach(x, parent):
        nodes[x] = Node(x, parent, nodes[x].payload, nodes[x].frontier, nodes[x].limit)

    for t in tree.ids():
        kids = tree.children(t)
        if not kids:
            continue
        rings = {}
        for x in kids:
            rings.setdefault(ring_index(vals[t], vals[x]), []).append(x)
        for n in sorted(rings):
            a = vals[t] + Fraction(1, 2 * n)
            b = vals[t] + Fraction(1, n)
            members = sorted(rings[n], key=lambda x: (vals[x], x))
            ring = new_node(t, t, (n,), a)

            def split(v, members, path):
                if len(members) == 1:
                    attach(members[0], v)
                    return
                if len(path) >= depth:
                    nodes[v] = Node(v, nodes[v].parent, nodes[v].payload, frontier=True)
                    for x in members:
                        attach(x, v)
                    return
                half = (len(members) + 1) // 2
                for bit, part in ((0, members[:half]), (1, members[half:])):
                    if len(part) == 1:
                        attach(part[0], v)
                    else:
                        k = len(path) + 1
                        c = new_node(v, t, (n,) + path + (bit,),
                                     a + (b - a) * (1 - Fraction(1, 2**k)))
                        split(c, part, path + (bit,))

            split(ring, members, ())
    out = Tree(nodes.values(), tree.families, meta={"kind": "countable-expansion",
                                                    "params": {"depth": depth}})
    return out, OrderLabel("Q", labels)


# ---------------------------------------------------------------------------
# special decomposition


@dataclass
class Decomposition:
    antichains: list
    keys: list
    classes: dict

    def to_json(self):
        return {"antichains": [sorted(a) for a in self.antichains],
                "keys": [list(k) for k in self.keys]}


def special_decomposition(tree: Tree, h: OrderLabel, eps: dict) -> Decomposition:
    """Cover the tree by antichains: class n = {t : eps(t) >= 1/n} minus
    earlier classes, split by the number of class members below t."""
    for t in tree.ids():
        e = rat(eps[t])
        if e <= 0:
            raise PreconditionFailed(f"eps({t}) = {e} is not positive", (t, t))
    for t in tree.ids():
        for s in tree.ancestors(t):
            if h.exact_value(t) < h.exact_value(s) + rat(eps[s]):
                raise PreconditionFailed(f"h({t}) < h({s}) + eps({s})", (s, t))
    cls = {t: math.ceil(1 / rat(eps[t])) for t in tree.ids()}
    groups = {}
    for t in tree.ids():
        level = sum(1 for s in tree.ancestors(t) if cls[s] == cls[t])
        groups.setdefault((cls[t], level), set()).add(t)
    keys = sorted(groups)
    return Decomposition([frozenset(groups[k]) for k in keys], keys, cls)


# ---------------------------------------------------------------------------
# refuting candidate embeddings into Q


@dataclass(frozen=True)
class IncreasingRun:
    sets: tuple

    def to_json(self):
        return {"increasing_run": [s.to_json() for s in self.sets]}


@dataclass(frozen=True)
class Witness:
    s: WOSet
    t: WOSet
    step: int

    def to_json(self):
        return {"witness": {"s": self.s.to_json(), "t": self.t.to_json(), "step": self.step}}


RefutationOutcome = Union[IncreasingRun, Witness]


def named_candidate(text: str) -> Callable[[WOSet], Fraction]:
    name, _, arg = text.partition(":")
    if name == "zero":
        return lambda t: Fraction(0)
    if name == "sup-plus-one":
        return lambda t: Fraction(0) if not t else t.sup() + 1
    if name == "sup-plus-one-capped":
        cap = rat(arg)
        return lambda t: Fraction(0) if not t else min(t.sup() + 1, cap)
    if name == "halfway":
        target = rat(arg)
        return lambda t: Fraction(0) if not t else (t.sup() + target) / 2
    raise ValueError(f"unknown candidate {text!r}")


def _value(candidate, t) -> Fraction:
    try:
        v = candidate(t)
    except (ArithmeticError, TypeError, ValueError) as exc:
        raise CandidateNotRational(f"candidate failed on {t!r}: {exc}") from exc
    if isinstance(v, bool) or not isinstance(v, (int, Fraction)):
        raise CandidateNotRational(f"candidate returned {v!r} on {t!r}")
    return Fraction(v)


def _dyadic_tail(values) -> Optional[tuple]:
    """(ratio-1/2 run start, limit) if the last three values close in
    geometrically with ratio 1/2."""
    if len(values) < 3:
        return None
    a, b, c = values[-3:]
    d1, d2 = b - a, c - b
    if d1 > 0 and d2 * 2 == d1:
        return c, c + d2
    return None


def kurepa_refute(candidate, max_steps: int = 32) -> RefutationOutcome:
    """Run t_{k+1} = t_k | {c(t_k)} looking for s below t with c(s) >= c(t).

    When the run reaches length max_steps // 2 and its values close in
    geometrically, one limit stage is taken: the union of the run continued
    by the predicted omega-run (the prediction is confirmed on four stages).
    The approach stages count as members of the run for the witness search.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if isinstance(candidate, str):
        candidate = named_candidate(candidate)
    run, values = [EMPTY], []
    approach = None
    while True:
        t = run[-1]
        v = _value(candidate, t)
        for beta, vb in enumerate(values):
            if vb >= v:
                return _checked_witness(candidate, run[beta], t, len(run) - 1)
        if approach is not None and t is run[-1] and approach[1] is t:
            stages, lim, block = approach
            approach = None
            # approach values are block elements 1, 2, ... increasing to its limit
            if v < block.limit:
                i = block.count_below(v, inclusive=False)
                i = max(i - 1, 0)
                return _checked_witness(candidate, _stage(stages[0], block, i), t, len(run) - 1)
        values.append(v)
        if len(run) == max_steps:
            return IncreasingRun(tuple(run))
        nxt = None
        if len(run) == max_steps // 2 and approach is None and not any(
                isinstance(b, Omega) for b in t.blocks):
            nxt = _limit_stage(candidate, t, values)
        if nxt is not None:
            stages, lim, block = nxt
            approach = (stages, lim, block)
            run.append(lim)
        else:
            run.append(t.extend(v))


def _stage(first: WOSet, block: Omega, i: int) -> WOSet:
    """Approach stage i: the run before the block plus its first i+1 elements."""
    st = first
    for j in range(1, i + 1):
        st = st.extend(block.element(j))
    return st


def _limit_stage(candidate, t: WOSet, values):
    tail = _dyadic_tail(values)
    if tail is None:
        return None
    start, limit = tail
    lim = t.extend_omega(start, limit) if start > t.sup() else None
    if lim is None:
        return None
    # normalisation may merge the run's own dyadic tail into lim's last
    # block, so the predicted run is kept separately
    block = Omega(start, limit)
    stages = [t.extend(start)]
    for i in range(1, 4):
        stages.append(stages[-1].extend(block.element(i)))
    for i, st in enumerate(stages):
        if _value(candidate, st) != block.element(i + 1):
            return None
    return stages, lim, block


def _checked_witness(candidate, s: WOSet, t: WOSet, step: int) -> Witness:
    if s == t or not is_initial_segment(s, t) or _value(candidate, s) < _value(candidate, t):
        raise AssertionError("refuter produced an invalid witness")
    return Witness(s, t, step)
