"""Finitely presented rooted trees.

Nodes are dense integer ids with parent links.  Payloads describe what a
node *is* (a WOSet for sigma-Q fragments, a (base, index) pair for nodes
added by expansions, an integer sequence for Gamma or index trees).  Nodes
may carry symbolic successor families, which stand for infinitely many
immediate successors ``t | {q}``, q ranging over a rational interval.

``frontier`` marks nodes whose successors were cut off by truncation;
``limit`` marks nodes sitting at a limit height whose approach chain is not
materialised.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Union

from .errors import BadParams, SchemaError, UnknownNode
from .interval import Interval
from .labels import OrderLabel
from .report import Report
from .woset import (
    NEG_INF,
    EMPTY,
    InvalidWOSet,
    OrdinalRep,
    WOSet,
    is_initial_segment,
    order_type,
    rat,
    rat_str,
)


# ---------------------------------------------------------------------------
# payloads


@dataclass(frozen=True)
class Pair:
    """Expansion node <base, index>; ``interval`` constrains inf(x - base)."""

    base: int
    index: tuple
    interval: Optional[Interval] = None

    def to_json(self):
        out = {"base": self.base, "index": list(self.index)}
        if self.interval is not None:
            out["interval"] = self.interval.to_json()
        return {"pair": out}


@dataclass(frozen=True)
class IntSeq:
    seq: tuple

    def to_json(self):
        return {"intseq": list(self.seq)}


@dataclass(frozen=True)
class Abstract:
    name: str = ""

    def to_json(self):
        return {"abstract": self.name}


Payload = Union[WOSet, Pair, IntSeq, Abstract]


def payload_from_json(obj) -> Payload:
    if not isinstance(obj, dict):
        raise SchemaError(f"payload must be an object: {obj!r}")
    if "blocks" in obj:
        return WOSet.from_json(obj)
    if "woset" in obj:
        return WOSet.from_json(obj["woset"])
    if "pair" in obj:
        p = obj["pair"]
        iv = Interval.from_json(p["interval"]) if "interval" in p else None
        return Pair(int(p["base"]), tuple(p["index"]), iv)
    if "intseq" in obj:
        return IntSeq(tuple(int(v) for v in obj["intseq"]))
    if "abstract" in obj:
        return Abstract(str(obj["abstract"]))
    raise SchemaError(f"unknown payload: {obj!r}")


def payload_caption(p: Payload) -> str:
    if isinstance(p, WOSet):
        return repr(p)
    if isinstance(p, Pair):
        return f"({p.base},{''.join(str(i) for i in p.index)})"
    if isinstance(p, IntSeq):
        return "<" + ",".join(str(v) for v in p.seq) + ">"
    return p.name or "*"


# ---------------------------------------------------------------------------
# symbolic successor families


@dataclass(frozen=True)
class AffineMap:
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", rat(self.alpha))
        object.__setattr__(self, "beta", rat(self.beta))

    def __call__(self, q):
        return self.alpha * q + self.beta

    def inf_over(self, iv: Interval):
        """Infimum of the map over the closure of ``iv``."""
        if self.alpha == 0:
            return self.beta
        end = iv.lo if self.alpha > 0 else iv.hi
        if end in (NEG_INF, float("inf")):
            return NEG_INF
        return self.alpha * end + self.beta

    def to_json(self):
        return {"alpha": rat_str(self.alpha), "beta": rat_str(self.beta)}


@dataclass(frozen=True)
class SuccFamily:
    """Successors t | {q} for q in ``interval`` (minus explicit children)."""

    interval: Interval
    rule: str = "t|{q}"
    value: Optional[AffineMap] = None

    def to_json(self):
        out = {"interval": self.interval.to_json(), "rule": self.rule}
        if self.value is not None:
            out["value"] = self.value.to_json()
        return out

    @classmethod
    def from_json(cls, obj) -> "SuccFamily":
        val = obj.get("value")
        return cls(Interval.from_json(obj["interval"]), obj.get("rule", "t|{q}"),
                   AffineMap(val["alpha"], val["beta"]) if val else None)


# ---------------------------------------------------------------------------
# the tree


@dataclass(frozen=True)
class Node:
    id: int
    parent: Optional[int]
    payload: Payload = field(default_factory=Abstract)
    frontier: bool = False
    limit: bool = False


class Tree:
    """Immutable rooted tree given by parent links."""

    def __init__(self, nodes: Iterable[Node], families=None, labels=None, meta=None):
        self._nodes = {n.id: n for n in nodes}
        self.families = {int(k): list(v) for k, v in (families or {}).items()}
        self.labels = dict(labels or {})
        self.meta = dict(meta or {})
        self._children = {t: [] for t in self._nodes}
        for n in self._nodes.values():
            if n.parent is not None and n.parent in self._children:
                self._children[n.parent].append(n.id)
        self._anc_cache = {}
        self._height_cache = {}

    # access -----------------------------------------------------------------

    def __len__(self):
        return len(self._nodes)

    def __contains__(self, t):
        return t in self._nodes

    def ids(self) -> list:
        return sorted(self._nodes)

    def node(self, t) -> Node:
        try:
            return self._nodes[t]
        except KeyError:
            raise UnknownNode(t) from None

    def payload(self, t) -> Payload:
        return self.node(t).payload

    def parent(self, t) -> Optional[int]:
        return self.node(t).parent

    def children(self, t) -> list:
        self.node(t)
        return list(self._children[t])

    def roots(self) -> list:
        return [t for t, n in sorted(self._nodes.items())
                if n.parent is None or n.parent not in self._nodes]

    @property
    def root(self) -> int:
        roots = self.roots()
        if len(roots) != 1:
            raise ValueError(f"tree has {len(roots)} minimal elements")
        return roots[0]

    def ancestors(self, t) -> tuple:
        """Strict predecessors of t, root first."""
        if t in self._anc_cache:
            return self._anc_cache[t]
        chain = []
        seen = {t}
        p = self.node(t).parent
        while p is not None and p in self._nodes:
            if p in seen:
                raise ValueError(f"parent cycle through {p}")
            seen.add(p)
            chain.append(p)
            p = self._nodes[p].parent
        result = tuple(reversed(chain))
        self._anc_cache[t] = result
        return result

    def depth(self, t) -> int:
        return len(self.ancestors(t))

    def le(self, s, t) -> bool:
        return s == t or s in self.ancestors(t)

    def lt(self, s, t) -> bool:
        return s != t and s in self.ancestors(t)

    def comparable(self, s, t) -> bool:
        return self.le(s, t) or self.le(t, s)

    def meet(self, s, t) -> int:
        a = self.ancestors(s) + (s,)
        b = self.ancestors(t) + (t,)
        m = a[0]
        for x, y in zip(a, b):
            if x != y:
                break
            m = x
        return m

    def up_set(self, t) -> list:
        """All s >= t."""
        out, stack = [], [t]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self._children[u])
        return sorted(out)

    def bfs(self) -> list:
        out = []
        queue = deque(self.roots())
        while queue:
            t = queue.popleft()
            out.append(t)
            queue.extend(sorted(self._children[t]))
        return out

    def leaves(self) -> list:
        return [t for t in self.ids() if not self._children[t]]

    def is_frontier(self, t) -> bool:
        return self.node(t).frontier

    # height -----------------------------------------------------------------

    def height(self, t) -> OrdinalRep:
        """Order type of [0, t).

        Along materialised edges the height grows by one.  An edge into a
        node whose WOSet payload gains omega-blocks over its nearest WOSet
        predecessor (or into a node flagged ``limit``) crosses the implied
        approach chains, so the height jumps to the next limit ordinals.
        """
        if t in self._height_cache:
            return self._height_cache[t]
        node = self.node(t)
        if node.parent is None or node.parent not in self._nodes:
            h = OrdinalRep(0, 0)
            if isinstance(node.payload, WOSet):
                h = order_type(node.payload)
        else:
            hp = self.height(node.parent)
            h = hp.succ()
            if isinstance(node.payload, WOSet):
                base = self._nearest_woset_ancestor(t)
                ot = order_type(node.payload)
                if base is not None:
                    dk = ot.k - order_type(self.payload(base)).k
                    if dk > 0:
                        h = OrdinalRep(hp.k + dk, ot.n)
            elif node.limit:
                h = hp.plus_omega()
        self._height_cache[t] = h
        return h

    def _nearest_woset_ancestor(self, t):
        for a in reversed(self.ancestors(t)):
            if isinstance(self.payload(a), WOSet):
                return a
        return None

    # structural edits (return new trees) -------------------------------------

    def with_labels(self, **labels) -> "Tree":
        merged = dict(self.labels)
        merged.update(labels)
        return Tree(self._nodes.values(), self.families, merged, self.meta)

    def with_nodes(self, nodes) -> "Tree":
        return Tree(nodes, self.families, self.labels, self.meta)

    def nodes(self) -> list:
        return [self._nodes[t] for t in self.ids()]

    # serialization ------------------------------------------------------------

    def to_json(self):
        nodes = []
        for n in self.nodes():
            rec = {"id": n.id, "parent": n.parent, "payload": n.payload.to_json()}
            if n.frontier:
                rec["frontier"] = True
            if n.limit:
                rec["limit"] = True
            nodes.append(rec)
        return {
            "nodes": nodes,
            "families": {str(k): [f.to_json() for f in v]
                         for k, v in sorted(self.families.items())},
            "labels": {k: v.to_json() for k, v in sorted(self.labels.items())},
            "meta": self.meta,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, obj) -> "Tree":
        try:
            raw = obj["nodes"]
            if not isinstance(raw, list) or not raw:
                raise SchemaError("tree has no nodes")
            nodes = [Node(int(r["id"]), None if r.get("parent") is None else int(r["parent"]),
                          payload_from_json(r.get("payload", {"abstract": ""})),
                          bool(r.get("frontier", False)), bool(r.get("limit", False)))
                     for r in raw]
            families = {int(k): [SuccFamily.from_json(f) for f in v]
                        for k, v in obj.get("families", {}).items()}
            labels = {k: OrderLabel.from_json(v) for k, v in obj.get("labels", {}).items()}
        except SchemaError:
            raise
        except (KeyError, TypeError, ValueError, InvalidWOSet) as exc:
            raise SchemaError(f"malformed tree JSON: {exc}") from exc
        ids = [n.id for n in nodes]
        if len(set(ids)) != len(ids):
            raise SchemaError("duplicate node ids")
        return cls(nodes, families, labels, obj.get("meta", {}))

    def to_dot(self, name: str = "T") -> str:
        lines = [f"digraph {name} {{", "  node [shape=box];"]
        for n in self.nodes():
            caption = payload_caption(n.payload).replace('"', '\\"')
            style = ', style=dashed' if n.frontier else ""
            lines.append(f'  n{n.id} [label="{n.id}: {caption}"{style}];')
        for n in self.nodes():
            if n.parent is not None:
                lines.append(f"  n{n.parent} -> n{n.id};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def tree_from_parents(parents: dict, payloads=None, **kw) -> Tree:
    """Convenience constructor from {id: parent_id or None}."""
    payloads = payloads or {}
    return Tree([Node(t, p, payloads.get(t, Abstract(str(t)))) for t, p in parents.items()], **kw)


def chain_tree(n: int) -> Tree:
    return tree_from_parents({i: (i - 1 if i else None) for i in range(n)})


# ---------------------------------------------------------------------------
# validation


def validate_tree(tree: Tree) -> Report:
    rep = Report("validate_tree")
    roots = tree.roots()
    if len(roots) == 0:
        rep.add("no minimal element")
    elif len(roots) > 1:
        rep.add("two minimal elements", nodes=roots)
    for n in tree.nodes():
        if n.parent is not None and n.parent not in tree:
            rep.add("dangling parent", node=n.id, parent=n.parent)
    try:
        for t in tree.ids():
            tree.ancestors(t)
    except ValueError as exc:
        rep.add("cycle", detail=str(exc))
        return rep
    for n in tree.nodes():
        if n.parent is None or n.parent not in tree:
            continue
        pp, cp = tree.payload(n.parent), n.payload
        if isinstance(cp, WOSet):
            base = tree._nearest_woset_ancestor(n.id)
            if base is not None:
                bp = tree.payload(base)
                if bp == cp or not is_initial_segment(bp, cp):
                    rep.add("payload order", node=n.id, parent=base)
        elif isinstance(cp, IntSeq) and isinstance(pp, IntSeq):
            if not (len(pp.seq) < len(cp.seq) and cp.seq[:len(pp.seq)] == pp.seq):
                rep.add("payload order", node=n.id, parent=n.parent)
        elif isinstance(cp, Pair):
            if cp.base not in tree or not tree.le(cp.base, n.id):
                rep.add("pair base not below", node=n.id, base=cp.base)
    for t, fams in tree.families.items():
        if t not in tree:
            rep.add("family on unknown node", node=t)
            continue
        for i, f in enumerate(fams):
            if f.interval.is_empty:
                rep.add("empty family interval", node=t, family=i)
            for j in range(i):
                if not f.interval.is_disjoint(fams[j].interval):
                    rep.add("overlapping families", node=t, families=[j, i])
    return rep


# ---------------------------------------------------------------------------
# antichains


def is_antichain(tree: Tree, nodes) -> bool:
    nodes = list(nodes)
    for t in nodes:
        tree.node(t)
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            if a != b and tree.meet(a, b) in (a, b):
                return False
    return True


# ---------------------------------------------------------------------------
# generators


def _grid_steps(branching: int, grid) -> tuple:
    """(offsets for nonempty nodes, parameters for the empty root)."""
    if isinstance(grid, (list, tuple)):
        steps = tuple(rat(g) for g in grid)
        if not steps or any(g <= 0 for g in steps):
            raise BadParams("grid offsets must be positive rationals")
        return steps, steps
    d = rat(grid)
    if d <= 0 or d.denominator != 1:
        raise BadParams("grid denominator must be a positive integer")
    steps = tuple(Fraction(k) / d for k in range(1, branching + 1))
    return steps, tuple(s - 1 / d for s in steps)


def gen_tree(kind: str, depth: int, branching: int = 2, grid=1, limits: bool = False) -> Tree:
    """Deterministic finite truncation of sigma-Q / wQ or Gamma.

    sigma-Q: successors of t are t | {sup t + g} for the grid offsets g (the
    root uses the offsets shifted to start at 0).  With ``limits`` every
    non-frontier node also gets one limit child t | omega-run, whose approach
    chain is implied but not materialised.

    Gamma: one-to-one sequences over range(grid) of length <= depth, with the
    label h(t) = sum 2^-n over the range of t attached as ``labels["h"]``.
    """
    kind = kind.lower().replace("_", "-")
    if depth < 0 or branching < 1:
        raise BadParams("depth must be >= 0 and branching >= 1")
    if kind in ("sigmaq", "sigma-q", "wq"):
        return _gen_sigma_q(kind, depth, branching, grid, limits)
    if kind == "gamma":
        return _gen_gamma(depth, int(grid) if not isinstance(grid, (list, tuple)) else len(grid))
    raise BadParams(f"unknown tree kind {kind!r}")


def _gen_sigma_q(kind, depth, branching, grid, limits) -> Tree:
    steps, root_params = _grid_steps(branching, grid)
    nodes = [Node(0, None, EMPTY, frontier=depth == 0)]
    level = [(0, EMPTY)]
    for d in range(depth):
        nxt = []
        for tid, t in level:
            params = root_params if not t else tuple(t.sup() + g for g in steps)
            for q in params:
                nid = len(nodes)
                child = t.extend(q)
                nodes.append(Node(nid, tid, child, frontier=d + 1 == depth))
                nxt.append((nid, child))
            if limits:
                width = min(steps) / 2
                start = params[0] - 2 * width if not t else t.sup() + width
                nodes.append(Node(len(nodes), tid, t.extend_omega(start, start + width / 2),
                                  limit=True))
        level = nxt
    meta = {"kind": "wq" if kind == "wq" else "sigma-q",
            "params": {"depth": depth, "branching": branching, "grid": _grid_json(grid),
                       "limits": limits}}
    return Tree(nodes, meta=meta)


def _grid_json(grid):
    if isinstance(grid, (list, tuple)):
        return [rat_str(rat(g)) for g in grid]
    return rat_str(rat(grid))


def gamma_h(seq) -> Fraction:
    return sum((Fraction(1, 2**n) for n in set(seq)), Fraction(0))


def _gen_gamma(depth, grid) -> Tree:
    if grid < 1:
        raise BadParams("gamma grid must be >= 1")
    nodes = [Node(0, None, IntSeq(()), frontier=depth == 0)]
    level = [(0, ())]
    for d in range(depth):
        nxt = []
        for tid, s in level:
            for v in range(grid):
                if v in s:
                    continue
                nid = len(nodes)
                seq = s + (v,)
                nodes.append(Node(nid, tid, IntSeq(seq), frontier=d + 1 == depth))
                nxt.append((nid, seq))
        level = nxt
    h = OrderLabel("Q", {n.id: gamma_h(n.payload.seq) for n in nodes})
    return Tree(nodes, labels={"h": h},
                meta={"kind": "gamma", "params": {"depth": depth, "grid": grid}})


def index_tree(kind: str, depth: int) -> Tree:
    """Small index trees S: ``"S2"`` = {(), (0,), (1,)}; ``"cantor"`` = 2^{<=depth}."""
    if kind == "S2":
        seqs = [(), (0,), (1,)]
    elif kind == "cantor":
        seqs = [()]
        frontier = [()]
        for _ in range(depth):
            frontier = [s + (b,) for s in frontier for b in (0, 1)]
            seqs.extend(frontier)
    elif kind == "trivial":
        seqs = [()]
    else:
        raise BadParams(f"unknown index tree {kind!r}")
    pos = {s: i for i, s in enumerate(seqs)}
    return Tree([Node(pos[s], pos[s[:-1]] if s else None, IntSeq(s)) for s in seqs],
                meta={"kind": f"index-{kind}"})


def replace_node(node: Node, **changes) -> Node:
    return replace(node, **changes)
