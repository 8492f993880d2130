"""Closed-set certificates on T | {inf} whose maximal intersections are small.

A certificate is a finite list of node sets, each containing the point at
infinity.  It witnesses n-determinacy on a truncation when, for every node
t, the intersection of the sets containing t has at most n points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import NotContinuous, NotLexStrict, NotStrict, SchemaError, UnknownNode
from .labels import OrderLabel, verify_order_label
from .tree import Node, Tree
from .woset import rat, rat_str

INF = "inf"


@dataclass
class Certificate:
    sets: list
    arity: int
    provenance: list = field(default_factory=list)

    def to_json(self):
        out = []
        for i, s in enumerate(self.sets):
            members = sorted(m for m in s if m != INF) + [INF]
            prov = self.provenance[i] if i < len(self.provenance) else {}
            out.append({"members": members, "provenance": prov})
        return {"arity": self.arity, "sets": out}

    @classmethod
    def from_json(cls, obj) -> "Certificate":
        try:
            sets, prov = [], []
            for rec in obj["sets"]:
                sets.append(frozenset(INF if m == INF else int(m) for m in rec["members"]))
                prov.append(rec.get("provenance", {}))
            return cls(sets, int(obj["arity"]), prov)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed certificate: {exc}") from exc


def _add(sets, prov, seen, members, tag):
    key = frozenset(members)
    if key in seen:
        return
    seen.add(key)
    sets.append(key)
    prov.append(tag)


def check_continuity(tree: Tree, h: OrderLabel):
    """At nodes flagged as limits the label must equal the supremum along
    the implied approach chain (recorded in ``limit_values``)."""
    for t in tree.ids():
        if tree.node(t).limit:
            if t not in h.limit_values or h.limit_values[t] != h.values[t]:
                raise NotContinuous(f"label jumps at limit node {t}", t)


def build_2det_network(tree: Tree, h: OrderLabel, strict: bool = True) -> Certificate:
    """Sets {inf} | {t in h^-1 I : m <= t} for each minimal m of h^-1 I, I
    ranging over closed intervals with endpoints among the h-values and
    their midpoints."""
    if strict:
        v = verify_order_label(tree, h, strict=True)
        if v is not None:
            raise NotStrict(f"label not strict on {v.s} < {v.t}", v)
        check_continuity(tree, h)
    vals = {t: h.exact_value(t) for t in tree.ids()}
    levels = sorted(set(vals.values()))
    ends = sorted(set(levels) | {(a + b) / 2 for a, b in zip(levels, levels[1:])})
    sets, prov, seen = [], [], set()
    for i, a in enumerate(ends):
        for b in ends[i:]:
            inside = [t for t in tree.ids() if a <= vals[t] <= b]
            if not inside:
                continue
            chosen = set(inside)
            minimal = [t for t in inside if not any(s in chosen for s in tree.ancestors(t))]
            for m in minimal:
                members = {t for t in inside if tree.le(m, t)} | {INF}
                _add(sets, prov, seen, members,
                     {"interval": [rat_str(a), rat_str(b)], "separator": m})
    return Certificate(sets, 2, prov)


# ---------------------------------------------------------------------------
# three-determined families


def induced_tree(tree: Tree, keep) -> Tree:
    """The subposet on ``keep`` (which must contain the root) as a tree."""
    keep = set(keep)
    nodes = []
    for t in sorted(keep):
        parent = next((a for a in reversed(tree.ancestors(t)) if a in keep), None)
        n = tree.node(t)
        nodes.append(Node(t, parent, n.payload, n.frontier, n.limit))
    return Tree(nodes)


def approach_nodes(tree: Tree, t: int, is_base) -> list:
    """Nodes in [p, t) where p is the nearest base node strictly below t."""
    anc = tree.ancestors(t)
    for i in range(len(anc) - 1, -1, -1):
        if is_base(anc[i]):
            return list(anc[i:])
    return list(anc)


def build_3det_family(tree: Tree, g: OrderLabel, is_base=None) -> Certificate:
    """The first-coordinate network together with the sets F_n = union over
    fibers of each fiber's n-th network set, closed up at limit nodes."""
    if g.codomain != "RlexR":
        raise NotLexStrict("label is not lexicographic", None)
    v = verify_order_label(tree, g, strict=True)
    if v is not None:
        raise NotLexStrict(f"label not lexicographically strict on {v.s} < {v.t}", v)
    first = OrderLabel("Q", {t: g.values[t][0] for t in tree.ids()})
    v = verify_order_label(tree, first, strict=False)
    if v is not None:
        raise NotLexStrict(f"first coordinate decreases on {v.s} < {v.t}", v)
    if is_base is None:
        is_base = lambda t: True
    root = tree.root

    net = build_2det_network(tree, first, strict=False)
    sets = list(net.sets)
    prov = [{"part": "first", **p} for p in net.provenance]
    seen = set(sets)

    fibers = {}
    for t in tree.ids():
        fibers.setdefault(first.exact_value(t), []).append(t)
    per_fiber = []
    for lam in sorted(fibers):
        members = fibers[lam]
        sub = induced_tree(tree, set(members) | {root})
        second = {t: rat(g.values[t][1]) for t in members}
        if root not in second:
            second[root] = min(second.values()) - 1
        cert = build_2det_network(sub, OrderLabel("Q", second), strict=False)
        per_fiber.append((lam, cert))

    limits = [t for t in tree.ids() if tree.node(t).limit]
    width = max(len(c.sets) for _, c in per_fiber)
    for n in range(width):
        union = {INF}
        for lam, cert in per_fiber:
            if n < len(cert.sets):
                union |= cert.sets[n]
        for L in limits:
            if any(a in union for a in approach_nodes(tree, L, is_base)):
                union.add(L)
        key = frozenset(union)
        if key not in seen:
            seen.add(key)
            sets.append(key)
            prov.append({"part": "fibers", "index": n})
    return Certificate(sets, 3, prov)


# ---------------------------------------------------------------------------
# verification


@dataclass
class SeparationReport:
    max_intersection_size: int
    witness_intersections: list
    failures: list
    unseparated: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and not self.unseparated

    def to_json(self):
        def show(s):
            return sorted(m for m in s if m != INF) + ([INF] if INF in s else [])

        return {"ok": self.ok, "max_intersection_size": self.max_intersection_size,
                "witness_intersections": [show(s) for s in self.witness_intersections],
                "failures": self.failures, "unseparated": self.unseparated}


def intersections(tree: Tree, cert: Certificate) -> dict:
    """point -> intersection of the certificate sets containing it."""
    universe = frozenset(tree.ids()) | {INF}
    out = {}
    for p in list(tree.ids()) + [INF]:
        inter = universe
        for s in cert.sets:
            if p in s:
                inter = inter & s
        out[p] = inter
    return out


def verify_separation(tree: Tree, cert: Certificate, first: Optional[OrderLabel] = None,
                      witnesses: int = 10) -> SeparationReport:
    for s in cert.sets:
        for m in s:
            if m != INF and m not in tree:
                raise UnknownNode(m)
    inter = intersections(tree, cert)
    failures = []
    for s in cert.sets:
        if INF not in s:
            failures.append({"kind": "set misses inf", "set": sorted(m for m in s if m != INF)})
    biggest = max(len(v) for v in inter.values())
    for p, v in inter.items():
        extra = [m for m in v if m not in (p, INF)]
        if p == INF:
            # inf may share its intersection with at most arity - 1 nodes
            if len(v) > cert.arity:
                failures.append({"kind": "too large", "point": INF, "extra": sorted(extra)})
            continue
        relevant = [m for m in extra if not tree.is_frontier(m)]
        if tree.is_frontier(p) or not relevant:
            continue
        if cert.arity == 2:
            failures.append({"kind": "too large", "point": p, "extra": sorted(extra)})
        elif len(extra) > 1:
            failures.append({"kind": "too large", "point": p, "extra": sorted(extra)})
        else:
            s = extra[0]
            if not tree.comparable(s, p):
                failures.append({"kind": "incomparable pair", "point": p, "other": s})
            elif first is not None and first.compare(s, p) != 0:
                failures.append({"kind": "first coordinates differ", "point": p, "other": s})
    unseparated = []
    if cert.arity == 2:
        ids = [t for t in tree.ids() if not tree.is_frontier(t)]
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                if b in inter[a] and a in inter[b]:
                    unseparated.append([a, b])
    wit = [v for p, v in sorted(inter.items(), key=lambda kv: str(kv[0]))
           if len(v) == biggest][:witnesses]
    return SeparationReport(biggest, wit, failures, unseparated)


# ---------------------------------------------------------------------------
# from certificates back to labels


def phi_signature(tree: Tree, cert: Certificate, t: int) -> set:
    """Indices of certificate sets missing every node of [0, t]."""
    tree.node(t)
    chain = set(tree.ancestors(t)) | {t}
    return {n for n, s in enumerate(cert.sets) if not (s & chain)}


def signature_label(tree: Tree, cert: Certificate) -> OrderLabel:
    """t -> -sum_{n in signature} 2^-n."""
    vals = {}
    for t in tree.ids():
        vals[t] = -sum((Fraction(1, 2**n) for n in phi_signature(tree, cert, t)), Fraction(0))
    return OrderLabel("Q", vals)
