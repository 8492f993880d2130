"""Finite shadows of the compactification that glues a locally compact X to a
compact metric K along a map f: X -> K.

Points of X are open singletons at desk scale (every materialised tree node
is isolated in its interval topology once its approach chain is cut off).  A
basic neighbourhood of a point k of K is the glued ball

    (U | f^-1 U) - F,  U = {y in K : d(k, y) < radius},

with F a compact subset of X: a finite union of down-sets [0, t] for trees,
a finite set for discrete X.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import UnknownPoint
from .report import Report
from .tree import Tree
from .woset import WOSet, idx, rat


@dataclass
class Instance:
    X: list
    K: list
    dist: dict  # frozenset({a, b}) -> Fraction
    f: dict  # x -> k
    tree: Optional[Tree] = None
    radii: list = field(default_factory=list)

    def __post_init__(self):
        if set(self.X) & set(self.K):
            raise ValueError("X and K must be disjoint")
        for x in self.X:
            if self.f.get(x) not in self.K:
                raise ValueError(f"f({x!r}) is not a point of K")

    def d(self, a, b) -> Fraction:
        return Fraction(0) if a == b else self.dist[frozenset((a, b))]

    def points(self) -> list:
        return list(self.X) + list(self.K)

    def kind(self, p) -> str:
        if p in self.f:
            return "X"
        if p in self.K:
            return "K"
        raise UnknownPoint(p)

    def down(self, x) -> frozenset:
        """[0, x] for tree points, {x} for discrete ones."""
        if self.tree is None:
            return frozenset([x])
        return frozenset(self.tree.ancestors(x)) | {x}

    def metric_ok(self) -> bool:
        K = self.K
        for a in K:
            for b in K:
                if a != b and self.d(a, b) <= 0:
                    return False
                for c in K:
                    if self.d(a, c) > self.d(a, b) + self.d(b, c):
                        return False
        return True


@dataclass(frozen=True)
class InX:
    points: frozenset

    def contains(self, inst: Instance, p) -> bool:
        return p in self.points

    def to_json(self):
        return {"in_x": sorted(map(str, self.points))}


@dataclass(frozen=True)
class Glued:
    center: object
    radius: Fraction
    removed: frozenset = frozenset()

    def contains(self, inst: Instance, p) -> bool:
        if inst.kind(p) == "K":
            return inst.d(self.center, p) < self.radius
        return p not in self.removed and inst.d(self.center, inst.f[p]) < self.radius

    def members(self, inst: Instance) -> frozenset:
        return frozenset(p for p in inst.points() if self.contains(inst, p))

    def to_json(self):
        return {"glued": {"center": str(self.center), "radius": str(self.radius),
                          "removed": sorted(map(str, self.removed))}}


def af_basis(inst: Instance, p, radius, removed=()) -> object:
    radius = rat(radius)
    if inst.kind(p) == "X":
        return InX(frozenset([p]))
    return Glued(p, radius, frozenset(removed))


def _disjoint(inst: Instance, a, b) -> bool:
    return not any(a.contains(inst, p) and b.contains(inst, p) for p in inst.points())


def _stock(inst: Instance, p, other) -> list:
    """Candidate neighbourhoods of p from the finite basis stock."""
    if inst.kind(p) == "X":
        return [InX(frozenset([p]))]
    radii = sorted(set(inst.radii) | ({inst.d(p, other) / 3} if inst.kind(other) == "K" else set()))
    if not radii:
        radii = [Fraction(1)]
    compacts = [frozenset()]
    if inst.kind(other) == "X":
        compacts.append(inst.down(other))
    return [Glued(p, r, F) for r in radii for F in compacts]


def hausdorff_check(inst: Instance, pairs) -> Report:
    rep = Report("hausdorff", info={"pairs": 0, "skipped": 0})
    witnesses = []
    for p, q in pairs:
        if p == q:
            rep.info["skipped"] += 1
            continue
        rep.info["pairs"] += 1
        found = None
        for U in _stock(inst, p, q):
            for V in _stock(inst, q, p):
                if _disjoint(inst, U, V):
                    found = (U, V)
                    break
            if found:
                break
        if found is None:
            rep.add("not separated", p=str(p), q=str(q))
        else:
            witnesses.append({"p": str(p), "q": str(q), "U": found[0], "V": found[1]})
    rep.info["witnesses"] = witnesses[:20]
    return rep


def retraction_fibers(inst: Instance) -> dict:
    """|{y} | f^-1(y)| for each y in K."""
    sizes = {k: 1 for k in inst.K}
    for x in inst.X:
        sizes[inst.f[x]] += 1
    return sizes


# ---------------------------------------------------------------------------
# instances


def discrete_instance(X, K, dist, f, radii=()) -> Instance:
    return Instance(list(X), list(K), {frozenset(k): rat(v) for k, v in dist.items()},
                    dict(f), None, [rat(r) for r in radii])


def char_vector(w: WOSet, coords) -> tuple:
    return tuple(q in w for q in coords)


def cantor_distance(a: tuple, b: tuple, coords) -> Fraction:
    return sum((Fraction(1, 2 ** idx(q)) for q, u, v in zip(coords, a, b) if u != v),
               Fraction(0))


def tree_instance(tree: Tree, coords, radii=(), extra=()) -> Instance:
    """X = the nodes, K = characteristic vectors of the payloads on a finite
    coordinate set (plus ``extra`` vectors), with the weighted Cantor metric."""
    coords = [rat(c) for c in coords]
    f = {t: ("k",) + char_vector(tree.payload(t), coords) for t in tree.ids()}
    K = sorted(set(f.values()) | {("k",) + tuple(v) for v in extra})
    dist = {}
    for i, a in enumerate(K):
        for b in K[i + 1:]:
            dist[frozenset((a, b))] = cantor_distance(a[1:], b[1:], coords)
    return Instance(tree.ids(), K, dist, f, tree, [rat(r) for r in radii])


def random_pairs(inst: Instance, n: int, seed: int) -> list:
    rng = random.Random(seed)
    pts = inst.points()
    out = []
    while len(out) < n:
        p, q = rng.choice(pts), rng.choice(pts)
        if p != q:
            out.append((p, q))
    return out
