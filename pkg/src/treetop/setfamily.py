"""Families of sets of well-ordered rational sets indexed by tree nodes.

A point of the ambient space is a block WOSet ``x``, viewed as a point of the
Cantor space 2^Q.  Distances use the enumeration weights: two sets differing
exactly on D are at distance sum_{q in D} 2^-idx(q).

Membership predicates are exact.  The axiom checks are sampled (seeded) with
an exact side channel for disjointness where a family can decide it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import PayloadMismatch
from .interval import Interval
from .report import Report
from .woset import (
    NEG_INF,
    Enclosure,
    Omega,
    WOSet,
    is_initial_segment,
    random_woset,
    rational_at,
)


# ---------------------------------------------------------------------------
# topology certificates


@dataclass(frozen=True)
class Closed:
    def to_json(self):
        return {"closed": True}


@dataclass(frozen=True)
class RelOpenIn:
    parent: int

    def to_json(self):
        return {"rel_open_in": self.parent}


@dataclass(frozen=True)
class ClosedIn:
    """Closed relative to the parent set."""

    parent: int

    def to_json(self):
        return {"closed_in": self.parent}


@dataclass(frozen=True)
class NoCert:
    def to_json(self):
        return None


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class TestChain:
    """Virtual chain c_0 < c_1 < ... of WOSets with an optional limit."""

    name: str
    items: Callable[[int], WOSet]
    # exact test for x lying in every A_{c_n}
    in_all: Optional[Callable[[WOSet], bool]] = None
    limit_member: Optional[Callable[[WOSet], bool]] = None
    anchor: Optional[WOSet] = None

    __test__ = False


@dataclass
class SetFamily:
    tree: object
    member: Callable[[int, WOSet], bool]
    certificates: dict = field(default_factory=dict)
    # exact disjointness: True (proved disjoint), False (proved meeting), None
    disjoint: Optional[Callable[[int, int], Optional[bool]]] = None
    # WOSet used to generate samples and virtual chains for each node
    base: Optional[Callable[[int], WOSet]] = None
    # rationals near which membership changes (interval endpoints)
    anchors: Callable[[int], list] = field(default=lambda t: [])
    descriptors: dict = field(default_factory=dict)

    def members(self, x: WOSet) -> list:
        return [t for t in self.tree.ids() if self.member(t, x)]

    def to_json(self):
        return {
            "certificates": {str(t): c.to_json() for t, c in sorted(self.certificates.items())},
            "descriptors": {str(t): d for t, d in sorted(self.descriptors.items())},
        }


def canonical_set_family(tree) -> SetFamily:
    """A_t = {x : payload(t) is an initial segment of x}; each A_t is closed."""
    payloads = {}
    for t in tree.ids():
        p = tree.payload(t)
        if not isinstance(p, WOSet):
            raise PayloadMismatch(f"node {t} carries {type(p).__name__}, not WOSet")
        payloads[t] = p

    def member(t, x):
        return is_initial_segment(payloads[t], x)

    def disjoint(s, t):
        a, b = payloads[s], payloads[t]
        # a common extension of a and b forces them to be comparable
        return not (is_initial_segment(a, b) or is_initial_segment(b, a))

    return SetFamily(tree, member, {t: Closed() for t in tree.ids()}, disjoint,
                     base=payloads.__getitem__)


# ---------------------------------------------------------------------------
# sampling


def _rand_rational(rng: random.Random, lo=-3, hi=6) -> Fraction:
    den = 2 ** rng.randint(0, 3)
    return Fraction(rng.randint(lo * den, hi * den), den)


def _extend_randomly(rng: random.Random, p: WOSet, anchors=()) -> WOSet:
    x = p
    for _ in range(rng.randint(0, 3)):
        s = x.sup()
        roll = rng.random()
        if anchors and roll < 0.3:
            a = rng.choice(anchors)
            q = a + rng.choice([Fraction(0), Fraction(1, 2 ** rng.randint(1, 4)),
                                -Fraction(1, 2 ** rng.randint(1, 4))])
            if s == NEG_INF or q > s or (q == s and not x.sup_attained()):
                x = x.extend(q)
            continue
        base = Fraction(rng.randint(-3, 3)) if s == NEG_INF else s
        step = Fraction(rng.randint(1, 8), 2 ** rng.randint(0, 3))
        if roll < 0.8:
            x = x.extend(base + step)
        else:
            start = base + step
            x = x.extend_omega(start, start + step)
            break
    return x


def sample_points(F: SetFamily, rng: random.Random, count: int) -> list:
    """Mix of free random WOSets and random end-extensions of node bases."""
    ids = F.tree.ids()
    out = []
    for _ in range(count):
        if F.base is None or rng.random() < 0.25:
            out.append(random_woset(rng))
            continue
        t = rng.choice(ids)
        out.append(_extend_randomly(rng, F.base(t), F.anchors(t)))
    return out


# ---------------------------------------------------------------------------
# virtual chains


def _start_above(p: WOSet) -> Fraction:
    return Fraction(0) if p.sup() == NEG_INF else p.sup() + 1


def canonical_chains(F: SetFamily) -> tuple[list, list]:
    """(chains with limits, unbounded chains) built from node bases.

    Limit chains: the approach chain of each base ending in an omega block,
    and for every base p the virtual chain p | first-n-of-omega(a, a + 1).
    Unbounded chains: p | {a, a+1, ..., a+n-1}.
    """
    if F.base is None:
        return [], []
    limits, unbounded = [], []
    seen = set()

    def run_inside(lim: WOSet):
        # x extends every finite stage of lim's last block iff x agrees with
        # lim strictly below the block's limit point
        cut = lim.sup()
        return lambda x: x.truncate(cut, False) == lim

    for t in F.tree.ids():
        p = F.base(t)
        if p in seen:
            continue
        seen.add(p)
        if p.blocks and isinstance(p.blocks[-1], Omega):
            head = WOSet(p.blocks[:-1])
            block = p.blocks[-1]
            limits.append(TestChain(
                f"approach({t})",
                lambda n, head=head, block=block: WOSet(head.blocks + (block,)).truncate(
                    block.element(n), True),
                run_inside(p), lambda x, t=t: F.member(t, x), anchor=p))
        a = _start_above(p)
        lim = p.extend_omega(a, a + 1)
        limits.append(TestChain(
            f"omega-above({t})",
            lambda n, lim=lim, a=a: lim.truncate(a + 1 - Fraction(1, 2**n), True),
            run_inside(lim), lambda x, lim=lim: is_initial_segment(lim, x), anchor=lim))
        unbounded.append(TestChain(
            f"unbounded-above({t})",
            lambda n, p=p, a=a: WOSet.from_parts(list(p.blocks) + [a + i for i in range(n + 1)]),
            anchor=p))
    return limits, unbounded


# ---------------------------------------------------------------------------
# axioms (3)-(6)


def tree_of_sets_check(F: SetFamily, samples: int = 1000, seed: int = 0,
                       chain_len: int = 64) -> Report:
    """Sampled check of the tree-of-sets axioms; exact disjointness on all
    incomparable pairs when the family supplies a decision procedure."""
    rng = random.Random(seed)
    tree = F.tree
    rep = Report("tree_of_sets", info={"seed": seed, "samples": samples})
    xs = sample_points(F, rng, samples)

    # (3) monotone and (4) disjoint, from the member sets of each sample
    for x in xs:
        mem = set(F.members(x))
        for t in mem:
            for s in tree.ancestors(t):
                if s not in mem:
                    rep.add("monotonicity", lower=s, upper=t, x=x)
                    break
        ms = sorted(mem)
        for i, a in enumerate(ms):
            for b in ms[i + 1:]:
                if not tree.comparable(a, b):
                    rep.add("disjointness", s=a, t=b, x=x)
    exact = 0
    if F.disjoint is not None:
        ids = tree.ids()
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                if tree.comparable(a, b):
                    continue
                exact += 1
                if F.disjoint(a, b) is not True:
                    rep.add("disjointness (exact)", s=a, t=b)
    rep.info["exact_pairs"] = exact

    limits, unbounded = canonical_chains(F)
    rep.info["limit_chains"] = len(limits)
    rep.info["unbounded_chains"] = len(unbounded)

    # (5) x in every A_{c_n} forces x into the limit set; samples are
    # extensions of the limit and of random finite stages
    for ch in limits:
        for _ in range(max(1, samples // max(1, len(limits)))):
            if rng.random() < 0.5:
                x = _extend_randomly(rng, ch.anchor)
            else:
                x = _extend_randomly(rng, ch.items(rng.randrange(chain_len)))
            if ch.in_all(x) and not ch.limit_member(x):
                rep.add("limit continuity", chain=ch.name, x=x)

    # (6) along unbounded chains: a bounded x must drop out by the first stage
    # whose top element passes sup x
    for ch in unbounded:
        a = _start_above(ch.anchor)
        for _ in range(max(1, samples // max(1, len(unbounded)))):
            x = _extend_randomly(rng, ch.items(rng.randrange(chain_len)))
            s = x.sup()
            n = 0 if s == NEG_INF or s < a else int((s - a) // 1) + 1
            if is_initial_segment(ch.items(n), x):
                rep.add("unbounded chain", chain=ch.name, x=x, stage=n)
    return rep


# ---------------------------------------------------------------------------
# closedness by convergent sequences


def convergent_sequences(x: WOSet, anchors, length: int = 24) -> list:
    """Sequences x_m -> x in 2^Q: x with one extra point moving off to a
    point or to infinity (its enumeration index grows), and prefixes of x."""
    seqs = []
    targets = list(anchors)
    s = x.sup()
    if s != NEG_INF:
        targets.append(s)
    for c in targets:
        for sign in (1, -1):
            seq = [x.add(c + sign * Fraction(1, 2 ** (m + 2))) for m in range(length)
                   if c + sign * Fraction(1, 2 ** (m + 2)) not in x]
            seqs.append(seq)
    base = Fraction(0) if s == NEG_INF else s
    seqs.append([x.add(base + m + 1) for m in range(length)])
    if x.blocks and isinstance(x.blocks[-1], Omega):
        last = x.blocks[-1]
        seqs.append([x.truncate(last.element(m), True) for m in range(length)])
    return [q for q in seqs if q]


def closedness_check(F: SetFamily, samples: int = 200, seed: int = 0) -> Report:
    """Closed: sequences inside A_t converge inside.  ClosedIn(p): the same
    for limits inside A_p.  RelOpenIn(p): sequences inside A_p minus A_t with
    limit in A_p converge outside A_t."""
    rng = random.Random(seed)
    rep = Report("closedness", info={"seed": seed, "samples": samples})
    tested = 0
    for t, cert in sorted(F.certificates.items()):
        if isinstance(cert, NoCert) or F.tree.is_frontier(t):
            continue
        anchors = F.anchors(t)
        for _ in range(max(1, samples // max(1, len(F.certificates)))):
            start = F.base(t) if F.base is not None else random_woset(rng)
            x = _extend_randomly(rng, start, anchors)
            for seq in convergent_sequences(x, anchors):
                if isinstance(cert, Closed):
                    if all(F.member(t, y) for y in seq) and not F.member(t, x):
                        rep.add("not closed", node=t, limit=x)
                elif isinstance(cert, ClosedIn):
                    p = cert.parent
                    if all(F.member(t, y) for y in seq) and F.member(p, x) \
                            and not F.member(t, x):
                        rep.add("not closed in parent", node=t, parent=p, limit=x)
                else:
                    p = cert.parent
                    if all(F.member(p, y) and not F.member(t, y) for y in seq) \
                            and F.member(p, x) and F.member(t, x):
                        rep.add("not relatively open", node=t, parent=p, limit=x)
                tested += 1
    rep.info["sequences"] = tested
    return rep


# ---------------------------------------------------------------------------
# continuity of node maps


def interval_mass(J: Interval, terms: int = 64) -> Enclosure:
    """Enclosure of sum_{q in J} 2^-idx(q)."""
    lo = sum((Fraction(1, 2**n) for n in range(terms) if J.contains(rational_at(n))),
             Fraction(0))
    return Enclosure(lo, lo + Fraction(2, 2**terms))


def diameter(p: WOSet, terms: int = 64) -> Enclosure:
    """Diameter of {x : p is an initial segment of x} in the weighted metric:
    members agree below sup p and may differ anywhere above it."""
    s = p.sup()
    J = Interval(s, float("inf"), lo_closed=not p.sup_attained() and s != NEG_INF)
    return interval_mass(J, terms)


@dataclass(frozen=True)
class TestSequence:
    kind: str  # "chain" or "antichain"
    items: tuple
    limit: object = None  # the chain's limit (a node or a WOSet), None for infinity

    __test__ = False


@dataclass(frozen=True)
class Converged:
    n0: int

    def to_json(self):
        return {"converged": self.n0}


@dataclass(frozen=True)
class NotWithin:
    n: int

    def to_json(self):
        return {"not_within": self.n}


def continuity_check(f: Callable, seqs, target: Callable, tol: Fraction, N: int) -> Report:
    """Per sequence: the least n0 with |f(t_n) - target| <= tol for n0 <= n < N."""
    rep = Report("continuity", info={"tol": Fraction(tol), "N": N})
    verdicts = []
    for i, seq in enumerate(seqs):
        items = list(seq.items)[:N]
        goal = target(seq.limit)
        goal = goal if isinstance(goal, Enclosure) else Enclosure.exact(goal)
        n0 = 0
        for n, t in enumerate(items):
            v = f(t)
            v = v if isinstance(v, Enclosure) else Enclosure.exact(v)
            if v.distance_bound(goal) > tol:
                n0 = n + 1
        if n0 >= len(items) and items:
            verdicts.append(NotWithin(N))
            rep.add("not within tolerance", sequence=i, sequence_kind=seq.kind)
        else:
            verdicts.append(Converged(n0))
    rep.info["verdicts"] = verdicts
    return rep


def membership_mass(F: SetFamily, xs: list) -> Callable:
    """t -> fraction of the sample points lying in A_t (t a node or a WOSet)."""
    xs = list(xs)

    def f(t):
        if isinstance(t, WOSet):
            hits = sum(1 for x in xs if is_initial_segment(t, x))
        else:
            hits = sum(1 for x in xs if F.member(t, x))
        return Fraction(hits, len(xs))

    return f
