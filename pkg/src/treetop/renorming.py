"""Good and bad points of increasing labels, right-isolated relabelling, and
the equal-value up-set test for a second label.

A node t is good for f when, after removing finitely many immediate
successors, every remaining successor s has f(s) > f(t) + eps for one
eps > 0.  Symbolic successor families carry affine value maps, so goodness
is decided exactly: a family whose value map has infimum f(t) over the
closure of its parameter interval has infinitely many successors below
f(t) + eps for every eps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import NotMonotone, NotStrict
from .labels import OrderLabel, compare_scalar, verify_order_label
from .tree import Pair, SuccFamily, Tree
from .woset import NEG_INF, Enclosure, WOSet, idx, rational_at


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Good:
    node: int
    eps: Fraction
    removed: frozenset

    def to_json(self):
        return {"node": self.node, "verdict": "good", "eps": str(self.eps),
                "removed": sorted(self.removed)}


@dataclass(frozen=True)
class Bad:
    node: int
    family: int
    reason: SuccFamily

    def to_json(self):
        return {"node": self.node, "verdict": "bad", "family": self.family,
                "reason": self.reason.to_json()}


def _family_min(fam: SuccFamily):
    """(inf of the value map over the interval closure, whether attained)."""
    v, iv = fam.value, fam.interval
    if v is None:
        raise ValueError("successor family without a value map")
    inf = v.inf_over(iv)
    if v.alpha == 0:
        return inf, True
    closed = iv.lo_closed if v.alpha > 0 else iv.hi_closed
    return inf, closed


# ---------------------------------------------------------------------------
# Kadec relabelling


KADEC_TERMS = 64


def kadec_value(q: Fraction, terms: int = KADEC_TERMS) -> Enclosure:
    """sum over p < q of 2^-(idx(p)+1), enclosed using the first ``terms``
    rationals of the enumeration; each value is isolated from the right by
    the gap 2^-(idx(q)+1)."""
    lo = sum((Fraction(1, 2 ** (n + 1)) for n in range(terms) if rational_at(n) < q),
             Fraction(0))
    return Enclosure(lo, lo + Fraction(1, 2**terms))


@dataclass(frozen=True)
class Pow2:
    """2^-exp for exponents too large to hold as a Fraction."""

    exp: int

    def __truediv__(self, k):
        if k != 2:
            return NotImplemented
        return Pow2(self.exp + 1)

    def _cmp(self, other) -> int:
        if isinstance(other, Pow2):
            return (other.exp > self.exp) - (other.exp < self.exp)
        x = Fraction(other)
        if x <= 0:
            return 1
        # 2^-exp against n/d: compare d with n * 2^exp
        n, d = x.numerator, x.denominator
        if self.exp > d.bit_length() + 1:
            return -1
        lhs, rhs = d, n << self.exp
        return (lhs > rhs) - (lhs < rhs)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __str__(self):
        return f"2^-{self.exp}"


GAP_EXACT_LIMIT = 4096


def kadec_gap(q: Fraction):
    exp = idx(q) + 1
    if exp <= GAP_EXACT_LIMIT:
        return Fraction(1, 2**exp)
    return Pow2(exp)


@dataclass
class KadecLabel(OrderLabel):
    """h o f for a rational label f; comparisons fall back to f."""

    base: Optional[OrderLabel] = None

    def compare(self, s, t):
        # h is strictly increasing, so the base label decides; truncated
        # enclosures of nearby rationals can coincide
        if self.base is not None:
            return self.base.compare(s, t)
        return super().compare(s, t)


def kadec_witness(tree: Tree, f: OrderLabel, terms: int = KADEC_TERMS) -> KadecLabel:
    v = verify_order_label(tree, f, strict=True)
    if v is not None:
        raise NotStrict(f"label not strict on {v.s} < {v.t}", v)
    vals = {t: kadec_value(f.exact_value(t), terms) for t in tree.ids()}

    def certifier(s, t):
        return f.exact_value(s) < f.exact_value(t)

    return KadecLabel("R", vals, certifier, base=f)


# ---------------------------------------------------------------------------
# bad points


def bad_points(tree: Tree, f: OrderLabel) -> list:
    """One verdict per node, in id order."""
    kadec = isinstance(f, KadecLabel) and f.base is not None
    out = []
    for t in tree.ids():
        kids = tree.children(t)
        fams = tree.families.get(t, [])
        for s in kids:
            if not f.le(t, s):
                raise NotMonotone(f"label decreases from {t} to {s}", (t, s))
        if kadec:
            out.append(_kadec_verdict(tree, f, t, kids, fams))
            continue
        ft = _scalar(f, t)
        gaps = []
        bad = None
        for i, fam in enumerate(fams):
            inf, _ = _family_min(fam)
            if inf < ft:
                raise NotMonotone(f"family {i} at node {t} dips below the label", (t, i))
            if inf == ft:
                bad = Bad(t, i, fam)
                break
            gaps.append(inf - ft)
        if bad is not None:
            out.append(bad)
            continue
        if gaps:
            eps = min(gaps) / 2
        else:
            pos = [_scalar(f, s) - ft for s in kids if _scalar(f, s) > ft]
            eps = min(pos) / 2 if pos else Fraction(1)
        removed = frozenset(s for s in kids if not _scalar(f, s) > ft + eps)
        out.append(Good(t, eps, removed))
    return out


def _scalar(f: OrderLabel, t) -> Fraction:
    v = f.first(t)
    if isinstance(v, Enclosure):
        return v.lo
    return v


def _kadec_verdict(tree, f: KadecLabel, t, kids, fams):
    q = f.base.exact_value(t)
    gap = kadec_gap(q)
    for i, fam in enumerate(fams):
        inf, attained = _family_min(fam)
        # every successor value must exceed f(t) in the base label
        if inf < q or (inf == q and attained):
            return Bad(t, i, fam)
    removed = frozenset(s for s in kids if not f.base.exact_value(s) > q)
    return Good(t, gap / 2, removed)


def check_good(tree: Tree, f: OrderLabel, verdict: Good) -> bool:
    """Re-check a Good verdict against the definition."""
    t, eps = verdict.node, verdict.eps
    if isinstance(f, KadecLabel) and f.base is not None:
        q = f.base.exact_value(t)
        if eps >= kadec_gap(q):
            return False
        for s in tree.children(t):
            if s not in verdict.removed and not f.base.exact_value(s) > q:
                return False
        return all(_family_min(fam)[0] > q or
                   (_family_min(fam)[0] == q and not _family_min(fam)[1])
                   for fam in tree.families.get(t, []))
    ft = _scalar(f, t)
    for s in tree.children(t):
        if s not in verdict.removed and not _scalar(f, s) > ft + eps:
            return False
    return all(_family_min(fam)[0] > ft + eps for fam in tree.families.get(t, []))


# ---------------------------------------------------------------------------
# rho criterion


@dataclass
class RhoReport:
    chains: dict
    cantor_constant: Optional[list]
    bad_counts: dict = field(default_factory=dict)
    note: str = "refutation-only"

    @property
    def ok(self) -> bool:
        return (all(self.chains.values()) and self.cantor_constant is None
                and all(c <= 1 for c in self.bad_counts.values()))

    def violations(self) -> list:
        out = [{"kind": "equal-rho up-set not a chain", "node": t}
               for t, ok in sorted(self.chains.items()) if not ok]
        if self.cantor_constant is not None:
            out.append({"kind": "constant binary subtree", "nodes": self.cantor_constant})
        out.extend({"kind": "several bad points", "node": t, "count": c}
                   for t, c in sorted(self.bad_counts.items()) if c > 1)
        return out

    def to_json(self):
        return {"ok": self.ok, "note": self.note,
                "chains": {str(t): v for t, v in sorted(self.chains.items())},
                "cantor_constant": self.cantor_constant,
                "bad_counts": {str(t): c for t, c in sorted(self.bad_counts.items())},
                "violations": self.violations()}


def rho_check(tree: Tree, rho: OrderLabel, cantor_depth: int = 4,
              f: Optional[OrderLabel] = None) -> RhoReport:
    v = verify_order_label(tree, rho, strict=False)
    if v is not None:
        raise NotMonotone(f"rho decreases on {v.s} < {v.t}", (v.s, v.t))
    ids = tree.ids()
    same = {t: [s for s in tree.up_set(t) if s != t and rho.compare(s, t) == 0] for t in ids}
    chains = {}
    for t in ids:
        up = same[t]
        chains[t] = all(tree.comparable(a, b) for i, a in enumerate(up) for b in up[i + 1:])

    # depth of the largest full binary subtree of constant rho rooted at t
    depth = {}
    for t in sorted(ids, key=lambda u: -tree.depth(u)):
        best = 0
        above = same[t]
        for k in range(1, cantor_depth + 1):
            tall = [u for u in above if depth[u] >= k - 1]
            if any(not tree.comparable(a, b) for i, a in enumerate(tall) for b in tall[i + 1:]):
                best = k
            else:
                break
        depth[t] = best
    witness = None
    for t in ids:
        if depth[t] >= cantor_depth:
            witness = sorted(_binary_witness(tree, same, depth, t, cantor_depth))
            break

    bad_counts = {}
    if f is not None:
        bad = {v.node for v in bad_points(tree, f) if isinstance(v, Bad)}
        for t in ids:
            bad_counts[t] = sum(1 for s in [t] + same[t] if s in bad)
    return RhoReport(chains, witness, bad_counts)


def _binary_witness(tree, same, depth, t, k) -> set:
    if k == 0:
        return {t}
    tall = [u for u in same[t] if depth[u] >= k - 1]
    for i, a in enumerate(tall):
        for b in tall[i + 1:]:
            if not tree.comparable(a, b):
                return {t} | _binary_witness(tree, same, depth, a, k - 1) \
                    | _binary_witness(tree, same, depth, b, k - 1)
    raise AssertionError("depth table inconsistent")


def t2_rho(tree: Tree) -> OrderLabel:
    """sup t on base nodes; on copies <t, s> the infimum of sup over the
    successors above, which is the left end of the part's interval."""
    vals = {}
    for t in tree.ids():
        p = tree.payload(t)
        if isinstance(p, Pair):
            vals[t] = p.interval.lo
        elif isinstance(p, WOSet):
            vals[t] = p.sup()
        else:
            raise ValueError(f"node {t} has no well-ordered payload")
    return OrderLabel("R", vals)
