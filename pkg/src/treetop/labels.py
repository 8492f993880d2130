"""Order labels: maps from tree nodes into Q, R or the lexicographic R.R."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import PartialLabel
from .woset import Enclosure, ext_rat, ext_str, rat

CODOMAINS = ("Q", "R", "RlexR")


def _as_enclosure(v) -> Enclosure:
    if isinstance(v, Enclosure):
        return v
    return Enclosure.exact(v)


def compare_scalar(a, b) -> Optional[int]:
    """-1, 0, 1, or None when two enclosures overlap without being identical."""
    if not isinstance(a, Enclosure) and not isinstance(b, Enclosure):
        # exact rationals or infinite endpoints
        return (a > b) - (a < b)
    ea, eb = _as_enclosure(a), _as_enclosure(b)
    if ea.hi < eb.lo:
        return -1
    if eb.hi < ea.lo:
        return 1
    if ea == eb:
        # identical inexact enclosures only arise from copying one value
        return 0
    return None


@dataclass
class OrderLabel:
    codomain: str
    values: dict
    # proves values[s] < values[t] when enclosure arithmetic cannot
    certifier: Optional[Callable[[int, int], bool]] = field(default=None, repr=False)
    # at materialised limit nodes: the supremum along the implied chain
    limit_values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.codomain not in CODOMAINS:
            raise ValueError(f"unknown codomain {self.codomain!r}")

    def __getitem__(self, t):
        return self.values[t]

    def __contains__(self, t):
        return t in self.values

    def first(self, t):
        v = self.values[t]
        return v[0] if self.codomain == "RlexR" else v

    def compare(self, s, t) -> Optional[int]:
        a, b = self.values[s], self.values[t]
        if self.codomain != "RlexR":
            return compare_scalar(a, b)
        c = compare_scalar(a[0], b[0])
        if c != 0:
            return c
        return compare_scalar(a[1], b[1])

    def lt(self, s, t) -> bool:
        c = self.compare(s, t)
        if c is None and self.certifier is not None:
            return bool(self.certifier(s, t))
        return c == -1

    def le(self, s, t) -> bool:
        c = self.compare(s, t)
        if c is None and self.certifier is not None:
            return bool(self.certifier(s, t))
        return c in (-1, 0)

    def exact_value(self, t) -> Fraction:
        """Scalar value as an exact rational (raises on a wide enclosure)."""
        v = self.first(t)
        if isinstance(v, Enclosure):
            if not v.is_exact:
                raise ValueError(f"label at {t} is not exact: {v}")
            return v.lo
        return v

    def to_json(self):
        def enc(v):
            if isinstance(v, Enclosure):
                return v.to_json()
            if isinstance(v, tuple):
                return [enc(x) for x in v]
            return ext_str(v)

        return {"codomain": self.codomain,
                "values": {str(k): enc(v) for k, v in sorted(self.values.items())}}

    @classmethod
    def from_json(cls, obj) -> "OrderLabel":
        def dec(v):
            if isinstance(v, dict):
                return Enclosure(rat(v["lo"]), rat(v["hi"]))
            if isinstance(v, list):
                return tuple(dec(x) for x in v)
            return ext_rat(v)

        return cls(obj["codomain"], {int(k): dec(v) for k, v in obj["values"].items()})


@dataclass(frozen=True)
class Violation:
    s: int
    t: int

    def to_json(self):
        return {"s": self.s, "t": self.t}


def verify_order_label(tree, f: OrderLabel, strict: bool = True) -> Optional[Violation]:
    """First comparable pair s < t (BFS order on t, root-first on s) where
    f(s) < f(t) (or <= when not strict) fails; None when f preserves order."""
    missing = [t for t in tree.ids() if t not in f.values]
    if missing:
        raise PartialLabel(f"label missing on nodes {missing[:5]}")
    for t in tree.bfs():
        for s in tree.ancestors(t):
            ok = f.lt(s, t) if strict else f.le(s, t)
            if not ok:
                return Violation(s, t)
    return None


def ordinal_value(h) -> Fraction:
    """omega*k + n  |->  k + 1 - 2^-n; strictly increasing and continuous."""
    return Fraction(h.k + 1) - Fraction(1, 2**h.n)


def height_label(tree) -> OrderLabel:
    """Strict, continuous rational label read off node heights."""
    values = {t: ordinal_value(tree.height(t)) for t in tree.ids()}
    limits = {t: values[t] for t in tree.ids() if tree.node(t).limit}
    return OrderLabel("Q", values, limit_values=limits)


def phi_label(tree) -> OrderLabel:
    """phi(payload) for trees whose nodes carry WOSet payloads."""
    from .woset import WOSet, certify_phi_lt, is_initial_segment, phi

    values = {}
    for t in tree.ids():
        p = tree.node(t).payload
        if not isinstance(p, WOSet):
            raise TypeError(f"node {t} has no WOSet payload")
        values[t] = phi(p)

    def certifier(s, t):
        ps, pt = tree.node(s).payload, tree.node(t).payload
        if ps == pt or not is_initial_segment(ps, pt):
            return False
        return certify_phi_lt(ps, pt).gap > 0

    return OrderLabel("R", values, certifier=certifier)
