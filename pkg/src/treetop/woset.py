"""Well-ordered sets of rationals in finite block form.

A ``WOSet`` is a sequence of blocks.  A ``Fin`` block is a finite strictly
increasing run; an ``Omega`` block is the dyadic run
``limit - (limit - start) * 2**-i`` for ``i >= 0``, whose limit is not a
member.  Every value is normalised on construction so that two ``WOSet``
objects are equal exactly when they denote the same set.

Also here: the fixed enumeration of Q (Calkin-Wilf based), the weight
function ``phi`` with certified enclosures, and order types below omega^2.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Union

from .errors import InvalidWOSet, NotAnExtension

NEG_INF = float("-inf")
POS_INF = float("inf")

ExtRational = Union[Fraction, float]

#: number of leading elements of each Omega block used by enclosures
DEFAULT_TERMS = 64


def rat(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if "." in value or "e" in value.lower():
            raise ValueError(f"rational strings must be decimal-free: {value!r}")
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def rat_str(q: Fraction) -> str:
    return str(Fraction(q))


def ext_str(q: ExtRational) -> str:
    if q == NEG_INF:
        return "-inf"
    if q == POS_INF:
        return "inf"
    return rat_str(q)


def ext_rat(value) -> ExtRational:
    if isinstance(value, float):
        if value in (NEG_INF, POS_INF):
            return value
        raise TypeError("finite floats are not accepted")
    if value in ("-inf", "+inf", "inf"):
        return NEG_INF if value == "-inf" else POS_INF
    return rat(value)


def _is_power_of_two(q: Fraction) -> bool:
    return q.denominator == 1 and q.numerator > 0 and q.numerator & (q.numerator - 1) == 0


# ---------------------------------------------------------------------------
# blocks


@dataclass(frozen=True)
class Fin:
    items: tuple

    def __post_init__(self):
        items = tuple(rat(q) for q in self.items)
        object.__setattr__(self, "items", items)
        if not items:
            raise InvalidWOSet("Fin block must be nonempty")
        if any(a >= b for a, b in zip(items, items[1:])):
            raise InvalidWOSet(f"Fin block not strictly increasing: {items}")

    @property
    def first(self) -> Fraction:
        return self.items[0]

    @property
    def sup(self) -> Fraction:
        return self.items[-1]

    def contains(self, q: Fraction) -> bool:
        return q in self.items

    def to_json(self):
        return {"fin": [rat_str(q) for q in self.items]}


@dataclass(frozen=True)
class Omega:
    start: Fraction
    limit: Fraction

    def __post_init__(self):
        object.__setattr__(self, "start", rat(self.start))
        object.__setattr__(self, "limit", rat(self.limit))
        if not self.start < self.limit:
            raise InvalidWOSet(f"Omega block needs start < limit: {self.start}, {self.limit}")

    @property
    def first(self) -> Fraction:
        return self.start

    @property
    def sup(self) -> Fraction:
        return self.limit

    def element(self, i: int) -> Fraction:
        return self.limit - (self.limit - self.start) / 2**i

    def index_of(self, q: Fraction):
        if not self.start <= q < self.limit:
            return None
        ratio = (self.limit - self.start) / (self.limit - q)
        if not _is_power_of_two(ratio):
            return None
        return ratio.numerator.bit_length() - 1

    def contains(self, q: Fraction) -> bool:
        return self.index_of(q) is not None

    def count_below(self, bound: ExtRational, inclusive: bool) -> int:
        """Number of leading elements that are < bound (or <= bound)."""
        if bound >= self.limit:
            return -1  # all of them
        i = 0
        while True:
            e = self.element(i)
            if e > bound or (e == bound and not inclusive):
                return i
            i += 1

    def tail(self, i: int) -> "Omega":
        return Omega(self.element(i), self.limit)

    def to_json(self):
        return {"omega": {"start": rat_str(self.start), "limit": rat_str(self.limit)}}


Block = Union[Fin, Omega]


def _block_from_json(obj) -> Block:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise InvalidWOSet(f"bad block: {obj!r}")
    if "fin" in obj:
        return Fin(tuple(rat(q) for q in obj["fin"]))
    if "omega" in obj:
        om = obj["omega"]
        return Omega(rat(om["start"]), rat(om["limit"]))
    raise InvalidWOSet(f"bad block: {obj!r}")


def _normalize(blocks) -> tuple:
    merged = []
    for b in blocks:
        if isinstance(b, Fin) and merged and isinstance(merged[-1], Fin):
            merged[-1] = Fin(merged[-1].items + b.items)
        else:
            merged.append(b)
    out = []
    for b in merged:
        if isinstance(b, Omega) and out and isinstance(out[-1], Fin):
            fin = list(out[-1].items)
            start = b.start
            # absorb trailing Fin elements that continue the dyadic run backwards
            while fin and fin[-1] == 2 * start - b.limit:
                start = fin.pop()
            if start != b.start:
                b = Omega(start, b.limit)
                if fin:
                    out[-1] = Fin(tuple(fin))
                else:
                    out.pop()
        out.append(b)
    return tuple(out)


# ---------------------------------------------------------------------------
# order types


@dataclass(frozen=True, order=True)
class OrdinalRep:
    """The ordinal omega*k + n."""

    k: int = 0
    n: int = 0

    def __post_init__(self):
        if self.k < 0 or self.n < 0:
            raise ValueError("ordinal coefficients must be natural numbers")

    def succ(self, m: int = 1) -> "OrdinalRep":
        return OrdinalRep(self.k, self.n + m)

    def plus_omega(self, m: int = 1) -> "OrdinalRep":
        return OrdinalRep(self.k + m, 0)

    @property
    def is_limit(self) -> bool:
        return self.k > 0 and self.n == 0

    def __str__(self):
        if self.k == 0:
            return str(self.n)
        head = "w" if self.k == 1 else f"w*{self.k}"
        return head if self.n == 0 else f"{head}+{self.n}"


@dataclass(frozen=True)
class Enclosure:
    """A real value v with lo <= v <= hi."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", rat(self.lo))
        object.__setattr__(self, "hi", rat(self.hi))
        if self.lo > self.hi:
            raise ValueError("enclosure with lo > hi")

    @classmethod
    def exact(cls, q) -> "Enclosure":
        return cls(q, q)

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, q) -> bool:
        return self.lo <= q <= self.hi

    def distance_bound(self, other: "Enclosure") -> Fraction:
        """Upper bound on |u - v| for u in self and v in other."""
        return max(abs(self.hi - other.lo), abs(other.hi - self.lo))

    def to_json(self):
        return {"lo": rat_str(self.lo), "hi": rat_str(self.hi)}


# ---------------------------------------------------------------------------
# WOSet


class WOSet:
    __slots__ = ("blocks", "_hash")

    def __init__(self, blocks: Iterable[Block] = ()):
        blocks = tuple(blocks)
        for b in blocks:
            if not isinstance(b, (Fin, Omega)):
                raise InvalidWOSet(f"not a block: {b!r}")
        for prev, nxt in zip(blocks, blocks[1:]):
            if isinstance(prev, Fin):
                if not prev.sup < nxt.first:
                    raise InvalidWOSet(f"blocks overlap: {prev} then {nxt}")
            elif not prev.sup <= nxt.first:
                raise InvalidWOSet(f"blocks overlap: {prev} then {nxt}")
        self.blocks = _normalize(blocks)
        self._hash = hash(self.blocks)

    # constructors -----------------------------------------------------------

    @classmethod
    def of(cls, *elements) -> "WOSet":
        """Finite set from its elements (any order)."""
        items = sorted({rat(q) for q in elements})
        return cls([Fin(tuple(items))] if items else [])

    @classmethod
    def from_parts(cls, parts) -> "WOSet":
        """Build from an ordered list mixing single rationals and Omega blocks."""
        blocks = []
        run = []
        for p in parts:
            if isinstance(p, Omega):
                if run:
                    blocks.append(Fin(tuple(run)))
                    run = []
                blocks.append(p)
            elif isinstance(p, Fin):
                run.extend(p.items)
            else:
                run.append(rat(p))
        if run:
            blocks.append(Fin(tuple(run)))
        return cls(blocks)

    @classmethod
    def from_json(cls, obj) -> "WOSet":
        if not isinstance(obj, dict) or "blocks" not in obj:
            raise InvalidWOSet(f"bad WOSet json: {obj!r}")
        return cls(_block_from_json(b) for b in obj["blocks"])

    def to_json(self):
        return {"blocks": [b.to_json() for b in self.blocks]}

    # basic protocol ---------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, WOSet):
            return NotImplemented
        return self.blocks == other.blocks

    def __hash__(self):
        return self._hash

    def __repr__(self):
        parts = []
        for b in self.blocks:
            if isinstance(b, Fin):
                parts.extend(rat_str(q) for q in b.items)
            else:
                parts.append(f"w[{rat_str(b.start)}->{rat_str(b.limit)})")
        return "{" + ", ".join(parts) + "}"

    def __bool__(self):
        return bool(self.blocks)

    def __contains__(self, q) -> bool:
        q = rat(q)
        return any(b.contains(q) for b in self.blocks)

    @property
    def is_finite(self) -> bool:
        return all(isinstance(b, Fin) for b in self.blocks)

    def __len__(self):
        if not self.is_finite:
            raise TypeError("infinite WOSet has no len()")
        return sum(len(b.items) for b in self.blocks)

    def sup(self) -> ExtRational:
        return self.blocks[-1].sup if self.blocks else NEG_INF

    def sup_attained(self) -> bool:
        return bool(self.blocks) and isinstance(self.blocks[-1], Fin)

    def min(self) -> ExtRational:
        return self.blocks[0].first if self.blocks else POS_INF

    def elements(self, terms: int | None = None) -> Iterator[Fraction]:
        """Iterate in increasing order; Omega blocks contribute ``terms`` elements
        each (all of them when ``terms`` is None, which never terminates)."""
        for b in self.blocks:
            if isinstance(b, Fin):
                yield from b.items
            else:
                rng = itertools.count() if terms is None else range(terms)
                for i in rng:
                    yield b.element(i)

    def order_type(self) -> OrdinalRep:
        return order_type(self)

    # structural operations --------------------------------------------------

    def truncate(self, bound: ExtRational, inclusive: bool) -> "WOSet":
        """The subset of elements below ``bound`` (or at most ``bound``)."""
        out = []
        for b in self.blocks:
            if isinstance(b, Fin):
                keep = [q for q in b.items if q < bound or (inclusive and q == bound)]
                out.extend(keep)
                if len(keep) < len(b.items):
                    break
            else:
                cnt = b.count_below(bound, inclusive)
                if cnt < 0:
                    out.append(b)
                    continue
                out.extend(b.element(i) for i in range(cnt))
                break
        return WOSet.from_parts(out)

    def first_above(self, bound: ExtRational, strict: bool) -> ExtRational:
        """min { q in self : q > bound } (q >= bound if not strict); +inf if none."""
        for b in self.blocks:
            if isinstance(b, Fin):
                for q in b.items:
                    if q > bound or (not strict and q == bound):
                        return q
            else:
                if b.limit <= bound:
                    continue
                cnt = b.count_below(bound, inclusive=strict)
                return b.element(cnt)
        return POS_INF

    def extend(self, q) -> "WOSet":
        """End-extension t | {q}; q must lie strictly above every element."""
        q = rat(q)
        s = self.sup()
        if q < s or (q == s and self.sup_attained()):
            raise InvalidWOSet(f"{q} does not lie above {self!r}")
        return WOSet(self.blocks + (Fin((q,)),))

    def extend_omega(self, start, limit) -> "WOSet":
        om = Omega(rat(start), rat(limit))
        return WOSet(self.blocks + (om,))

    def add(self, q) -> "WOSet":
        """t | {q} for an arbitrary rational q (not necessarily an end-extension)."""
        q = rat(q)
        if q in self:
            return self
        parts = []
        placed = False
        for b in self.blocks:
            if placed:
                parts.append(b)
                continue
            if isinstance(b, Fin):
                for e in b.items:
                    if not placed and q < e:
                        parts.append(q)
                        placed = True
                    parts.append(e)
            else:
                if q < b.start:
                    parts.extend([q, b])
                    placed = True
                elif q < b.limit:
                    cnt = b.count_below(q, inclusive=False)
                    parts.extend(b.element(i) for i in range(cnt))
                    parts.extend([q, b.tail(cnt)])
                    placed = True
                else:
                    parts.append(b)
        if not placed:
            parts.append(q)
        return WOSet.from_parts(parts)

    def prefix(self, count: int) -> "WOSet":
        """The first ``count`` elements as a finite set."""
        return WOSet.from_parts(list(itertools.islice(self.elements(), count)))


EMPTY = WOSet()


def random_woset(rng: random.Random, max_blocks: int = 3, lo: int = -3, hi: int = 6,
                 omega_prob: float = 0.35) -> WOSet:
    """A random WOSet with small rational entries and mixed blocks."""
    parts = []
    cur = Fraction(rng.randint(lo, lo + 2), rng.choice((1, 2)))
    for _ in range(rng.randint(0, max_blocks)):
        if rng.random() < omega_prob:
            width = Fraction(rng.randint(1, 4), rng.choice((1, 2, 4)))
            parts.append(Omega(cur, cur + width))
            cur = cur + width + (0 if rng.random() < 0.3 else Fraction(rng.randint(1, 3), 2))
        else:
            for _ in range(rng.randint(1, 3)):
                parts.append(cur)
                cur += Fraction(rng.randint(1, 4), rng.choice((1, 2, 3)))
        if cur > hi:
            break
    return WOSet.from_parts(parts)


# ---------------------------------------------------------------------------
# the initial-segment order


def is_initial_segment(x: WOSet, y: WOSet) -> bool:
    """x is an initial segment of y: x <= y and inf(y - x) >= sup(x)."""
    if not x.blocks:
        return True
    if len(x.blocks) == 1 and isinstance(x.blocks[0], Fin) and y.blocks \
            and isinstance(y.blocks[0], Fin) and len(y.blocks[0].items) >= len(x.blocks[0].items):
        # both start with listed elements: a plain prefix test
        n = len(x.blocks[0].items)
        return y.blocks[0].items[:n] == x.blocks[0].items
    return y.truncate(x.sup(), inclusive=x.sup_attained()) == x


def _head(blocks: list):
    b = blocks[0]
    if isinstance(b, Fin):
        rest = [Fin(b.items[1:])] if len(b.items) > 1 else []
        return b.first, rest + blocks[1:]
    return b.start, [b.tail(1)] + blocks[1:]


def meet(x: WOSet, y: WOSet) -> WOSet:
    """Longest common initial segment."""
    bx, by = list(x.blocks), list(y.blocks)
    out = []
    while bx and by:
        a, b = bx[0], by[0]
        if isinstance(a, Omega) and a == b:
            out.append(a)
            bx, by = bx[1:], by[1:]
            continue
        ea, bx = _head(bx)
        eb, by = _head(by)
        if ea != eb:
            break
        out.append(ea)
    return WOSet.from_parts(out)


def order_type(t: WOSet) -> OrdinalRep:
    k = n = 0
    for b in t.blocks:
        if isinstance(b, Fin):
            n += len(b.items)
        else:
            k, n = k + 1, 0
    return OrdinalRep(k, n)


# ---------------------------------------------------------------------------
# enumeration of Q


def calkin_wilf(n: int) -> Fraction:
    """n-th term (n >= 1) of the Calkin-Wilf sequence, CW(1) = 1."""
    if n < 1:
        raise ValueError("Calkin-Wilf index starts at 1")
    a, b = 1, 1
    for bit in bin(n)[3:]:
        if bit == "0":
            b = a + b
        else:
            a = a + b
    return Fraction(a, b)


def calkin_wilf_index(q: Fraction) -> int:
    """Inverse of calkin_wilf for positive rationals."""
    q = rat(q)
    if q <= 0:
        raise ValueError("Calkin-Wilf index is defined for positive rationals")
    p, d = q.numerator, q.denominator
    runs = []  # bottom-up (bit, length)
    while (p, d) != (1, 1):
        if p > d:
            k = (p - 1) // d
            p -= k * d
            runs.append(("1", k))
        else:
            k = (d - 1) // p
            d -= k * p
            runs.append(("0", k))
    bits = "".join(bit * k for bit, k in reversed(runs))
    return int("1" + bits, 2)


def rational_at(n: int) -> Fraction:
    """q_n of the fixed enumeration: q_0 = 0, q_{2k-1} = CW(k), q_{2k} = -CW(k)."""
    if n < 0:
        raise ValueError("negative index")
    if n == 0:
        return Fraction(0)
    if n % 2:
        return calkin_wilf((n + 1) // 2)
    return -calkin_wilf(n // 2)


def idx(q) -> int:
    q = rat(q)
    if q == 0:
        return 0
    if q > 0:
        return 2 * calkin_wilf_index(q) - 1
    return 2 * calkin_wilf_index(-q)


# ---------------------------------------------------------------------------
# the weight function phi(t) = sum 2^-idx(q)


PHI_CAP = 4096  # terms 2^-n with n beyond this are only bounded, never summed


def _path_length(q: Fraction) -> int:
    """Length of the Stern-Brocot path to |q|; idx(q) >= 2^length."""
    p, d = abs(q.numerator), q.denominator
    if p == 0:
        return 0
    total = 0
    while d:
        k, r = divmod(p, d)
        total += k
        p, d = d, r
    return total - 1


def _run_weight(b: "Omega", terms: int):
    """(exact partial sum, bound on the rest) of sum 2^-idx over an Omega run."""
    lo, slack = Fraction(0), Fraction(0)
    for i in range(terms):
        q = b.element(i)
        if _path_length(q) <= PHI_CAP.bit_length() and idx(q) <= PHI_CAP:
            lo += Fraction(1, 2 ** idx(q))
        else:
            slack += Fraction(1, 2**PHI_CAP)
    # x_i sits within width/2^i of the limit a/c, so den(x_i) >= 2^i/(width*c)
    # and the path length is at least i - log2(width*c) - 1
    scale = (b.limit - b.start) * b.limit.denominator
    shift = max(0, math.ceil(math.log2(scale))) + 1
    first = terms - shift
    if first >= PHI_CAP.bit_length():
        slack += Fraction(2, 2**PHI_CAP)
    else:
        slack = None
    return lo, slack


def phi(t: WOSet, terms: int = DEFAULT_TERMS) -> Enclosure:
    """Exact on finite sets.  On an Omega run the first ``terms`` elements are
    summed when their index is small, and everything else is bounded through
    the growth of the index along the run."""
    fin_idx = [idx(q) for b in t.blocks if isinstance(b, Fin) for q in b.items]
    lo = sum((Fraction(1, 2**n) for n in fin_idx), Fraction(0))
    slack = Fraction(0)
    for b in t.blocks:
        if isinstance(b, Omega):
            part, rest = _run_weight(b, terms)
            lo += part
            if rest is None:
                # wide run: fall back on the total weight 2 of all indices
                return Enclosure(lo, Fraction(2))
            slack += rest
    return Enclosure(lo, lo + slack)


@dataclass(frozen=True)
class PhiGap:
    """phi(t) - phi(s) >= gap, witnessed by element in t - s."""

    element: Fraction
    gap: Fraction


def certify_phi_lt(s: WOSet, t: WOSet) -> PhiGap:
    if s == t or not is_initial_segment(s, t):
        raise NotAnExtension(f"{s!r} is not a proper initial segment of {t!r}")
    w = t.first_above(s.sup(), strict=s.sup_attained())
    return PhiGap(w, Fraction(1, 2 ** idx(w)))
