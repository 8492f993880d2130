"""Rational intervals with possibly infinite endpoints.

An endpoint at +-inf may be marked closed; that admits the extended value
itself (used for ``inf(empty) = +inf`` in membership rules).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .woset import NEG_INF, POS_INF, ExtRational, ext_rat, ext_str


@dataclass(frozen=True)
class Interval:
    lo: ExtRational
    hi: ExtRational
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", ext_rat(self.lo))
        object.__setattr__(self, "hi", ext_rat(self.hi))

    @classmethod
    def closed_open(cls, lo, hi) -> "Interval":
        return cls(lo, hi, True, False)

    def contains(self, q: ExtRational) -> bool:
        if q < self.lo or (q == self.lo and not self.lo_closed):
            return False
        if q > self.hi or (q == self.hi and not self.hi_closed):
            return False
        return True

    __contains__ = contains

    @property
    def is_empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    @property
    def is_bounded(self) -> bool:
        return self.lo != NEG_INF and self.hi != POS_INF

    def _lo_key(self):
        # ordering of left endpoints: closed before open at the same value
        return (self.lo, 0 if self.lo_closed else 1)

    def _hi_key(self):
        return (self.hi, 1 if self.hi_closed else 0)

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self._lo_key(), other._lo_key())
        hi = min(self._hi_key(), other._hi_key())
        return Interval(lo[0], hi[0], lo[1] == 0, hi[1] == 1)

    def is_disjoint(self, other: "Interval") -> bool:
        return self.intersect(other).is_empty

    def is_subset(self, other: "Interval") -> bool:
        if self.is_empty:
            return True
        return other._lo_key() <= self._lo_key() and self._hi_key() <= other._hi_key()

    def split(self, c: Fraction) -> tuple["Interval", "Interval"]:
        """[a, c) and [c, b) style halves; c must lie strictly inside."""
        if not (self.lo < c < self.hi):
            raise ValueError(f"split point {c} not inside {self}")
        return (Interval(self.lo, c, self.lo_closed, False),
                Interval(c, self.hi, True, self.hi_closed))

    def inf(self) -> ExtRational:
        return self.lo

    def to_json(self):
        return {"lo": ext_str(self.lo), "hi": ext_str(self.hi),
                "lo_closed": self.lo_closed, "hi_closed": self.hi_closed}

    @classmethod
    def from_json(cls, obj) -> "Interval":
        return cls(ext_rat(obj["lo"]), ext_rat(obj["hi"]),
                   bool(obj.get("lo_closed", True)), bool(obj.get("hi_closed", False)))

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{ext_str(self.lo)}, {ext_str(self.hi)}{right}"
