"""Exact rational intervals with open or closed ends.

Finite endpoints are ``Fraction``; infinite ones are ``math.inf`` or
``-math.inf`` and are always open.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

INF = math.inf
Bound = Union[Fraction, float]


def _infinite(x) -> bool:
    # only float endpoints can be infinite; huge Fractions overflow math.isinf
    return isinstance(x, float) and math.isinf(x)


@dataclass(frozen=True)
class Interval:
    lo: Bound = -INF
    hi: Bound = INF
    lo_open: bool = True
    hi_open: bool = True

    def __post_init__(self) -> None:
        if not _infinite(self.lo):
            object.__setattr__(self, "lo", Fraction(self.lo))
        else:
            object.__setattr__(self, "lo_open", True)
        if not _infinite(self.hi):
            object.__setattr__(self, "hi", Fraction(self.hi))
        else:
            object.__setattr__(self, "hi_open", True)

    @classmethod
    def point(cls, q) -> "Interval":
        return cls(Fraction(q), Fraction(q), False, False)

    @classmethod
    def closed(cls, lo, hi) -> "Interval":
        return cls(lo, hi, False, False)

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and (self.lo_open or self.hi_open))

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi and not self.lo_open and not self.hi_open

    @property
    def is_full(self) -> bool:
        return self.lo == -INF and self.hi == INF

    def contains(self, q) -> bool:
        if q < self.lo or q > self.hi:
            return False
        if q == self.lo and self.lo_open:
            return False
        if q == self.hi and self.hi_open:
            return False
        return True

    def has_zero(self) -> bool:
        return self.contains(0)

    def spans_zero(self) -> bool:
        return self.lo < 0 < self.hi

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lo_open = self.lo, self.lo_open
        elif self.lo < other.lo:
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open or other.lo_open
        if self.hi < other.hi:
            hi, hi_open = self.hi, self.hi_open
        elif self.hi > other.hi:
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open or other.hi_open
        return Interval(lo, hi, lo_open, hi_open)

    __and__ = intersect

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo, self.hi_open, self.lo_open)

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(
            _add_end(self.lo, other.lo), _add_end(self.hi, other.hi), self.lo_open or other.lo_open, self.hi_open or other.hi_open
        )

    def __sub__(self, other: "Interval") -> "Interval":
        return self + (-other)

    def __mul__(self, other: "Interval") -> "Interval":
        cands = [
            _mul_end(a, ao, b, bo)
            for a, ao in ((self.lo, self.lo_open), (self.hi, self.hi_open))
            for b, bo in ((other.lo, other.lo_open), (other.hi, other.hi_open))
        ]
        lo = min(v for v, _ in cands)
        hi = max(v for v, _ in cands)
        lo_open = all(o for v, o in cands if v == lo)
        hi_open = all(o for v, o in cands if v == hi)
        return Interval(lo, hi, lo_open, hi_open)

    def reciprocal(self) -> "Interval":
        """``{1/x : x in self, x != 0}``, widened to the full line when that is not an interval."""
        if self.lo == 0 and self.hi == 0:
            return EMPTY
        if self.spans_zero():
            return FULL
        if self.lo >= 0:
            lo, lo_open = self.lo, self.lo_open or self.lo == 0
            return Interval(_recip(self.hi), _recip(lo, positive=True), self.hi_open, lo_open)
        hi, hi_open = self.hi, self.hi_open or self.hi == 0
        return Interval(_recip(hi, positive=False), _recip(self.lo), hi_open, self.lo_open)

    def __truediv__(self, other: "Interval") -> "Interval":
        r = other.reciprocal()
        if r.is_empty:
            return EMPTY
        return self * r

    def __str__(self) -> str:
        if self.is_empty:
            return "empty"
        if self.is_point:
            return _fmt(self.lo)
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{_fmt(self.lo)}, {_fmt(self.hi)}{right}"


def _fmt(b: Bound) -> str:
    if b == INF:
        return "inf"
    if b == -INF:
        return "-inf"
    return str(b)


def _mul_end(a: Bound, ao: bool, b: Bound, bo: bool) -> tuple:
    if a == 0 or b == 0:
        # 0 * inf at a corner stands for products approaching 0
        open_ = (ao or bo) and not ((a == 0 and not ao) or (b == 0 and not bo))
        return Fraction(0), open_
    if _infinite(a) or _infinite(b):
        return (INF if (a > 0) == (b > 0) else -INF), True
    return a * b, ao or bo


def _add_end(a: Bound, b: Bound) -> Bound:
    # an infinite end absorbs any finite one, however large
    if _infinite(a):
        return a
    if _infinite(b):
        return b
    return a + b


def _recip(b: Bound, positive: bool = True) -> Bound:
    if _infinite(b):
        return Fraction(0)
    if b == 0:
        return INF if positive else -INF
    return 1 / b


FULL = Interval()
EMPTY = Interval(Fraction(1), Fraction(0), False, False)
