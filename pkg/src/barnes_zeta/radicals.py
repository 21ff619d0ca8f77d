"""Exact arithmetic on finite sums of rational multiples of square roots.

A :class:`Radical` is ``sum_D c_D * sqrt(D)`` over distinct squarefree ``D``
(``D = 1`` is the rational part).  Square roots of distinct squarefree
integers are linearly independent over Q, so equality and integrality are
decided exactly; floors are found by refining a ball until it is unambiguous.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Union

from flint import arb

from .errors import ParseError
from .numerics_core import fraction_to_arb, workprec


@lru_cache(maxsize=4096)
def squarefree_split(n: int) -> tuple[int, int]:
    """Write n = k^2 * d with d squarefree; return (k, d)."""
    if n <= 0:
        raise ValueError("squarefree_split needs a positive integer")
    k, d = 1, 1
    m = n
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        k *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1 if p == 2 else 2
    d *= m
    return k, d


RadLike = Union["Radical", int, Fraction]


class Radical:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self.terms = {d: Fraction(c) for d, c in (terms or {}).items() if c != 0}
        self._hash = None

    # construction -----------------------------------------------------------
    @classmethod
    def rational(cls, q) -> "Radical":
        return cls({1: Fraction(q)})

    @classmethod
    def sqrt(cls, n: int, coeff=1) -> "Radical":
        k, d = squarefree_split(int(n))
        return cls({d: Fraction(coeff) * k})

    @staticmethod
    def coerce(x: RadLike) -> "Radical":
        if isinstance(x, Radical):
            return x
        if isinstance(x, (int, Fraction)):
            return Radical.rational(x)
        raise TypeError(f"cannot use {type(x).__name__} as an exact radical")

    # predicates -------------------------------------------------------------
    def is_rational(self) -> bool:
        return all(d == 1 for d in self.terms)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("value is irrational")
        return self.terms.get(1, Fraction(0))

    def is_integer(self) -> bool:
        return self.is_rational() and self.rational_value().denominator == 1

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) <= 1

    # arithmetic -------------------------------------------------------------
    def __add__(self, other: RadLike) -> "Radical":
        other = Radical.coerce(other)
        out = dict(self.terms)
        for d, c in other.terms.items():
            out[d] = out.get(d, Fraction(0)) + c
        return Radical(out)

    __radd__ = __add__

    def __neg__(self) -> "Radical":
        return Radical({d: -c for d, c in self.terms.items()})

    def __sub__(self, other: RadLike) -> "Radical":
        return self + (-Radical.coerce(other))

    def __rsub__(self, other: RadLike) -> "Radical":
        return Radical.coerce(other) - self

    def __mul__(self, other: RadLike) -> "Radical":
        other = Radical.coerce(other)
        out: dict[int, Fraction] = {}
        for d1, c1 in self.terms.items():
            for d2, c2 in other.terms.items():
                g = math.gcd(d1, d2)
                d = (d1 // g) * (d2 // g)
                out[d] = out.get(d, Fraction(0)) + c1 * c2 * g
        return Radical(out)

    __rmul__ = __mul__

    def __truediv__(self, other: RadLike) -> "Radical":
        other = Radical.coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero radical")
        if not other.is_monomial():
            raise ValueError("only division by a single term c*sqrt(d) is supported")
        (d, c), = other.terms.items()
        # 1/(c sqrt d) = sqrt(d) / (c d)
        return self * Radical({d: 1 / (c * d)})

    def __eq__(self, other) -> bool:
        try:
            other = Radical.coerce(other)
        except TypeError:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self.terms.items())))
        return self._hash

    # numerics ---------------------------------------------------------------
    def to_arb(self, prec: int) -> arb:
        with workprec(prec):
            acc = arb(0)
            for d, c in sorted(self.terms.items()):
                term = fraction_to_arb(c)
                if d != 1:
                    term *= arb(d).sqrt()
                acc += term
            return acc

    def __float__(self) -> float:
        return float(self.to_arb(80).mid())

    def sign(self) -> int:
        if self.is_zero():
            return 0
        prec = 64
        while True:
            x = self.to_arb(prec)
            if x > 0:
                return 1
            if x < 0:
                return -1
            prec *= 2

    def __lt__(self, other: RadLike) -> bool:
        return (self - other).sign() < 0

    def __le__(self, other: RadLike) -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other: RadLike) -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other: RadLike) -> bool:
        return (self - other).sign() >= 0

    def floor(self) -> int:
        if self.is_rational():
            q = self.rational_value()
            return q.numerator // q.denominator
        prec = 64
        while True:
            x = self.to_arb(prec)
            lo = x.lower().floor()
            hi = x.upper().floor()
            if lo == hi:
                return int(lo.unique_fmpz())
            prec *= 2

    def ceil(self) -> int:
        return -((-self).floor())

    def frac(self) -> "Radical":
        return self - self.floor()

    def __repr__(self):
        return f"Radical({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for d, c in sorted(self.terms.items()):
            cs = str(c)
            parts.append(cs if d == 1 else (f"sqrt{d}" if c == 1 else f"{cs}*sqrt{d}"))
        return "+".join(parts).replace("+-", "-")


_NUM = r"(\d+(?:/\d+)?)"
_PARAM_RE = re.compile(rf"^(-)?(?:{_NUM}\*?)?(?:sqrt\(?(\d+)\)?)?$")


def parse_radical(text: str, allow_negative: bool = False) -> Radical:
    """Parse ``"p/q"``, ``"sqrtd"``, ``"r*sqrtd"`` or ``"r sqrt(d)"``.

    Decimal literals are rejected: parameters must be exact.
    """
    s = str(text).strip().replace(" ", "")
    m = _PARAM_RE.match(s)
    if not s or not m or (m.group(2) is None and m.group(3) is None):
        if any(ch in s for ch in ".eE"):
            raise ParseError(
                f"floating-point parameter {text!r} rejected: parameters must be exact (p/q, sqrtd "
                "or r*sqrtd) because the evaluation branch depends on whether v/w is rational")
        raise ParseError(f"invalid exact parameter {text!r} (use p/q, sqrtd or r*sqrtd)")
    neg, coeff, rad = m.group(1), m.group(2), m.group(3)
    c = Fraction(coeff) if coeff else Fraction(1)
    if neg:
        if not allow_negative:
            raise ParseError(f"parameter {text!r} must be positive")
        c = -c
    if rad is None:
        return Radical.rational(c)
    if int(rad) == 0:
        raise ParseError(f"invalid square root in {text!r}")
    return Radical.sqrt(int(rad), c)
