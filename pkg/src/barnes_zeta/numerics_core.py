"""Multiprecision scalars, error budgets, Bernoulli numbers and the complex Gamma function.

All arithmetic is done in ball arithmetic (python-flint's ``arb``/``acb``).  The
public wrappers :class:`HPReal` and :class:`HPComplex` tag every value with the
precision it was produced at, so that values coming from different precision
settings are never mixed silently.
"""
from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from decimal import Decimal, localcontext, ROUND_HALF_EVEN
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Union

import mpmath
from flint import acb, arb, ctx, fmpq, fmpz

from .errors import PoleError, PrecisionError, PrecisionMismatchError

DEFAULT_PREC = 256
MIN_PREC = 64
GUARD_BITS = 32


def check_prec(prec: int) -> int:
    prec = int(prec)
    if prec < MIN_PREC:
        raise PrecisionError(f"precision {prec} is below the minimum of {MIN_PREC} bits")
    return prec


@contextmanager
def workprec(prec: int) -> Iterator[None]:
    """Temporarily set the working precision of the flint context (bits)."""
    with ctx.workprec(int(prec)):
        yield


# ----------------------------------------------------------------------------
# conversions
# ----------------------------------------------------------------------------

Number = Union[int, float, complex, str, Fraction, arb, acb, "HPReal", "HPComplex"]


def fraction_to_arb(q: Fraction) -> arb:
    return arb(fmpq(q.numerator, q.denominator))


def arb_exact_fraction(x: arb) -> Fraction:
    """Exact value of the midpoint of ``x`` as a Fraction."""
    man, exp = x.mid().man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** -exp)


def upper_fraction(x: Union[arb, acb]) -> Fraction:
    """A dyadic rational that is >= |x| for every point of the ball."""
    if isinstance(x, acb):
        x = x.abs_upper() if hasattr(x, "abs_upper") else abs(x).upper()
    else:
        x = x.abs_upper()
    if not x.is_finite():
        raise PrecisionError("non-finite magnitude bound")
    return arb_exact_fraction(x)


def to_arb(x, prec: int | None = None) -> arb:
    if isinstance(x, HPReal):
        return x.value
    if isinstance(x, arb):
        return x
    if isinstance(x, Fraction):
        return fraction_to_arb(x)
    if isinstance(x, (int, fmpz)):
        return arb(x)
    if isinstance(x, float):
        return arb(x)
    if isinstance(x, str):
        return arb(x.strip())
    if isinstance(x, mpmath.mpf):
        man, exp = x.man_exp
        return arb(fmpz(int(man))) * arb(2) ** int(exp)
    raise TypeError(f"cannot convert {type(x).__name__} to a real ball")


def input_prec(prec: int) -> int:
    """Precision for rounding an exact input so it stays sharp inside evaluators."""
    return 2 * int(prec) + 128


def exact_point(re, im, prec: int) -> acb:
    """The complex number re + i im from exact rationals, rounded at input_prec."""
    with workprec(input_prec(prec)):
        return acb(fraction_to_arb(Fraction(re)), fraction_to_arb(Fraction(im)))


def to_acb(x, prec: int | None = None) -> acb:
    if isinstance(x, HPComplex):
        return x.value
    if isinstance(x, HPReal):
        return acb(x.value)
    if isinstance(x, acb):
        return x
    if isinstance(x, complex):
        return acb(x.real, x.imag)
    if isinstance(x, mpmath.mpc):
        return acb(to_arb(x.real), to_arb(x.imag))
    if isinstance(x, str):
        return parse_complex(x)
    return acb(to_arb(x, prec))


def parse_complex(text: str) -> acb:
    """Parse ``"a+bi"``, ``"a-bi"``, ``"bi"`` or ``"a"`` into an exact-as-possible ball."""
    from .errors import ParseError

    s = text.strip().replace(" ", "").replace("j", "i")
    if not s:
        raise ParseError("empty complex literal")
    try:
        if not s.endswith("i"):
            return acb(arb(s))
        body = s[:-1]
        cut = max(body.rfind("+"), body.rfind("-"))
        # a sign right after an exponent marker belongs to the exponent
        while cut > 0 and body[cut - 1] in "eE":
            cut = max(body.rfind("+", 0, cut - 1), body.rfind("-", 0, cut - 1))
        if cut <= 0:
            re_part, im_part = "0", body
        else:
            re_part, im_part = body[:cut], body[cut:]
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        return acb(arb(re_part), arb(im_part))
    except (ValueError, TypeError) as exc:
        raise ParseError(f"cannot parse complex number {text!r}") from exc


def arb_to_mpf(x: arb):
    man, exp = x.mid().man_exp()
    return mpmath.mpf((int(man), int(exp))) if int(man) else mpmath.mpf(0)


def format_arb(x: arb, prec: int) -> str:
    """Decimal string of the midpoint with enough digits to round-trip at ``prec`` bits."""
    digits = int(math.ceil(prec * math.log10(2))) + 1
    q = arb_exact_fraction(x)
    if q == 0:
        return "0"
    with localcontext() as c:
        c.prec = digits
        c.rounding = ROUND_HALF_EVEN
        d = (Decimal(q.numerator) / Decimal(q.denominator)).normalize()
    return format(d, "E") if abs(d) < Decimal("1e-5") or abs(d) >= Decimal(10) ** 20 else format(d, "f")


# ----------------------------------------------------------------------------
# tagged scalars
# ----------------------------------------------------------------------------


def _same_prec(a, b) -> int:
    pa = getattr(a, "prec", None)
    pb = getattr(b, "prec", None)
    if pa is not None and pb is not None and pa != pb:
        raise PrecisionMismatchError(f"cannot combine values at {pa} and {pb} bits")
    return pa if pa is not None else pb


@dataclass(frozen=True)
class HPReal:
    value: arb
    prec: int

    def __post_init__(self):
        check_prec(self.prec)

    @classmethod
    def make(cls, x, prec: int = DEFAULT_PREC) -> "HPReal":
        with workprec(prec):
            return cls(+to_arb(x), prec)

    def _wrap(self, other):
        prec = _same_prec(self, other)
        return to_arb(other), prec

    def __add__(self, other):
        o, p = self._wrap(other)
        with workprec(p):
            return HPReal(self.value + o, p)

    __radd__ = __add__

    def __sub__(self, other):
        o, p = self._wrap(other)
        with workprec(p):
            return HPReal(self.value - o, p)

    def __rsub__(self, other):
        o, p = self._wrap(other)
        with workprec(p):
            return HPReal(o - self.value, p)

    def __mul__(self, other):
        o, p = self._wrap(other)
        with workprec(p):
            return HPReal(self.value * o, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o, p = self._wrap(other)
        with workprec(p):
            return HPReal(self.value / o, p)

    def __neg__(self):
        with workprec(self.prec):
            return HPReal(-self.value, self.prec)

    def __abs__(self):
        with workprec(self.prec):
            return HPReal(abs(self.value), self.prec)

    def __float__(self):
        return float(self.value.mid())

    def to_mpf(self):
        return arb_to_mpf(self.value)

    def __str__(self):
        return format_arb(self.value, self.prec)


@dataclass(frozen=True)
class HPComplex:
    value: acb
    prec: int

    def __post_init__(self):
        check_prec(self.prec)

    @classmethod
    def make(cls, z, prec: int = DEFAULT_PREC) -> "HPComplex":
        with workprec(prec):
            return cls(+to_acb(z), prec)

    @property
    def real(self) -> HPReal:
        return HPReal(self.value.real, self.prec)

    @property
    def imag(self) -> HPReal:
        return HPReal(self.value.imag, self.prec)

    def _wrap(self, other):
        prec = _same_prec(self, other)
        return to_acb(other), prec

    def __add__(self, other):
        o, p = self._wrap(other)
        with workprec(p):
            return HPComplex(self.value + o, p)

    __radd__ = __add__

    def __sub__(self, other):
        o, p = self._wrap(other)
        with workprec(p):
            return HPComplex(self.value - o, p)

    def __rsub__(self, other):
        o, p = self._wrap(other)
        with workprec(p):
            return HPComplex(o - self.value, p)

    def __mul__(self, other):
        o, p = self._wrap(other)
        with workprec(p):
            return HPComplex(self.value * o, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o, p = self._wrap(other)
        with workprec(p):
            return HPComplex(self.value / o, p)

    def __neg__(self):
        with workprec(self.prec):
            return HPComplex(-self.value, self.prec)

    def __abs__(self) -> HPReal:
        with workprec(self.prec):
            return HPReal(abs(self.value), self.prec)

    def conjugate(self) -> "HPComplex":
        # flint rounds even exact operations to the context precision
        with workprec(self.prec):
            return HPComplex(self.value.conjugate(), self.prec)

    def __complex__(self):
        return complex(float(self.value.real.mid()), float(self.value.imag.mid()))

    def to_mpc(self):
        return mpmath.mpc(arb_to_mpf(self.value.real), arb_to_mpf(self.value.imag))

    def __str__(self):
        re = format_arb(self.value.real, self.prec)
        im = format_arb(self.value.imag, self.prec)
        sign = "" if im.startswith("-") else "+"
        return f"{re}{sign}{im}i"


# ----------------------------------------------------------------------------
# error budgets
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorBudget:
    """Rigorous error bound assembled from labeled contributions.

    Contributions are exact dyadic rationals, so combining budgets is exactly
    associative and ``bound`` always equals the sum of the contributions.
    """

    contributions: tuple[tuple[str, Fraction], ...] = ()

    @classmethod
    def zero(cls) -> "ErrorBudget":
        return cls(())

    @classmethod
    def single(cls, label: str, bound) -> "ErrorBudget":
        if isinstance(bound, (arb, acb)):
            bound = upper_fraction(bound)
        bound = Fraction(bound)
        if bound < 0:
            raise ValueError("error contributions must be non-negative")
        return cls(((label, bound),))

    @classmethod
    def rounding(cls, value: Union[arb, acb], label: str = "rounding") -> "ErrorBudget":
        """Contribution equal to the radius of a ball."""
        if isinstance(value, acb):
            r = value.real.rad() + value.imag.rad()
        else:
            r = value.rad()
        return cls.single(label, arb_exact_fraction(r))

    @property
    def bound(self) -> Fraction:
        return sum((c for _, c in self.contributions), Fraction(0))

    def bound_hp(self, prec: int = DEFAULT_PREC) -> HPReal:
        return HPReal.make(self.bound, prec)

    def __float__(self):
        b = self.bound
        # round up so the float is still an upper bound
        f = float(b)
        return f if Fraction(f) >= b else math.nextafter(f, math.inf)

    def __add__(self, other: "ErrorBudget") -> "ErrorBudget":
        if not isinstance(other, ErrorBudget):
            return NotImplemented
        return ErrorBudget(self.contributions + other.contributions)

    def scaled(self, factor) -> "ErrorBudget":
        """Budget of ``c*value`` given an upper bound for ``|c|``."""
        if isinstance(factor, (arb, acb)):
            factor = upper_fraction(factor)
        factor = Fraction(factor)
        return ErrorBudget(tuple((lab, c * factor) for lab, c in self.contributions))

    def relabeled(self, prefix: str) -> "ErrorBudget":
        return ErrorBudget(tuple((f"{prefix}.{lab}", c) for lab, c in self.contributions))

    def by_label(self) -> dict[str, Fraction]:
        out: dict[str, Fraction] = {}
        for lab, c in self.contributions:
            out[lab] = out.get(lab, Fraction(0)) + c
        return out

    @staticmethod
    def total(budgets: Iterable["ErrorBudget"]) -> "ErrorBudget":
        acc: tuple = ()
        for b in budgets:
            acc = acc + b.contributions
        return ErrorBudget(acc)


# ----------------------------------------------------------------------------
# Bernoulli numbers
# ----------------------------------------------------------------------------


class BernoulliCache:
    """Append-only table of exact Bernoulli numbers ``B_0, B_1 = -1/2, B_2, ...``.

    Even-index values come from the tangent-number recurrence (integer only),
    which is much faster than the rational recurrence for large indices.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._even: list[Fraction] = [Fraction(1)]  # B_0, B_2, B_4, ...

    def _extend(self, kmax: int) -> None:
        n = kmax
        t = [0] * (n + 1)
        t[1] = 1
        for k in range(2, n + 1):
            t[k] = (k - 1) * t[k - 1]
        for k in range(2, n + 1):
            for j in range(k, n + 1):
                t[j] = (j - k) * t[j - 1] + (j - k + 2) * t[j]
        evens = [Fraction(1)]
        for k in range(1, n + 1):
            four = 4 ** k
            b = Fraction(2 * k * t[k], four * (four - 1))
            evens.append(b if k % 2 == 1 else -b)
        self._even = evens

    def get(self, n: int) -> Fraction:
        n = int(n)
        if n < 0:
            raise ValueError("Bernoulli index must be non-negative")
        if n == 1:
            return Fraction(-1, 2)
        if n % 2 == 1:
            return Fraction(0)
        k = n // 2
        with self._lock:
            if k >= len(self._even):
                self._extend(max(k, 2 * len(self._even)))
            return self._even[k]

    def __len__(self):
        return 2 * len(self._even)


_BERNOULLI = BernoulliCache()


def bernoulli(n: int) -> Fraction:
    """Exact Bernoulli number B_n with the convention B_1 = -1/2."""
    return _BERNOULLI.get(n)


@lru_cache(maxsize=None)
def _bernoulli_ratio_arb(n: int, prec: int) -> arb:
    # B_n / n!
    with workprec(prec):
        return fraction_to_arb(bernoulli(n)) / arb.fac_ui(n)


def bernoulli_over_factorial(n: int, prec: int) -> arb:
    return _bernoulli_ratio_arb(int(n), int(prec))


# ----------------------------------------------------------------------------
# complex Gamma
# ----------------------------------------------------------------------------

_MAX_STIRLING_TERMS = 400


def _is_nonpositive_integer(z: acb) -> bool:
    if not z.imag.contains(0):
        return False
    re = z.real
    if re > 0.5:
        return False
    return re.contains_integer()


def _stirling_loggamma(w: acb, wp: int) -> tuple[acb, arb]:
    """log Gamma(w) by Stirling's series for Re(w) > 0 with a bound on the tail."""
    with workprec(wp):
        absw = abs(w).lower()
        # sec(arg(w)/2)^2 = 2|w|/(|w|+Re w)
        sec2 = 2 * abs(w).upper() / (abs(w).lower() + w.real.lower())
        target = arb(2) ** (-wp)
        inv = 1 / w
        inv2 = inv * inv
        s = (w - arb(0.5)) * w.log() - w + arb.pi().log() / 2 + arb(2).log() / 2
        pw = inv
        for k in range(1, _MAX_STIRLING_TERMS + 1):
            b2k = fraction_to_arb(bernoulli(2 * k))
            s += b2k / (2 * k * (2 * k - 1)) * pw
            pw *= inv2
            b2k2 = abs(fraction_to_arb(bernoulli(2 * k + 2)))
            tail = b2k2 / ((2 * k + 2) * (2 * k + 1)) / absw ** (2 * k + 1) * sec2 ** (k + 1)
            if tail < target:
                return s, tail.upper()
            if k > 4 and tail > 1:
                break
        raise PrecisionError("Stirling series cannot reach the target accuracy")


def _gamma_right(z: acb, wp: int, shift_to: float) -> tuple[acb, arb]:
    """Gamma(z) for Re z >= 1/2, returning (value, relative tail bound)."""
    with workprec(wp):
        n = 0
        if abs(z).upper() < shift_to:
            n = max(0, int(math.ceil(shift_to - float(z.real.mid()))))
        w = z + n
        lg, tail = _stirling_loggamma(w, wp)
        g = lg.exp()
        if n:
            prod = acb(1)
            for j in range(n):
                prod *= z + j
            g = g / prod
        # |e^R - 1| <= |R| e^{|R|}
        rel = tail * tail.exp()
        return g, rel


def complex_loggamma(z, prec: int = DEFAULT_PREC) -> acb:
    """A logarithm of Gamma(z) (not necessarily the principal branch of log Gamma)."""
    prec = check_prec(prec)
    z = to_acb(z)
    if _is_nonpositive_integer(z):
        raise PoleError("Gamma has a pole at non-positive integers")
    wp = prec + GUARD_BITS + int(math.log2(float(abs(z).upper()) + 2))
    with workprec(wp):
        if z.real < 0.5:
            # log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
            lg = complex_loggamma(1 - z, prec)
            return arb.pi().log() - (acb.pi() * z).sin().log() - lg
        w = z
        n = 0
        shift_to = wp / 4
        if abs(z).upper() < shift_to:
            n = max(0, int(math.ceil(shift_to - float(z.real.mid()))))
        w = z + n
        lg, tail = _stirling_loggamma(w, wp)
        for j in range(n):
            lg -= (z + j).log()
        return lg + acb(arb(0, tail), arb(0, tail))


def complex_gamma(z, prec: int = DEFAULT_PREC) -> tuple[HPComplex, ErrorBudget]:
    """Gamma(z) by Stirling's series with upward shifting and reflection.

    The returned budget bounds the distance from the returned midpoint to the
    true value; it is at most ``2**(8 - prec) * |Gamma(z)|``.
    """
    prec = check_prec(prec)
    z = to_acb(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at {z}")
    mag = float(abs(z).upper())
    wp = prec + GUARD_BITS + int(math.log2(mag + 2)) + 8
    shift_to = prec / 4
    with workprec(wp):
        if z.real < 0.5:
            g1, rel = _gamma_right(1 - z, wp, shift_to)
            g = acb.pi() / ((acb.pi() * z).sin() * g1)
            # 1/(1+e) - 1 is bounded by e/(1-e)
            rel = rel / (1 - rel)
        else:
            g, rel = _gamma_right(z, wp, shift_to)
        absg = abs(g)
        trunc = ErrorBudget.single("stirling_tail", (absg * rel).upper())
    with workprec(prec):
        out = +g.mid()
    rounding = ErrorBudget.single("rounding", upper_fraction(acb(g.real.rad(), g.imag.rad())))
    with workprec(wp):
        conv = ErrorBudget.single("conversion", upper_fraction(out - g.mid()))
    budget = trunc + rounding + conv
    with workprec(wp):
        limit = absg.lower() * arb(2) ** (8 - prec)
    if fraction_to_arb(budget.bound) > limit:
        raise PrecisionError(f"Gamma({z}) cannot be certified to {prec} bits")
    return HPComplex(out, prec), budget
