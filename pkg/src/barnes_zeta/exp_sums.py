"""Exponential sums: brute-force evaluation, van der Corput bound shapes and
the partial sums of (n + alpha)^(-1/2 - i t).

The derivative tests bound ``sum_{a<n<=b} e^{2 pi i f(n)}`` in terms of the
size of f'' or f''' on the window.  They carry no explicit constant, so this
module returns the bound *shape* and estimates the constant empirically with
seeded sweeps.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from flint import acb, arb

from .classical_zetas import RealParam, exact_param, param_arb
from .errors import DomainError, InvariantViolationError, SizeError
from .numerics_core import (
    DEFAULT_PREC,
    GUARD_BITS,
    HPComplex,
    HPReal,
    check_prec,
    fraction_to_arb,
    to_arb,
    workprec,
)

BRUTE_CAP = 10 ** 7
# partial_sum_half requires x <= PARTIAL_SUM_K * t
PARTIAL_SUM_K = 1
SUBDIVISION_DEPTH = 12


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact endpoint")


def _ball(lo: Fraction, hi: Fraction, prec: int) -> arb:
    """Ball containing [lo, hi]."""
    with workprec(prec):
        mid = fraction_to_arb((lo + hi) / 2)
        rad = fraction_to_arb((hi - lo) / 2)
        return mid + arb(0, rad.upper())


# ----------------------------------------------------------------------------
# phase functions
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseFunction:
    """A real phase f on which the sums e^{2 pi i f(n)} are formed.

    ``kind="log"``: f(x) = -t/(2 pi) log(x + alpha), so e^{2 pi i f(n)} =
    (n + alpha)^(-i t).  ``kind="poly"``: f(x) = sum_k coeffs[k] x^k with
    rational coefficients.
    """

    kind: str
    t: Optional[Fraction] = None
    alpha: object = None
    coeffs: tuple[Fraction, ...] = field(default_factory=tuple)

    @classmethod
    def logarithmic(cls, t, alpha: RealParam) -> "PhaseFunction":
        t = _exact(t)
        if t <= 0:
            raise DomainError("the logarithmic phase needs t > 0")
        alpha = exact_param(alpha)
        return cls("log", t=t, alpha=alpha)

    @classmethod
    def polynomial(cls, coeffs: Sequence) -> "PhaseFunction":
        cs = tuple(_exact(c) for c in coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs = cs[:-1]
        return cls("poly", coeffs=cs or (Fraction(0),))

    def _poly_derivative(self, order: int) -> tuple[Fraction, ...]:
        cs = list(self.coeffs)
        for _ in range(order):
            cs = [k * c for k, c in enumerate(cs)][1:] or [Fraction(0)]
        return tuple(cs)

    def derivative(self, order: int, x: arb, prec: int) -> arb:
        """f^(order)(x) as a ball; x may itself be a ball (interval evaluation)."""
        with workprec(prec):
            if self.kind == "log":
                t = fraction_to_arb(self.t)
                u = x + param_arb(self.alpha, prec)
                if order == 0:
                    return -t / (2 * arb.pi()) * u.log()
                # d^k/dx^k log u = (-1)^(k-1) (k-1)! u^-k
                sign = -1 if order % 2 == 0 else 1
                return -sign * t * math.factorial(order - 1) / (2 * arb.pi() * u ** order)
            acc = arb(0)
            for c in reversed(self._poly_derivative(order)):
                acc = acc * x + fraction_to_arb(c)
            return acc

    def value(self, x, prec: int = DEFAULT_PREC) -> arb:
        return self.derivative(0, to_arb(x), prec)

    def unit(self, n: int, wp: int) -> acb:
        """e^{2 pi i f(n)}, computed without forming a large phase when possible."""
        with workprec(wp):
            if self.kind == "log":
                u = param_arb(self.alpha, wp) + n
                return u ** acb(0, -fraction_to_arb(self.t))
            q = Fraction(0)
            for c in reversed(self.coeffs):
                q = q * n + c
            frac = q - math.floor(q)
            return _exp_two_pi_i(frac, wp)

    def envelope(self, order: int, a, b, prec: int = 128) -> tuple[arb, arb]:
        """(inf, sup) of |f^(order)| on [a, b] from a monotone envelope.

        Raises InvariantViolationError unless |f^(order)| is bounded away from
        zero and monotone on the window.
        """
        a, b = _exact(a), _exact(b)
        if not b > a:
            raise InvariantViolationError("the window needs b > a")
        if self.kind == "log":
            if not (param_arb(self.alpha, prec) + fraction_to_arb(a)) > 0:
                raise InvariantViolationError("log phase needs a + alpha > 0")
            # |f^(k)| = t (k-1)! / (2 pi (x + alpha)^k) is decreasing in x
            lo = abs(self.derivative(order, fraction_to_arb(b), prec))
            hi = abs(self.derivative(order, fraction_to_arb(a), prec))
            return lo, hi
        if not _sign_definite(self, order + 1, a, b, prec) or not _sign_definite(self, order, a, b, prec):
            raise InvariantViolationError(
                f"f^({order}) is not monotone and nonvanishing on [{a}, {b}]")
        ea = abs(self.derivative(order, fraction_to_arb(a), prec))
        eb = abs(self.derivative(order, fraction_to_arb(b), prec))
        with workprec(prec):
            return (ea if ea < eb else eb), (eb if ea < eb else ea)


def _exp_two_pi_i(frac: Fraction, wp: int) -> acb:
    with workprec(wp):
        th = 2 * fraction_to_arb(frac)
        return acb(arb.cos_pi(th), arb.sin_pi(th))


def _sign_definite(f: PhaseFunction, order: int, a: Fraction, b: Fraction, prec: int) -> bool:
    """True when f^(order) has one strict sign on [a, b] (interval subdivision)."""
    pieces = [(a, b)]
    sign = 0
    for _ in range(SUBDIVISION_DEPTH):
        pending = []
        for lo, hi in pieces:
            val = f.derivative(order, _ball(lo, hi, prec), prec)
            if val > 0 or val < 0:
                s = 1 if val > 0 else -1
                if sign and s != sign:
                    return False
                sign = s
            else:
                mid = (lo + hi) / 2
                pending += [(lo, mid), (mid, hi)]
        if not pending:
            return True
        pieces = pending
    return False


# ----------------------------------------------------------------------------
# windows and bound shapes
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class VdCWindow:
    """Summation window (a, b] with Lambda <= |f^(k)| <= c Lambda on [a, b]."""

    a: Fraction
    b: Fraction
    Lambda: HPReal
    c: HPReal
    order: int = 2

    def __post_init__(self):
        if not self.b >= self.a + 1:
            raise InvariantViolationError("the window needs b >= a + 1")
        if not self.Lambda.value > 0:
            raise InvariantViolationError("the window needs Lambda > 0")
        if not self.c.value >= 1:
            raise InvariantViolationError("the window needs c >= 1")
        if self.order not in (2, 3):
            raise ValueError("order must be 2 or 3")

    @classmethod
    def make(cls, a, b, Lambda, c, order: int = 2, prec: int = 128) -> "VdCWindow":
        return cls(_exact(a), _exact(b), HPReal.make(Lambda, prec), HPReal.make(c, prec), order)

    @classmethod
    def from_phase(cls, f: PhaseFunction, a, b, order: int, prec: int = 128) -> "VdCWindow":
        lo, hi = f.envelope(order, a, b, prec)
        if not lo > 0:
            raise InvariantViolationError(f"f^({order}) is not bounded away from zero")
        with workprec(prec):
            c = hi / lo
            if c < 1:
                c = arb(1)
        return cls(_exact(a), _exact(b), HPReal(lo, prec), HPReal(c, prec), order)

    def check(self, f: PhaseFunction, prec: int = 128) -> None:
        """Verify Lambda <= |f^(order)| <= c Lambda on the window."""
        lo, hi = f.envelope(self.order, self.a, self.b, prec)
        with workprec(prec):
            ok = lo >= self.Lambda.value and hi <= self.c.value * self.Lambda.value
        if not ok:
            raise InvariantViolationError("the window envelope does not hold for this phase")


def _check_order(win: VdCWindow, order: int, f: PhaseFunction | None) -> None:
    if win.order != order:
        raise InvariantViolationError(f"window was built for f^({win.order}), not f^({order})")
    if f is not None:
        win.check(f, win.Lambda.prec)


def vdc_second_bound(win: VdCWindow, f: PhaseFunction | None = None) -> HPReal:
    """c (b - a) Lambda^(1/2) + Lambda^(-1/2)."""
    _check_order(win, 2, f)
    prec = win.Lambda.prec
    with workprec(prec):
        lam = win.Lambda.value
        length = fraction_to_arb(win.b - win.a)
        return HPReal(win.c.value * length * lam.sqrt() + 1 / lam.sqrt(), prec)


def vdc_third_bound(win: VdCWindow, f: PhaseFunction | None = None) -> HPReal:
    """c^(1/2) (b - a) Lambda^(1/6) + (b - a)^(1/2) Lambda^(-1/6)."""
    _check_order(win, 3, f)
    prec = win.Lambda.prec
    with workprec(prec):
        lam6 = win.Lambda.value.root(6)
        length = fraction_to_arb(win.b - win.a)
        return HPReal(win.c.value.sqrt() * length * lam6 + length.sqrt() / lam6, prec)


# ----------------------------------------------------------------------------
# brute force
# ----------------------------------------------------------------------------


def _summation_range(a, b) -> tuple[int, int]:
    a, b = _exact(a), _exact(b)
    lo = math.floor(a) + 1
    hi = math.floor(b)
    return lo, hi


def _phase_wp(prec: int, f: PhaseFunction, top: int) -> int:
    extra = 0
    if f.kind == "log":
        extra = int(math.log2(float(f.t) * math.log(top + 3) + 2))
    return prec + GUARD_BITS + extra + int(math.log2(top + 2))


def exp_sum_brute(f: PhaseFunction, a, b, prec: int = DEFAULT_PREC) -> HPComplex:
    """sum_{a < n <= b} e^{2 pi i f(n)} in increasing n order."""
    prec = check_prec(prec)
    lo, hi = _summation_range(a, b)
    if _exact(b) - _exact(a) > BRUTE_CAP:
        raise SizeError(f"b - a exceeds the brute-force cap of {BRUTE_CAP}")
    wp = _phase_wp(prec, f, max(hi, 1))
    with workprec(wp):
        acc = acb(0)
        for n in range(lo, hi + 1):
            acc += f.unit(n, wp)
    with workprec(prec):
        return HPComplex(+acc, prec)


def weighted_block_sum(a, b, t, alpha: RealParam, prec: int = DEFAULT_PREC) -> HPComplex:
    """sum_{a < n <= b} (n + alpha)^(-1/2 - i t), the exp-sum weighted by (n+alpha)^(-1/2)."""
    prec = check_prec(prec)
    lo, hi = _summation_range(a, b)
    lo = max(lo, 0)
    if hi - lo + 1 > BRUTE_CAP:
        raise SizeError(f"block exceeds the brute-force cap of {BRUTE_CAP}")
    t = _exact(t)
    wp = prec + GUARD_BITS + int(math.log2(float(t) * math.log(hi + 3) + 2)) + int(math.log2(hi + 2))
    with workprec(wp):
        al = param_arb(alpha, wp)
        s = -acb(arb(0.5), fraction_to_arb(t))
        acc = acb(0)
        for n in range(lo, hi + 1):
            acc += (al + n) ** s
    with workprec(prec):
        return HPComplex(+acc, prec)


def partial_sum_half(x, t, alpha: RealParam, prec: int = DEFAULT_PREC,
                     K: float = PARTIAL_SUM_K) -> tuple[HPComplex, HPReal]:
    """sum_{0 <= n <= x} (n + alpha)^(-1/2 - i t) and |sum| / (t^(1/6) max(log x, 1))."""
    prec = check_prec(prec)
    x, t = _exact(x), _exact(t)
    if not t > Fraction(271828, 100000):
        raise DomainError("partial_sum_half needs t > e")
    if x > Fraction(K) * t:
        raise DomainError(f"x = {x} exceeds K t = {float(K) * float(t):.6g}")
    if x < 0:
        raise DomainError("x must be non-negative")
    total = weighted_block_sum(Fraction(-1), x, t, alpha, prec)
    with workprec(prec):
        logx = fraction_to_arb(x).log() if x > 0 else arb(0)
        denom = fraction_to_arb(t).root(6) * (logx if logx > 1 else arb(1))
        ratio = abs(total.value) / denom
    return total, HPReal(ratio, prec)


def dyadic_blocks(x, J: int) -> list[tuple[Fraction, Fraction]]:
    """The blocks (2^-j x, 2^(-j+1) x] for j = 1..J, largest first."""
    x = _exact(x)
    return [(x / 2 ** j, x / 2 ** (j - 1)) for j in range(1, J + 1)]


def dyadic_partial_sum(x, t, alpha: RealParam, prec: int = DEFAULT_PREC) -> HPComplex:
    """partial_sum_half rebuilt from dyadic blocks plus the initial segment [0, 2^-J x]."""
    x = _exact(x)
    J = max(1, int(math.floor(math.log2(float(x)))) if x >= 2 else 1)
    blocks = dyadic_blocks(x, J)
    head = weighted_block_sum(Fraction(-1), blocks[-1][0], t, alpha, prec)
    acc = head
    for lo, hi in reversed(blocks):
        acc = acc + weighted_block_sum(lo, hi, t, alpha, prec)
    return acc


# ----------------------------------------------------------------------------
# seeded sweeps
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    a: Fraction
    b: Fraction
    t: Fraction
    alpha: Fraction
    abs_sum: float
    bound: float
    ratio: float


def random_log_windows(n: int, seed: int, t_range=(10 ** 2, 10 ** 5),
                       a_range=(10, 2000)) -> list[tuple[Fraction, Fraction, Fraction, Fraction]]:
    """Seeded (a, b, t, alpha) samples: log-uniform t and a, b in (a+1, 2a]."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        t = Fraction(round(math.exp(rng.uniform(*map(math.log, t_range)))))
        a = Fraction(round(math.exp(rng.uniform(*map(math.log, a_range)))))
        b = a + Fraction(rng.randint(1, int(a)))
        alpha = Fraction(rng.randint(1, 99), 100)
        out.append((a, b, t, alpha))
    return out


def vdc_sweep(n: int = 50, seed: int = 0, order: int = 3, prec: int = 128) -> list[SweepRow]:
    """|exp_sum_brute| / bound over seeded logarithmic-phase windows."""
    bound_fn = vdc_third_bound if order == 3 else vdc_second_bound
    rows = []
    for a, b, t, alpha in random_log_windows(n, seed):
        f = PhaseFunction.logarithmic(t, alpha)
        win = VdCWindow.from_phase(f, a, b, order, prec)
        total = exp_sum_brute(f, a, b, prec)
        bound = float(bound_fn(win))
        mag = float(abs(total.value).mid())
        rows.append(SweepRow(a, b, t, alpha, mag, bound, mag / bound))
    return rows


@dataclass(frozen=True)
class PartialSumRow:
    t: Fraction
    x: Fraction
    abs_sum: float
    ratio: float
    above_two_thirds: bool


def partial_sum_sweep(ts: Sequence = (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6), alpha: RealParam = Fraction(1, 2),
                 x_fraction: Fraction = Fraction(1, 10), prec: int = 128) -> list[PartialSumRow]:
    """Normalised partial sums at x = x_fraction * t.

    ``above_two_thirds`` records whether x exceeds t^(2/3), the range split
    used when bounding the sum by the third-derivative test.
    """
    rows = []
    for t in ts:
        t = _exact(t)
        x = t * x_fraction
        total, ratio = partial_sum_half(x, t, alpha, prec)
        rows.append(PartialSumRow(t, x, float(abs(total.value).mid()), float(ratio), float(x) > float(t) ** (2 / 3)))
    return rows
