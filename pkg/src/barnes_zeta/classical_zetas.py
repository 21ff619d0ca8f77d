"""Hurwitz and Lerch zeta functions, the Riemann chi factor and the Hurwitz
approximate functional equation.

Every evaluator returns ``(HPComplex, ErrorBudget)`` (or a breakdown carrying a
budget).  Parameters ``alpha`` and ``lam`` may be given exactly (int, Fraction,
:class:`~barnes_zeta.radicals.Radical` or a string such as ``"1/3"``) or as real
balls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from flint import acb, arb

from .errors import DomainError, GeometryError, PoleError, PrecisionError
from .numerics_core import (
    DEFAULT_PREC,
    GUARD_BITS,
    ErrorBudget,
    HPComplex,
    HPReal,
    arb_exact_fraction,
    bernoulli_over_factorial,
    check_prec,
    complex_gamma,
    fraction_to_arb,
    to_acb,
    upper_fraction,
    workprec,
)
from .radicals import Radical, parse_radical

RealParam = Union[int, Fraction, str, Radical, arb]

# ratio |s| / (2 pi (N + a)) targeted by the Euler-Maclaurin cut point
EM_RATIO = 0.75
# beyond this many direct terms the C implementation in arb is used
ARB_DIRECT_THRESHOLD = 4000
MAX_EM_TERMS = 600


def exact_param(x: RealParam):
    """Normalise a real parameter; exact inputs become a Radical."""
    if isinstance(x, Radical):
        return x
    if isinstance(x, (int, Fraction)):
        return Radical.rational(x)
    if isinstance(x, str):
        return parse_radical(x)
    if isinstance(x, HPReal):
        return x.value
    if isinstance(x, arb):
        return x
    raise TypeError(f"unsupported real parameter type {type(x).__name__}")


def param_arb(x, prec: int) -> arb:
    x = exact_param(x)
    if isinstance(x, Radical):
        return x.to_arb(prec)
    with workprec(prec):
        return +x


def param_key(x):
    x = exact_param(x)
    if isinstance(x, Radical):
        return ("rad", x)
    return ("arb", arb_exact_fraction(x.mid()), arb_exact_fraction(x.rad()))


def acb_key(s: acb):
    return (
        arb_exact_fraction(s.real.mid()),
        arb_exact_fraction(s.imag.mid()),
        arb_exact_fraction(s.real.rad()),
        arb_exact_fraction(s.imag.rad()),
    )


def working_precision(prec: int, s: acb, scale: float = 1.0) -> int:
    """Precision that absorbs the phase growth t*log(scale)."""
    mag = float(abs(s).upper()) * max(math.log(scale + 2.0), 1.0)
    return prec + GUARD_BITS + int(math.log2(mag + 2.0))


def integer_value(s: acb) -> int | None:
    """The integer value of an exact real integer ball, else None."""
    if s.imag.is_zero() and s.real.is_integer():
        return int(s.real.unique_fmpz())
    return None


def float_upper(x: float) -> Fraction:
    return Fraction(math.nextafter(float(x), math.inf))


def power_sum(s: acb, a: arb, start: int, stop: int, wp: int) -> acb:
    """sum_{k=start}^{stop-1} (k + a)^(-s) in a fixed left-to-right order."""
    with workprec(wp):
        ms = -s
        acc = acb(0)
        for k in range(start, stop):
            acc += (a + k) ** ms
        return acc


# ----------------------------------------------------------------------------
# Hurwitz zeta
# ----------------------------------------------------------------------------


def _em_cut(s: acb, a: float, wp: int) -> int:
    """Number of direct terms before the Euler-Maclaurin tail takes over."""
    abs_s = float(abs(s).upper())
    need = abs_s / (2 * math.pi * EM_RATIO) + 0.15 * wp + max(2.0 - float(s.real.mid()), 0.0)
    return max(0, int(math.ceil(need - a)))


def _em_tail(s: acb, u: arb, wp: int) -> tuple[acb, arb] | None:
    """Euler-Maclaurin tail sum_{k>=0} (u + k)^(-s) for large u, with a remainder bound."""
    with workprec(wp):
        sigma = s.real
        base = u ** (-s)
        lead = base * u / (s - 1)
        # absolute target, tightened when the leading term is small so that
        # callers can rescale the result by large factors
        target = arb(2) ** (-wp) * min(arb(1), abs(lead).lower())
        total = lead + base / 2
        inv_u2 = 1 / (u * u)
        # running value of (s)_{2k-1} u^(-s-2k+1)
        poch_term = s * base / u
        poch_abs = abs(s)  # |(s)_{2k-1}|
        two_pi = 2 * arb.pi()
        prev = None
        for k in range(1, MAX_EM_TERMS):
            total += bernoulli_over_factorial(2 * k, wp) * poch_term
            # remainder after k terms: 4 |(s)_{2k}| / (2pi)^{2k} u^{1-sigma-2k} / (sigma + 2k - 1)
            poch_abs_2k = poch_abs * abs(s + (2 * k - 1))
            denom = sigma + 2 * k - 1
            if denom > 0:
                rem = 4 * poch_abs_2k / two_pi ** (2 * k) * u ** (1 - sigma - 2 * k) / denom
                if rem < target:
                    return total, rem.upper()
            poch_term = poch_term * (s + 2 * k - 1) * (s + 2 * k) * inv_u2
            poch_abs = poch_abs_2k * abs(s + 2 * k)
            if denom > 0:
                # the asymptotic series has started to diverge
                if prev is not None and k > 8 and rem > prev:
                    break
                prev = rem
        return None


def _hurwitz_em(s: acb, a: arb, wp: int) -> tuple[acb, arb]:
    n = _em_cut(s, float(a.mid()), wp)
    for _ in range(6):
        with workprec(wp):
            u = a + n
        res = _em_tail(s, u, wp)
        if res is not None:
            head = power_sum(s, a, 0, n, wp) if n else acb(0)
            with workprec(wp):
                return head + res[0], res[1]
        # at least double u = a + n
        n = 2 * n + 16 + int(float(a.mid()))
    raise PrecisionError("Euler-Maclaurin tail did not converge")


def _hurwitz_arb(s: acb, a: arb, wp: int) -> tuple[acb, arb]:
    with workprec(wp):
        val = s.zeta(a)
    if not val.is_finite():
        raise PrecisionError("arb Hurwitz zeta returned a non-finite ball")
    return val, arb(0)


_HURWITZ_CACHE: dict = {}
_HURWITZ_CACHE_MAX = 20000


def _hurwitz_raw(s: acb, alpha, prec: int, engine: str = "auto") -> tuple[acb, ErrorBudget]:
    """Hurwitz zeta as a ball plus truncation budget, cached on exact inputs."""
    key = (acb_key(s), param_key(alpha), prec, engine)
    hit = _HURWITZ_CACHE.get(key)
    if hit is not None:
        return hit
    a0 = param_arb(alpha, prec + 64)
    if not a0 > 0:
        raise DomainError("Hurwitz zeta needs alpha > 0")
    if integer_value(s) == 1:
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    wp = working_precision(prec, s, float(a0.mid()) + abs(float(s.imag.mid())))
    a = param_arb(alpha, wp)
    choice = engine
    if engine == "auto":
        choice = "arb" if _em_cut(s, float(a.mid()), wp) > ARB_DIRECT_THRESHOLD else "em"
    if choice == "em":
        val, rem = _hurwitz_em(s, a, wp)
    elif choice == "arb":
        val, rem = _hurwitz_arb(s, a, wp)
    else:
        raise ValueError(f"unknown Hurwitz engine {engine!r}")
    budget = ErrorBudget.single("truncation", rem) + ErrorBudget.rounding(val)
    out = (val, budget)
    if len(_HURWITZ_CACHE) > _HURWITZ_CACHE_MAX:
        _HURWITZ_CACHE.clear()
    _HURWITZ_CACHE[key] = out
    return out


def _finish(val: acb, budget: ErrorBudget, prec: int) -> tuple[HPComplex, ErrorBudget]:
    with workprec(prec):
        out = +val.mid()
    conv = ErrorBudget.single("conversion", upper_fraction(out - val.mid()))
    return HPComplex(out, prec), budget + conv


def hurwitz_zeta(s, alpha: RealParam, prec: int = DEFAULT_PREC, engine: str = "auto"):
    """Hurwitz zeta sum_{n>=0} (n + alpha)^(-s), continued to s != 1.

    Computed by Euler-Maclaurin summation after a block of direct terms.  With
    ``engine="auto"`` very long direct blocks are delegated to arb's C
    implementation; ``engine="em"`` forces the pure Euler-Maclaurin path.
    """
    prec = check_prec(prec)
    s = to_acb(s)
    val, budget = _hurwitz_raw(s, alpha, prec, engine)
    return _finish(val, budget, prec)


def hurwitz_zeta_star(s, alpha: RealParam, N: int, n_shift: int, prec: int = DEFAULT_PREC,
                      engine: str = "auto"):
    """Hurwitz zeta with the first ``N + n_shift + 1`` terms removed."""
    prec = check_prec(prec)
    s = to_acb(s)
    if N < 0 or n_shift < 0:
        raise DomainError("N and n_shift must be non-negative")
    val, budget = _hurwitz_raw(s, alpha, prec, engine)
    wp = working_precision(prec, s, N + n_shift + 2)
    a = param_arb(alpha, wp)
    head = power_sum(s, a, 0, N + n_shift + 1, wp)
    with workprec(wp):
        res = val - head
    return _finish(res, budget + ErrorBudget.rounding(head, "rounding.partial_sum"), prec)


# ----------------------------------------------------------------------------
# Lerch zeta
# ----------------------------------------------------------------------------


def _reduce_lambda(lam):
    lam = exact_param(lam)
    if isinstance(lam, Radical):
        f = lam.frac()
        return Radical.rational(1) if f.is_zero() else f
    return lam


def _unit(lam, n: int, wp: int) -> acb:
    """e^{2 pi i n lam}, reducing exactly when lam is rational."""
    with workprec(wp):
        if isinstance(lam, Radical) and lam.is_rational():
            q = (n * lam.rational_value()) % 1
            return acb(fraction_to_arb(2 * q)).exp_pi_i()
        x = param_arb(lam, wp)
        return acb(2 * n * x).exp_pi_i()


def lerch_zeta(s, alpha: RealParam, lam: RealParam, prec: int = DEFAULT_PREC):
    """Lerch zeta sum_{n>=0} e^{2 pi i n lam} (n + alpha)^(-s).

    For lam = 1 this is the Hurwitz zeta and needs Re(s) > 1.  For lam in (0, 1)
    the conditionally convergent tail is handled by Euler's transform (repeated
    summation by parts), whose remainder is bounded explicitly.
    """
    prec = check_prec(prec)
    s = to_acb(s)
    lam = _reduce_lambda(lam)
    lam_is_one = isinstance(lam, Radical) and lam == 1
    if lam_is_one:
        if not s.real > 1:
            raise DomainError("Lerch zeta with lambda = 1 needs Re(s) > 1; use hurwitz_zeta")
        return hurwitz_zeta(s, alpha, prec)
    if not s.real > 0:
        raise DomainError("Lerch zeta needs Re(s) > 0")
    a_float = float(param_arb(alpha, 64).mid())
    if not a_float > 0:
        raise DomainError("Lerch zeta needs alpha > 0")
    lam_f = float(param_arb(lam, 64).mid())
    dist = 2 * math.sin(math.pi * min(lam_f % 1.0, 1 - lam_f % 1.0))
    if dist <= 0:
        raise DomainError("lambda must lie in (0, 1]")
    abs_s = float(abs(s).upper())
    wp = working_precision(prec, s, 2 * abs_s / dist + a_float)
    # e^{-u |1 - z|} must fall below 2^-wp before the differences stop shrinking
    K = max(1, int(math.ceil((2 * abs_s + 0.8 * wp) / dist - a_float)) + 2)
    # the forward differences cancel about one bit per order
    J_max = 2 * wp + 64
    wp2 = 2 * wp + 32
    with workprec(wp2):
        a = param_arb(alpha, wp2)
        ms = -s
        head = acb(0)
        for n in range(K):
            head += _unit(lam, n, wp2) * (a + n) ** ms
        z = _unit(lam, 1, wp2)
        one_minus_z = 1 - z
        r = 1 / one_minus_z
        inv_abs = abs(r).upper()
        vals = [(a + K + j) ** ms for j in range(J_max + 1)]
        sigma = s.real
        u = a + K
        target = arb(2) ** (-wp)
        tail = acb(0)
        zK = _unit(lam, K, wp2)
        diffs = vals
        coeff = zK * r  # z^K z^j / (1 - z)^{j+1}
        poch = arb(1)  # |(s)_j|
        rem = None
        for j in range(J_max):
            tail += coeff * diffs[0]
            coeff *= z * r
            diffs = [diffs[i + 1] - diffs[i] for i in range(len(diffs) - 1)]
            poch *= abs(s + j)
            p = sigma + j
            if p > 1:
                bound = inv_abs ** (j + 1) * poch * u ** (-sigma - j - 1) * (1 + u / (p))
                if bound < target:
                    rem = bound.upper()
                    break
        if rem is None:
            raise PrecisionError("Euler transform of the Lerch tail did not converge")
        val = head + tail
    budget = ErrorBudget.single("truncation", rem) + ErrorBudget.rounding(val)
    return _finish(val, budget, prec)


# ----------------------------------------------------------------------------
# chi factor
# ----------------------------------------------------------------------------


def riemann_chi(s, prec: int = DEFAULT_PREC):
    """chi(s) with zeta(s) = chi(s) zeta(1 - s).

    Evaluated as pi^(s-1/2) Gamma((1-s)/2) / Gamma(s/2), which has no removable
    singularities at the even integers.
    """
    prec = check_prec(prec)
    s = to_acb(s)
    wp = working_precision(prec, s) + 8
    with workprec(wp):
        half = arb(0.5)
        k = integer_value(s)
        if k is not None and k > 0 and k % 2 == 1:
            raise PoleError(f"chi has a pole at s = {k}")
        with workprec(2 * wp + 64):
            z_num, z_den = (1 - s) * half, s * half
        num, bn = complex_gamma(z_num, wp)
        try:
            den, bd = complex_gamma(z_den, wp)
        except PoleError:
            return HPComplex.make(0, prec), ErrorBudget.zero()
        factor = acb.pi() ** (s - half)
        val = factor * num.value / den.value
        # relative errors of the two Gamma values propagate to the quotient
        rel = (fraction_to_arb(bn.bound) / abs(num.value).lower()
               + fraction_to_arb(bd.bound) / abs(den.value).lower())
        trunc = ErrorBudget.single("gamma", (abs(val) * rel * 2).upper())
    return _finish(val, trunc + ErrorBudget.rounding(val), prec)


# ----------------------------------------------------------------------------
# Hurwitz approximate functional equation
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class HurwitzAFEBreakdown:
    main_sum: HPComplex
    dual_plus: HPComplex
    dual_minus: HPComplex
    x: float
    y: float
    budget: ErrorBudget

    @property
    def total(self) -> HPComplex:
        return self.main_sum + self.dual_plus + self.dual_minus


def check_geometry(t_abs: float, x: float, y: float, rel_tol: float = 1e-9) -> None:
    if x <= 0 or y <= 0:
        raise GeometryError("x and y must be positive")
    if abs(2 * math.pi * x * y - t_abs) > rel_tol * max(t_abs, 1.0):
        raise GeometryError(f"2*pi*x*y = {2 * math.pi * x * y!r} differs from |t| = {t_abs!r}")


def hurwitz_afe(s, alpha: RealParam, x: float, y: float, prec: int = DEFAULT_PREC,
                constant: float = 10.0):
    """Hurwitz zeta from a short direct sum plus two dual exponential sums.

    The geometry must satisfy 2 pi x y = |t|.  The budget is the O-term
    ``constant * (x^(-sigma) + |t|^(1/2-sigma) y^(sigma-1))`` plus rounding.
    """
    prec = check_prec(prec)
    s = to_acb(s)
    t_abs = abs(float(s.imag.mid()))
    check_geometry(t_abs, x, y)
    sigma = float(s.real.mid())
    nx = int(math.floor(x))
    ny = int(math.floor(y))
    wp = working_precision(prec, s, max(nx, ny) + 2)
    with workprec(wp):
        a = param_arb(alpha, wp)
        main = power_sum(s, a, 0, nx + 1, wp)
        # keep 1 - s as sharp as the input so Gamma can be certified at wp
        with workprec(2 * wp + 64):
            one_ms = 1 - s
        g, gb = complex_gamma(one_ms, wp)
        pref = g.value / (2 * arb.pi()) ** one_ms
        e_plus = (one_ms * arb(0.5)).exp_pi_i()
        e_minus = (-one_ms * arb(0.5)).exp_pi_i()
        sum_plus = acb(0)
        sum_minus = acb(0)
        for n in range(1, ny + 1):
            npow = arb(n) ** (s - 1)
            sum_plus += acb(2 * n * (1 - a)).exp_pi_i() * npow
            sum_minus += acb(2 * n * a).exp_pi_i() * npow
        dual_plus = pref * e_plus * sum_plus
        dual_minus = pref * e_minus * sum_minus
        oterm = constant * (x ** (-sigma) + t_abs ** (0.5 - sigma) * y ** (sigma - 1))
        gamma_err = fraction_to_arb(gb.bound) / abs(g.value).lower() * (abs(dual_plus) + abs(dual_minus))
    budget = (
        ErrorBudget.single("afe_remainder", float_upper(oterm))
        + ErrorBudget.single("gamma", gamma_err.upper())
        + ErrorBudget.rounding(main, "rounding.main")
        + ErrorBudget.rounding(dual_plus, "rounding.dual_plus")
        + ErrorBudget.rounding(dual_minus, "rounding.dual_minus")
    )
    with workprec(prec):
        parts = [HPComplex(+p.mid(), prec) for p in (main, dual_plus, dual_minus)]
    bd = HurwitzAFEBreakdown(parts[0], parts[1], parts[2], x, y, budget)
    return bd.total, bd
