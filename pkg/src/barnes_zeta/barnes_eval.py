"""Evaluators for the Barnes double zeta function

    zeta_2(s, alpha; v, w) = sum_{m, n >= 0} (alpha + v m + w n)^(-s).

Four routes are provided:

* :func:`barnes_direct` -- the defining double series (Re s > 2), summed row by
  row with Hurwitz zeta values and an Euler-Maclaurin tail across rows;
* :func:`barnes_reference` -- the same row summation continued to all s, or,
  when v/w is rational, an exact reduction to finitely many Hurwitz zetas;
* :func:`barnes_truncated` -- square truncation plus the closed-form
  correction term, valid for 0 < Re s < 2 and |t| <= 2 pi x / C;
* :func:`barnes_afe` -- the approximate functional equation: a square main
  sum, two families of Hurwitz tails, residue sums from the poles of the
  Mellin kernel and, for commensurable v, w, the double-pole corrections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from flint import acb, arb

from .classical_zetas import (
    _hurwitz_raw,
    check_geometry,
    float_upper,
    integer_value,
    param_arb,
    power_sum,
    working_precision,
)
from .errors import (
    AmbiguityError,
    BranchMismatchError,
    DomainError,
    GeometryError,
    NearResonanceError,
    ParseError,
    PoleError,
)
from .numerics_core import (
    DEFAULT_PREC,
    ErrorBudget,
    HPComplex,
    bernoulli_over_factorial,
    check_prec,
    complex_gamma,
    complex_loggamma,
    fraction_to_arb,
    input_prec,
    to_acb,
    upper_fraction,
    workprec,
)
from .radicals import Radical, parse_radical

EM_RATIO = 0.75
DEFAULT_CONSTANT = 10.0
DEFAULT_C = 2.0


# ----------------------------------------------------------------------------
# parameters
# ----------------------------------------------------------------------------


def param_value(x) -> Radical:
    """A positive parameter of the form r (rational) or r*sqrt(d), d squarefree."""
    if isinstance(x, Radical):
        r = x
    elif isinstance(x, (int, Fraction)):
        r = Radical.rational(x)
    elif isinstance(x, str):
        r = parse_radical(x)
    else:
        raise ParseError(f"parameters must be exact (p/q or r*sqrtd), got {type(x).__name__}")
    if not r.is_monomial() or r.is_zero():
        raise ParseError(f"parameter {r} must be a single term r or r*sqrt(d)")
    if not r > 0:
        raise ParseError(f"parameter {r} must be positive")
    return r


@dataclass(frozen=True)
class ParamTriple:
    alpha: Radical
    v: Radical
    w: Radical

    @classmethod
    def make(cls, alpha, v, w) -> "ParamTriple":
        return cls(param_value(alpha), param_value(v), param_value(w))

    def swapped(self) -> "ParamTriple":
        return ParamTriple(self.alpha, self.w, self.v)

    def __str__(self):
        return f"(alpha={self.alpha}, v={self.v}, w={self.w})"


def as_triple(params) -> ParamTriple:
    if isinstance(params, ParamTriple):
        return params
    return ParamTriple.make(*params)


@dataclass(frozen=True)
class DependenceInfo:
    """``p v = q w`` with gcd(p, q) = 1 when dependent."""

    dependent: bool
    p: Optional[int] = None
    q: Optional[int] = None

    def __str__(self):
        return f"Dependent(p={self.p}, q={self.q})" if self.dependent else "Independent"


def detect_dependence(v, w) -> DependenceInfo:
    """Decide exactly whether v/w is rational."""
    ratio = param_value(v) / param_value(w)
    if not ratio.is_rational():
        return DependenceInfo(False)
    r = ratio.rational_value()  # v/w = q/p
    return DependenceInfo(True, p=r.denominator, q=r.numerator)


@dataclass(frozen=True)
class ShiftedAlpha:
    """``alpha_shift`` in (0, 1] and the index shift used by the Hurwitz tails."""

    alpha_shift: Radical
    n_shift: int


SHIFT_RULES = ("corrected", "statement")


def shifted_alpha(alpha, v, w, m: int, rule: str = "corrected") -> ShiftedAlpha:
    """Fractional part and integer shift of c = (v m + alpha)/w.

    ``w^(-s) * (zeta_H(s, alpha_shift) - sum_{k=0}^{N + n_shift} (k + alpha_shift)^(-s))``
    then equals ``sum_{n > N} (alpha + v m + w n)^(-s)``.  With the default
    rule this holds for every c: ``n_shift = ceil(c) - 1``.  ``rule="statement"``
    uses ``max(floor(c) - 1, 0)``, which differs when c > 1 is not an integer.
    Exact radicals decide integrality; ball inputs use a guard band.
    """
    if rule not in SHIFT_RULES:
        raise ValueError(f"unknown shift rule {rule!r}")
    if isinstance(alpha, arb) or isinstance(v, arb) or isinstance(w, arb):
        return _shifted_alpha_numeric(alpha, v, w, m, rule)
    c = (param_value(v) * m + param_value(alpha)) / param_value(w)
    if c.is_integer():
        k = int(c.rational_value())
        return ShiftedAlpha(Radical.rational(1), k - 1)
    fl = c.floor()
    frac = c - fl
    if rule == "corrected":
        return ShiftedAlpha(frac, fl)
    return ShiftedAlpha(frac, max(fl - 1, 0))


def _shifted_alpha_numeric(alpha, v, w, m, rule, prec: int = 128) -> ShiftedAlpha:
    with workprec(prec):
        c = (param_arb(v, prec) * m + param_arb(alpha, prec)) / param_arb(w, prec)
        nearest = int(round(float(c.mid())))
        if abs(c - nearest) < arb(2) ** (-(prec // 2)):
            raise AmbiguityError(f"cannot decide whether {c} is an integer")
        fl = _floor_of(c)
        frac = c - fl
    return ShiftedAlpha(frac, fl if rule == "corrected" else max(fl - 1, 0))


# ----------------------------------------------------------------------------
# geometry
# ----------------------------------------------------------------------------

POLICIES = ("const", "sqrtlog", "balanced")
HEIGHTS = ("centered", "nominal")


@dataclass(frozen=True)
class AFEGeometry:
    x: float
    y: float
    N: int
    L: int
    M: int
    policy: str = "explicit"
    flags: tuple[str, ...] = ()
    height: str = "nominal"
    y_cut: float | None = None


def _floor_of(value: arb) -> int:
    lo = value.lower().floor()
    hi = value.upper().floor()
    if lo != hi:
        raise AmbiguityError(f"floor of {value} is ambiguous")
    return int(lo.unique_fmpz())


def _floor_radical_times(r: Radical, x: Fraction) -> int:
    """floor(x / r) exactly for rational x and r > 0."""
    if r.is_rational():
        q = x / r.rational_value()
        return q.numerator // q.denominator
    k = int(math.floor(float(x) / float(r)))
    while (Radical.rational(x) - r * k) < 0:
        k -= 1
    while (Radical.rational(x) - r * (k + 1)) >= 0:
        k += 1
    return k


def _floor_transcendental(expr, start: int = 128) -> int:
    prec = start
    while prec <= 8192:
        with workprec(prec):
            val = expr(prec)
        try:
            return _floor_of(val)
        except AmbiguityError:
            prec *= 2
    raise AmbiguityError("floor could not be decided")


def policy_x(t_abs: float, policy: str, C: float = DEFAULT_C) -> float:
    if policy == "const":
        return float(C)
    if policy == "sqrtlog":
        return 2 * math.pi * math.sqrt(math.log(t_abs))
    if policy == "balanced":
        return math.sqrt(t_abs / (2 * math.pi))
    raise ValueError(f"unknown geometry policy {policy!r}")


def afe_geometry(t, params, x: float | None = None, policy: str = "balanced",
                 C: float = DEFAULT_C, height: str = "centered") -> AFEGeometry:
    """Geometry with 2 pi x y = |t| and N = floor(x/(v+w)).

    The residue cutoffs are L = floor(v y_cut), M = floor(w y_cut).  With
    ``height="nominal"`` y_cut = y.  With ``height="centered"`` the cutoff is
    placed at |t| / (2 pi (alpha + (v+w)(N + 1/2))), halfway between the last
    kept lattice diagonal and the first omitted one, which keeps the saddle of
    the remainder integral on the cutoff line.
    """
    params = as_triple(params)
    if height not in HEIGHTS:
        raise ValueError(f"unknown height rule {height!r}")
    t_exact = arb(t) if not isinstance(t, arb) else t
    t_abs = abs(float(t_exact.mid()))
    if t_abs == 0:
        raise GeometryError("the approximate functional equation needs t != 0")
    if x is None:
        x = policy_x(t_abs, policy, C)
    else:
        policy = "explicit"
    x = float(x)
    if not x >= 1:
        raise GeometryError(f"x = {x} must be at least 1")
    xq = Fraction(x)

    def y_arb(prec):
        return abs(t_exact) / (2 * arb.pi() * fraction_to_arb(xq))

    y = float(y_arb(128).mid())
    # the balanced policy puts y = x up to rounding
    if y < x * (1 - 1e-12):
        raise GeometryError(f"y = {y:.6g} must be at least x = {x:.6g}")
    N = _floor_radical_times(params.v + params.w, xq)
    if height == "centered":
        corner = params.alpha + (params.v + params.w) * Fraction(2 * N + 1, 2)

        def cut_arb(prec):
            return abs(t_exact) / (2 * arb.pi() * corner.to_arb(prec))
    else:
        cut_arb = y_arb
    L = _floor_transcendental(lambda p: params.v.to_arb(p) * cut_arb(p))
    M = _floor_transcendental(lambda p: params.w.to_arb(p) * cut_arb(p))
    flags = ("N_zero",) if N == 0 else ()
    return AFEGeometry(x, y, N, L, M, policy, flags, height, float(cut_arb(128).mid()))


# ----------------------------------------------------------------------------
# results
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class TermBreakdown:
    main_double_sum: HPComplex
    tail_v: HPComplex
    tail_w: HPComplex
    residue_v: HPComplex
    residue_w: HPComplex
    dep_double_pole_32: Optional[HPComplex]
    dep_double_pole_12: Optional[HPComplex]
    budget: ErrorBudget
    geometry: Optional[AFEGeometry] = None
    dependence: Optional[DependenceInfo] = None

    def terms(self) -> list[HPComplex]:
        out = [self.main_double_sum, self.tail_v, self.tail_w, self.residue_v, self.residue_w]
        if self.dep_double_pole_32 is not None:
            out += [self.dep_double_pole_32, self.dep_double_pole_12]
        return out

    def total(self) -> HPComplex:
        """Fixed-order sum of the terms, using midpoints only."""
        terms = self.terms()
        prec = terms[0].prec
        with workprec(prec):
            acc = acb(0)
            for term in terms:
                acc = (acc + term.value.mid()).mid()
        return HPComplex(acc, prec)


def _hp(val: acb, prec: int) -> tuple[HPComplex, ErrorBudget]:
    """Round a ball to its midpoint at ``prec``; the budget covers radius and rounding."""
    with workprec(prec):
        out = +val.mid()
    b = ErrorBudget.rounding(val) + ErrorBudget.single("conversion", upper_fraction(out - val.mid()))
    return HPComplex(out, prec), b


def _exact_int(s: acb, k: int) -> bool:
    return integer_value(s) == k


def _check_not_pole(s: acb) -> None:
    k = integer_value(s)
    if k in (1, 2):
        raise PoleError(f"the double zeta function has a pole at s = {k}")


# ----------------------------------------------------------------------------
# row summation (defining series and its continuation)
# ----------------------------------------------------------------------------


def _row_sum(s: acb, params: ParamTriple, prec: int) -> tuple[acb, ErrorBudget]:
    """sum_n v^(-s) zeta_H(s, (alpha + w n)/v) with an asymptotic tail over rows.

    The inner (Hurwitz) direction uses the larger step so the tail rows start
    far enough out for their Euler-Maclaurin expansions to converge.
    """
    if params.v < params.w:
        params = params.swapped()
    alpha, v, w = params.alpha, params.v, params.w
    abs_s = float(abs(s).upper())
    wp = working_precision(prec, s, abs_s + 10)
    B = abs_s / (2 * math.pi * EM_RATIO) + 0.15 * wp + 4
    # first row whose Hurwitz parameter exceeds B
    R = max(0, int(math.ceil((B * float(v) - float(alpha)) / float(w))))
    budget = ErrorBudget.zero()
    with workprec(wp):
        v_arb = v.to_arb(wp)
        w_arb = w.to_arb(wp)
        scale = v_arb ** (-s)
        head = acb(0)
        for n in range(R):
            b = (alpha + w * n) / v
            val, bud = _hurwitz_raw(s, b, prec)
            head += val
            budget = budget + bud.relabeled("rows")
        # tail rows: b_n = (alpha + w n)/v = (w/v) (n + alpha/w)
        ratio = w_arb / v_arb
        a_tail = alpha / w + R
        bR = ratio * a_tail.to_arb(wp)
        sigma = s.real
        target = arb(2) ** (-wp)
        two_pi = 2 * arb.pi()
        tail = acb(0)

        def moment(z: acb) -> tuple[acb, ErrorBudget]:
            # sum_{n >= R} b_n^(-z)
            hz, hb = _hurwitz_raw(z, a_tail, prec)
            fac = ratio ** (-z)
            return fac * hz, hb.scaled(abs(fac).upper())

        m0, b0 = moment(s - 1)
        tail += m0 / (s - 1)
        budget = budget + b0.scaled(abs(1 / (s - 1)).upper())
        m1, b1 = moment(s)
        tail += m1 / 2
        budget = budget + b1.scaled(Fraction(1, 2))
        poch = s  # (s)_{2k-1}
        poch_abs = abs(s)
        rem = None
        for k in range(1, 400):
            z = s + 2 * k - 1
            mk, bk = moment(z)
            coef = bernoulli_over_factorial(2 * k, wp) * poch
            tail += coef * mk
            budget = budget + bk.scaled(abs(coef).upper())
            poch_abs_2k = poch_abs * abs(s + 2 * k - 1)
            p = sigma + 2 * k - 1
            if p > 1:
                # sum_{n>=R} b_n^{-p} <= b_R^{-p} + (v/w) b_R^{1-p}/(p-1)
                geo = bR ** (-p) + bR ** (1 - p) / (ratio * (p - 1))
                bound = 4 * poch_abs_2k / two_pi ** (2 * k) / p * geo
                if bound < target:
                    rem = bound.upper()
                    break
            poch = poch * (s + 2 * k - 1) * (s + 2 * k)
            poch_abs = poch_abs_2k * abs(s + 2 * k)
        if rem is None:
            raise DomainError("row tail expansion did not converge")
        total = scale * (head + tail)
        budget = budget.scaled(abs(scale).upper()) + ErrorBudget.single("row_tail", (abs(scale) * rem).upper())
    return total, budget


def _rep_counts(p: int, q: int) -> list[int]:
    """r(j) = #{(m, n) >= 0 : q m + p n = j} for 0 <= j < p q."""
    r = [0] * (p * q)
    for m in range(p):
        for n in range(q):
            j = q * m + p * n
            if j < p * q:
                r[j] += 1
    return r


def _dependent_reduction(s: acb, params: ParamTriple, dep: DependenceInfo, prec: int):
    """Exact reduction for p v = q w to 2pq Hurwitz zeta values.

    With u = v/q the lattice values are alpha + u j where j = q m + p n, and the
    representation count satisfies r(j + pq l) = r(j) + l.
    """
    p, q = dep.p, dep.q
    u = params.v / q
    period = u * (p * q)
    counts = _rep_counts(p, q)
    wp = working_precision(prec, s, 16)
    budget = ErrorBudget.zero()
    with workprec(wp):
        acc = acb(0)
        for j in range(p * q):
            a_j = (params.alpha + u * j) / period
            h1, b1 = _hurwitz_raw(s - 1, a_j, prec)
            h0, b0 = _hurwitz_raw(s, a_j, prec)
            coef = counts[j] - a_j.to_arb(wp)
            acc += h1 + coef * h0
            budget = budget + b1 + b0.scaled(abs(coef).upper())
        scale = period.to_arb(wp) ** (-s)
        val = scale * acc
        budget = budget.scaled(abs(scale).upper())
    return val, budget


def barnes_direct(s, params, prec: int = DEFAULT_PREC) -> tuple[HPComplex, ErrorBudget]:
    """The defining double series, valid for Re s > 2."""
    prec = check_prec(prec)
    s = to_acb(s)
    params = as_triple(params)
    if not s.real > 2:
        raise DomainError("the defining series needs Re(s) > 2")
    val, budget = _row_sum(s, params, prec)
    out, rb = _hp(val, prec)
    return out, budget + rb


def barnes_reference(s, params, prec: int = DEFAULT_PREC, dep: DependenceInfo | None = None,
                     method: str = "auto") -> tuple[HPComplex, ErrorBudget]:
    """High-accuracy value for any s != 1, 2.

    ``method="reduction"`` (default when v/w is rational) uses the finite
    Hurwitz reduction; ``method="rows"`` uses row summation with an asymptotic
    tail, whose cost grows like |t|^2.
    """
    prec = check_prec(prec)
    s = to_acb(s)
    params = as_triple(params)
    _check_not_pole(s)
    dep = dep or detect_dependence(params.v, params.w)
    if method == "auto":
        method = "reduction" if dep.dependent else "rows"
    if method == "reduction":
        if not dep.dependent:
            raise BranchMismatchError("the Hurwitz reduction needs rational v/w")
        val, budget = _dependent_reduction(s, params, dep, prec)
    elif method == "rows":
        val, budget = _row_sum(s, params, prec)
    else:
        raise ValueError(f"unknown reference method {method!r}")
    out, rb = _hp(val, prec)
    return out, budget + rb


# ----------------------------------------------------------------------------
# square truncation
# ----------------------------------------------------------------------------


def double_power_sum(s: acb, params: ParamTriple, N: int, wp: int) -> acb:
    """sum_{0 <= m, n <= N} (alpha + v m + w n)^(-s), rows in increasing m."""
    with workprec(wp):
        a = params.alpha.to_arb(wp)
        v = params.v.to_arb(wp)
        w = params.w.to_arb(wp)
        ms = -s
        acc = acb(0)
        for m in range(N + 1):
            base = a + v * m
            row = acb(0)
            for n in range(N + 1):
                row += (base + w * n) ** ms
            acc += row
        return acc


def barnes_truncated(s, params, x: float, prec: int = DEFAULT_PREC, C: float = DEFAULT_C,
                     constant: float = DEFAULT_CONSTANT) -> tuple[HPComplex, ErrorBudget]:
    """Square truncation at m, n <= x plus the closed-form correction.

    Valid for 0 < Re s < 2 and |t| <= 2 pi x / C; the budget is
    ``constant * x^(1 - sigma)`` plus rounding.
    """
    prec = check_prec(prec)
    s = to_acb(s)
    params = as_triple(params)
    if C <= 1:
        raise DomainError("C must exceed 1")
    if not (s.real > 0 and s.real < 2):
        raise DomainError("square truncation needs 0 < Re(s) < 2")
    _check_not_pole(s)
    t_abs = abs(float(s.imag.mid()))
    if t_abs > 2 * math.pi * x / C:
        raise DomainError(f"|t| = {t_abs} exceeds 2 pi x / C = {2 * math.pi * x / C}")
    n = int(math.floor(x))
    wp = working_precision(prec, s, (n + 2) * 4)
    with workprec(wp):
        main = double_power_sum(s, params, n, wp)
        xa = fraction_to_arb(Fraction(x))
        a = params.alpha.to_arb(wp)
        v = params.v.to_arb(wp)
        w = params.w.to_arb(wp)
        e = 2 - s
        corr = ((a + v * xa) ** e + (a + w * xa) ** e - (a + v * xa + w * xa) ** e) / (
            v * w * (s - 1) * (s - 2))
        val = main + corr
    sigma = float(s.real.mid())
    out, rb = _hp(val, prec)
    budget = ErrorBudget.single("truncation", float_upper(constant * x ** (1 - sigma))) + rb
    return out, budget


# ----------------------------------------------------------------------------
# approximate functional equation
# ----------------------------------------------------------------------------


def afe_prefactor(s, prec: int = DEFAULT_PREC, route: str = "product") -> tuple[HPComplex, ErrorBudget]:
    """Gamma(1-s) / ((2 pi i)^(1-s) e^(pi i s)), principal branches.

    ``route="log"`` evaluates the same quantity as exp of a sum of logarithms.
    """
    prec = check_prec(prec)
    s = to_acb(s)
    wp = working_precision(prec, s) + 8
    with workprec(wp):
        two_pi_i = acb(0, 2 * arb.pi())
        # keep 1 - s as sharp as the input so Gamma can be certified at wp
        with workprec(2 * wp + 64):
            one_ms = 1 - s
        if route == "product":
            g, gb = complex_gamma(one_ms, wp)
            den = two_pi_i ** one_ms * s.exp_pi_i()
            val = g.value / den
            budget = gb.scaled(abs(1 / den).upper())
        elif route == "log":
            lg = complex_loggamma(one_ms, wp)
            val = (lg - one_ms * two_pi_i.log() - acb(0, arb.pi()) * s).exp()
            budget = ErrorBudget.zero()
        else:
            raise ValueError(f"unknown route {route!r}")
    out, rb = _hp(val, prec)
    return out, budget + rb


@dataclass(frozen=True)
class AFEConventions:
    """Switches for the places where the written formula admits more than one reading.

    ``residue_sign``: sign in front of the residue block (-1 or +1).
    ``inclusive``: residue ranges 0 < |n| <= L (True) or < L (False).
    ``shift_rule``: see :func:`shifted_alpha`.
    ``double_pole``: "derived" uses the coefficients obtained from the
    Laurent expansion at the double poles (sign s - 1, constant (p+q)/(2pv),
    range |n| <= floor(v y / q)); "statement" uses sign 1 - s, constant
    v p/(2q) + v/2 and range |n| < M.
    """

    residue_sign: int = -1
    inclusive: bool = True
    shift_rule: str = "corrected"
    double_pole: str = "derived"


DEFAULT_CONVENTIONS = AFEConventions()
STATEMENT_CONVENTIONS = AFEConventions(residue_sign=-1, inclusive=False, shift_rule="statement",
                                       double_pole="statement")


def _npow(n: int, z: acb) -> acb:
    """n^z on the principal branch (arg n = pi for n < 0)."""
    return acb(n) ** z


def _residue_terms(s: acb, v: Radical, w: Radical, theta: Radical, L: int, skip_every: int | None,
                   inclusive: bool, wp: int, prec: int) -> acb:
    """v^(-s) sum_{0<|n|<=L} e^{-2 pi i n theta} / ((e^{2 pi i n w/v} - 1) n^(1-s))."""
    top = L if inclusive else L - 1
    with workprec(wp):
        th = theta.to_arb(wp)
        r = (w / v).to_arb(wp)
        one_ms = 1 - s
        guard = arb(2) ** (-(prec // 4))
        acc = acb(0)
        for n in range(1, top + 1):
            if skip_every and n % skip_every == 0:
                continue
            for k in (n, -n):
                den = acb(2 * k * r).exp_pi_i() - 1
                if abs(den) < guard:
                    raise NearResonanceError(f"e^(2 pi i n w/v) - 1 is below the guard at n = {k}")
                acc += acb(-2 * k * th).exp_pi_i() / (den * _npow(k, one_ms))
        return v.to_arb(wp) ** (-s) * acc


def residue_sum(s, params, N: int, L: int, side: str = "v", dep: DependenceInfo | None = None,
                inclusive: bool = True, prec: int = DEFAULT_PREC) -> tuple[HPComplex, ErrorBudget]:
    """Residue sum of the simple poles on the ``side`` axis (without the Gamma prefactor).

    For side "v": v^(-s) sum_{0<|n|<=L} e^{-2 pi i n (alpha + w N)/v} / ((e^{2 pi i n w/v} - 1) n^(1-s)),
    skipping the double poles (q | n) when p v = q w.
    """
    prec = check_prec(prec)
    s = to_acb(s)
    params = as_triple(params)
    dep = dep or detect_dependence(params.v, params.w)
    if side == "v":
        v, w, skip = params.v, params.w, (dep.q if dep.dependent else None)
    elif side == "w":
        v, w, skip = params.w, params.v, (dep.p if dep.dependent else None)
    else:
        raise ValueError("side must be 'v' or 'w'")
    theta = (params.alpha + w * N) / v
    wp = working_precision(prec, s, L + 2) + int(math.log2(L + 2))
    val = _residue_terms(s, v, w, theta, L, skip, inclusive, wp, prec)
    return _hp(val, prec)


def _double_pole_terms(s: acb, params: ParamTriple, dep: DependenceInfo, geom: AFEGeometry,
                       conv: AFEConventions, wp: int) -> tuple[acb, acb]:
    """The two double-pole correction sums (inside the residue block)."""
    p, q = dep.p, dep.q
    v = params.v
    alpha = params.alpha
    if conv.double_pole == "derived":
        top = geom.L // q
        const = Fraction(p + q, 2 * p)  # times 1/v
        c0 = alpha * q / (v * v * p) + Radical.rational(Fraction(p + q, p) * geom.N) / v + Radical.rational(const) / v
        sign32 = -1
    else:
        top = geom.M - 1
        c0 = alpha * q / (v * v * p) + Radical.rational(Fraction(p + q, p) * geom.N) / v + v * Fraction(p, 2 * q) + v / 2
        sign32 = 1
    theta = alpha * q / v
    with workprec(wp):
        th = theta.to_arb(wp)
        va = v.to_arb(wp)
        sum32 = acb(0)
        sum12 = acb(0)
        for n in range(1, top + 1):
            for k in (n, -n):
                ph = acb(-2 * k * th).exp_pi_i()
                sum32 += ph / _npow(k, 2 - s)
                sum12 += ph / _npow(k, 1 - s)
        qa = arb(q)
        coef32 = sign32 * (1 - s) * qa ** (s - 1) / (acb(0, 2 * arb.pi()) * p * va ** s)
        d32 = coef32 * sum32
        d12 = -c0.to_arb(wp) * (qa / va) ** (s - 1) * sum12
    return d32, d12


def _tail_family(s: acb, alpha: Radical, a_step: Radical, b_step: Radical, N: int, rule: str,
                 prec: int, wp: int) -> tuple[acb, ErrorBudget]:
    """b_step^(-s) sum_{m=0}^N zeta_H*(s, alpha_m) for c_m = (a_step m + alpha)/b_step."""
    budget = ErrorBudget.zero()
    with workprec(wp):
        acc = acb(0)
        for m in range(N + 1):
            sh = shifted_alpha(alpha, a_step, b_step, m, rule)
            base, bud = _hurwitz_raw(s, sh.alpha_shift, prec)
            part = power_sum(s, sh.alpha_shift.to_arb(wp), 0, N + sh.n_shift + 1, wp)
            acc += base - part
            budget = budget + bud
        scale = b_step.to_arb(wp) ** (-s)
        val = scale * acc
    return val, budget.scaled(abs(scale).upper())


def barnes_afe(s, params, geometry: AFEGeometry | None = None, dep: DependenceInfo | None = None,
               prec: int = DEFAULT_PREC, constant: float = DEFAULT_CONSTANT,
               conventions: AFEConventions = DEFAULT_CONVENTIONS,
               policy: str = "balanced", height: str = "centered") -> tuple[HPComplex, TermBreakdown]:
    """Approximate functional equation for 0 <= Re s <= 2, |t| > 0.

    The returned value is exactly the fixed-order sum of the breakdown terms.
    The budget carries ``constant * x^(-sigma)`` for the remainder plus the
    Hurwitz truncation and rounding contributions.  Negative t is handled by
    conjugation (the parameters are real).
    """
    prec = check_prec(prec)
    s = to_acb(s)
    params = as_triple(params)
    _check_not_pole(s)
    if not (s.real >= 0 and s.real <= 2):
        raise DomainError("the approximate functional equation needs 0 <= Re(s) <= 2")
    actual = detect_dependence(params.v, params.w)
    if dep is None:
        dep = actual
    elif dep.dependent != actual.dependent or (dep.dependent and (dep.p, dep.q) != (actual.p, actual.q)):
        raise BranchMismatchError(f"requested {dep} but the parameters are {actual}")
    t_mid = float(s.imag.mid())
    if t_mid < 0:
        with workprec(input_prec(prec) + 256):
            s_conj = s.conjugate()
        val, bd = barnes_afe(s_conj, params, geometry, dep, prec, constant, conventions, policy,
                             height)
        conj = lambda z: None if z is None else z.conjugate()
        bd = TermBreakdown(conj(bd.main_double_sum), conj(bd.tail_v), conj(bd.tail_w),
                           conj(bd.residue_v), conj(bd.residue_w), conj(bd.dep_double_pole_32),
                           conj(bd.dep_double_pole_12), bd.budget, bd.geometry, bd.dependence)
        return bd.total(), bd
    if geometry is None:
        geometry = afe_geometry(s.imag, params, policy=policy, height=height)
    g = geometry
    check_geometry(abs(t_mid), g.x, g.y, rel_tol=1e-6)
    if not (g.y >= g.x * (1 - 1e-12) and g.x >= 1):
        raise GeometryError("the geometry needs y >= x >= 1")
    sigma = float(s.real.mid())
    conv = conventions
    wp = working_precision(prec, s, (g.N + 2) * 4 + g.L + g.M) + 8
    budget = ErrorBudget.zero()
    with workprec(wp):
        main = double_power_sum(s, params, g.N, wp)
        tail_v, bv = _tail_family(s, params.alpha, params.v, params.w, g.N, conv.shift_rule, prec, wp)
        tail_w, bw = _tail_family(s, params.alpha, params.w, params.v, g.N, conv.shift_rule, prec, wp)
        budget = budget + bv.relabeled("tail_v") + bw.relabeled("tail_w")
        pref, pb = afe_prefactor(s, wp)
        P = pref.value
        factor = conv.residue_sign * P
        theta_v = (params.alpha + params.w * g.N) / params.v
        theta_w = (params.alpha + params.v * g.N) / params.w
        skip_v = dep.q if dep.dependent else None
        skip_w = dep.p if dep.dependent else None
        rv = _residue_terms(s, params.v, params.w, theta_v, g.L, skip_v, conv.inclusive, wp, prec)
        rw = _residue_terms(s, params.w, params.v, theta_w, g.M, skip_w, conv.inclusive, wp, prec)
        res_v = factor * rv
        res_w = factor * rw
        inner = abs(rv) + abs(rw)
        d32 = d12 = None
        if dep.dependent:
            s32, s12 = _double_pole_terms(s, params, dep, g, conv, wp)
            d32 = factor * s32
            d12 = factor * s12
            inner = inner + abs(s32) + abs(s12)
        # relative error of the prefactor propagates through the residue block
        rel_p = fraction_to_arb(pb.bound) / abs(P).lower()
        budget = budget + ErrorBudget.single("prefactor", (rel_p * abs(P) * inner).upper())
    parts = [main, tail_v, tail_w, res_v, res_w] + ([d32, d12] if dep.dependent else [])
    hps = []
    for part in parts:
        hp, rb = _hp(part, prec)
        hps.append(hp)
        budget = budget + rb
    budget = ErrorBudget.single("afe_remainder", float_upper(constant * g.x ** (-sigma))) + budget
    bd = TermBreakdown(hps[0], hps[1], hps[2], hps[3], hps[4],
                       hps[5] if dep.dependent else None, hps[6] if dep.dependent else None,
                       budget, g, dep)
    return bd.total(), bd
