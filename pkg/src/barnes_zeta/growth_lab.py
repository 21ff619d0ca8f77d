"""Growth scans of |zeta_2(sigma + i t)|, exponent fits and the linear
coefficient of the dependent case on the critical line.

Rows are computed independently per t (optionally in worker processes) and
always returned in t order; values cross process boundaries as exact dyadic
midpoints so the output does not depend on the number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
from flint import acb, arb, fmpz

from .barnes_eval import (
    AFEGeometry,
    DEFAULT_CONSTANT,
    DependenceInfo,
    ParamTriple,
    as_triple,
    barnes_afe,
    barnes_direct,
    barnes_reference,
    detect_dependence,
)
from .classical_zetas import hurwitz_zeta, lerch_zeta
from .errors import BarnesError, BranchMismatchError, DomainError, InsufficientSpanError
from .numerics_core import DEFAULT_PREC, HPComplex, HPReal, check_prec, exact_point, workprec

METHODS = ("auto", "afe", "direct", "reference")
ENVELOPES = ("dyadic", "raw")
MIN_FIT_ROWS = 8
MIN_FIT_DECADES = 2


@dataclass(frozen=True)
class ScanRow:
    t: Fraction
    value: Optional[HPComplex]
    abs_value: Optional[HPReal]
    method: str
    budget: Optional[float]
    geometry: Optional[AFEGeometry] = None
    leading: Optional[HPComplex] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class FitReport:
    slope: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    envelope: str
    points: int


@dataclass(frozen=True)
class KappaEstimate:
    t: Fraction
    ratio: float
    kappa_abs: float
    bound_statement: float
    bound_proof: float
    violates_statement: bool
    violates_proof: bool


# ----------------------------------------------------------------------------
# grids
# ----------------------------------------------------------------------------


def log_grid(t_min, t_max, points: int, digits: int = 6) -> list[Fraction]:
    """Log-spaced grid rounded to ``digits`` significant digits (exact values)."""
    t_min, t_max = float(t_min), float(t_max)
    if points < 1:
        raise ValueError("points must be positive")
    if points == 1:
        raw = [t_min]
    else:
        step = (math.log(t_max) - math.log(t_min)) / (points - 1)
        raw = [math.exp(math.log(t_min) + k * step) for k in range(points)]
        raw[-1] = t_max
    return [Fraction(f"{x:.{digits}g}") for x in raw]


# ----------------------------------------------------------------------------
# scanning
# ----------------------------------------------------------------------------


def _pack(z: acb) -> tuple[int, int, int, int]:
    rm, re_ = z.real.mid().man_exp()
    im, ie = z.imag.mid().man_exp()
    return int(rm), int(re_), int(im), int(ie)


def _unpack(packed, prec: int) -> HPComplex:
    rm, re_, im, ie = packed
    with workprec(prec):
        re = arb(fmpz(rm)) * arb(2) ** re_ if rm else arb(0)
        im_ = arb(fmpz(im)) * arb(2) ** ie if im else arb(0)
        return HPComplex(acb(re, im_), prec)


def resolve_method(method: str, sigma: Fraction) -> str:
    if method not in METHODS:
        raise ValueError(f"unknown scan method {method!r}")
    if method == "auto":
        return "direct" if sigma > 2 else "afe"
    return method


def _scan_one(job):
    sigma, t, params, method, policy, prec, constant, height = job
    s = exact_point(sigma, t, prec)
    try:
        geometry = leading = None
        if method == "afe":
            val, bd = barnes_afe(s, params, prec=prec, constant=constant, policy=policy, height=height)
            budget, geometry = bd.budget, bd.geometry
            if bd.dep_double_pole_32 is not None:
                leading = _pack(bd.dep_double_pole_32.value)
        elif method == "direct":
            val, budget = barnes_direct(s, params, prec)
        else:
            val, budget = barnes_reference(s, params, prec)
        return t, _pack(val.value), float(budget), geometry, leading, None
    except BarnesError as exc:
        return t, None, None, None, None, f"{type(exc).__name__}: {exc}"


def growth_scan(sigma, params, t_grid: Sequence, method: str = "auto", policy: str = "balanced",
                prec: int = DEFAULT_PREC, workers: int = 1, constant: float = DEFAULT_CONSTANT,
                height: str = "centered") -> list[ScanRow]:
    """One row per t, in t order; evaluator failures become rows with ``error`` set."""
    prec = check_prec(prec)
    sigma = Fraction(sigma)
    params = as_triple(params)
    ts = [Fraction(t) for t in t_grid]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise DomainError("t_grid must be strictly increasing")
    method = resolve_method(method, sigma)
    jobs = [(sigma, t, params, method, policy, prec, constant, height) for t in ts]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_one, jobs))
    else:
        results = [_scan_one(job) for job in jobs]
    rows = []
    for t, packed, budget, geometry, leading, error in results:
        if error is not None:
            rows.append(ScanRow(t, None, None, method, None, None, None, error))
            continue
        val = _unpack(packed, prec)
        lead = _unpack(leading, prec) if leading is not None else None
        rows.append(ScanRow(t, val, abs(val), method, budget, geometry, lead))
    return rows


# ----------------------------------------------------------------------------
# fitting
# ----------------------------------------------------------------------------


def _regress(xs: list, ys: list) -> tuple[float, float, float]:
    with mpmath.workdps(50):
        n = len(xs)
        mx = mpmath.fsum(xs) / n
        my = mpmath.fsum(ys) / n
        sxx = mpmath.fsum((x - mx) ** 2 for x in xs)
        sxy = mpmath.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
        syy = mpmath.fsum((y - my) ** 2 for y in ys)
        slope = sxy / sxx
        intercept = my - slope * mx
        if syy == 0:
            r2 = mpmath.mpf(1)
        else:
            r2 = min(max(sxy * sxy / (sxx * syy), 0), 1)
        return float(slope), float(intercept), float(r2)


def dyadic_envelope(points: list[tuple[Fraction, float]]) -> list[tuple[Fraction, float]]:
    """Per block [2^k, 2^(k+1)) of t: the point with the largest value."""
    blocks: dict[int, tuple[Fraction, float]] = {}
    for t, val in points:
        k = math.floor(math.log2(t.numerator) - math.log2(t.denominator))
        # exact block index
        while Fraction(2) ** k > t:
            k -= 1
        while Fraction(2) ** (k + 1) <= t:
            k += 1
        cur = blocks.get(k)
        if cur is None or val > cur[1]:
            blocks[k] = (t, val)
    return [blocks[k] for k in sorted(blocks)]


def fit_exponent(rows: Sequence[ScanRow], envelope: str = "dyadic") -> FitReport:
    """Least squares of log |zeta_2| against log t (on block maxima by default)."""
    if envelope not in ENVELOPES:
        raise ValueError(f"unknown envelope {envelope!r}")
    pts = [(r.t, float(r.abs_value)) for r in rows if r.ok and r.abs_value is not None]
    if len(pts) < MIN_FIT_ROWS:
        raise InsufficientSpanError(f"need at least {MIN_FIT_ROWS} valid rows, got {len(pts)}")
    t_lo = min(p[0] for p in pts)
    t_hi = max(p[0] for p in pts)
    if t_hi < t_lo * 10 ** MIN_FIT_DECADES:
        raise InsufficientSpanError(f"rows must span {MIN_FIT_DECADES} decades in t")
    if any(v <= 0 for _, v in pts):
        raise DomainError("cannot fit a power law to a zero value")
    use = dyadic_envelope(pts) if envelope == "dyadic" else pts
    with mpmath.workdps(50):
        xs = [mpmath.log(mpmath.mpf(t.numerator) / t.denominator) for t, _ in use]
        ys = [mpmath.log(mpmath.mpf(v)) for _, v in use]
    slope, intercept, r2 = _regress(xs, ys)
    return FitReport(slope, intercept, r2, (float(t_lo), float(t_hi)), envelope, len(use))


# ----------------------------------------------------------------------------
# linear coefficient in the dependent case
# ----------------------------------------------------------------------------


def kappa_bounds(t, params: ParamTriple, dep: DependenceInfo, prec: int = DEFAULT_PREC) -> tuple[float, float]:
    """The two candidate bounds (statement at 1/2 + i t, proof at 3/2 - i t).

    Both are |zeta_L(s, 1, 1 - (q/v) alpha)| / (2 pi p sqrt(q v)).  When the
    twist is trivial the series is the Hurwitz zeta, continued analytically.
    """
    p, q = dep.p, dep.q
    lam = 1 - params.alpha * q / params.v
    lam_frac = lam.frac()
    t = Fraction(t)
    vals = []
    for s in (exact_point(Fraction(1, 2), t, prec), exact_point(Fraction(3, 2), -t, prec)):
        if lam_frac.is_zero():
            z, _ = hurwitz_zeta(s, 1, prec)
        else:
            z, _ = lerch_zeta(s, 1, lam_frac, prec)
        vals.append(z)
    with workprec(prec):
        scale = 1 / (2 * arb.pi() * p * (params.v * q).to_arb(prec).sqrt())
        return tuple(float((abs(z.value) * scale).mid()) for z in vals)


def kappa_extract(rows: Sequence[ScanRow], dep: DependenceInfo, params, prec: int = DEFAULT_PREC) -> list[KappaEstimate]:
    """Per-t linear coefficient with the O(t^(1/6) log t) part removed.

    The linear term is taken from the first double-pole correction of the
    approximate functional equation.  The envelope constant c_hat is the
    largest |zeta_2 - linear term| / (t^(1/6) log t) over the rows, and
    kappa_abs = max(|zeta_2| - c_hat t^(1/6) log t, 0) / t.
    """
    params = as_triple(params)
    if not dep.dependent:
        raise BranchMismatchError("kappa_extract needs linearly dependent v, w")
    actual = detect_dependence(params.v, params.w)
    if (actual.p, actual.q) != (dep.p, dep.q) or not actual.dependent:
        raise BranchMismatchError(f"requested {dep} but the parameters are {actual}")
    good = [r for r in rows if r.ok]
    missing = [r for r in good if r.leading is None]
    if missing:
        raise DomainError("kappa_extract needs rows produced by the approximate functional equation")
    env = []
    for r in good:
        t = float(r.t)
        shape = t ** (1 / 6) * math.log(t)
        with workprec(r.value.prec):
            rest = float(abs(r.value.value - r.leading.value).mid())
        env.append(rest / shape)
    c_hat = max(env) if env else 0.0
    out = []
    for r in good:
        t = float(r.t)
        shape = t ** (1 / 6) * math.log(t)
        mag = float(r.abs_value)
        kappa = max(mag - c_hat * shape, 0.0) / t
        b_stmt, b_proof = kappa_bounds(r.t, params, dep, prec)
        out.append(KappaEstimate(r.t, mag / t, kappa, b_stmt, b_proof, kappa >= b_stmt, kappa >= b_proof))
    return out
