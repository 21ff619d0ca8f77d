from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from barnes_zeta.barnes_eval import detect_dependence
from barnes_zeta.classical_zetas import lerch_zeta
from barnes_zeta.errors import BranchMismatchError, DomainError, InsufficientSpanError
from barnes_zeta.growth_lab import (
    ScanRow,
    dyadic_envelope,
    fit_exponent,
    growth_scan,
    kappa_bounds,
    kappa_extract,
    log_grid,
)
from barnes_zeta.numerics_core import HPReal, exact_point

PREC = 128


def synthetic(fn, ts):
    return [ScanRow(Fraction(t), None, HPReal.make(fn(float(t)), 64), "afe", 0.0) for t in ts]


def test_log_grid_exact_and_increasing():
    g = log_grid(1000, 100000, 32)
    assert len(g) == 32 and g[0] == 1000 and g[-1] == 100000
    assert all(b > a for a, b in zip(g, g[1:]))
    assert all(isinstance(t, Fraction) for t in g)


def test_fit_exact_power_law():
    ts = log_grid(100, 10 ** 5, 40)
    fit = fit_exponent(synthetic(lambda t: t ** (1 / 3), ts), "raw")
    assert abs(fit.slope - 1 / 3) < 1e-6
    assert fit.r_squared > 1 - 1e-9
    fit = fit_exponent(synthetic(lambda t: t ** (1 / 3), ts))
    assert abs(fit.slope - 1 / 3) < 1e-6


def test_fit_constant():
    ts = log_grid(100, 10 ** 5, 20)
    fit = fit_exponent(synthetic(lambda t: 7.0, ts))
    assert abs(fit.slope) < 1e-12
    assert 0 <= fit.r_squared <= 1


@given(st.floats(min_value=1e-6, max_value=1e6), st.integers(min_value=0, max_value=10 ** 6))
def test_fit_scale_invariance(c, seed):
    import random

    rng = random.Random(seed)
    ts = log_grid(100, 10 ** 5, 24)
    base = {t: math.exp(rng.uniform(-3, 3)) * float(t) ** 0.3 for t in ts}
    f1 = fit_exponent(synthetic(lambda t: base[Fraction(f"{t:.6g}")], ts))
    f2 = fit_exponent(synthetic(lambda t: c * base[Fraction(f"{t:.6g}")], ts))
    assert abs(f1.slope - f2.slope) < 1e-9
    assert abs((f2.intercept - f1.intercept) - math.log(c)) < 1e-6
    assert 0 <= f1.r_squared <= 1


def test_dyadic_envelope_picks_block_maxima():
    pts = [(Fraction(3), 1.0), (Fraction(7, 2), 5.0), (Fraction(4), 2.0), (Fraction(15, 2), 1.0)]
    assert dyadic_envelope(pts) == [(Fraction(7, 2), 5.0), (Fraction(4), 2.0)]


def test_fit_span_errors():
    with pytest.raises(InsufficientSpanError):
        fit_exponent(synthetic(lambda t: t, log_grid(100, 10 ** 5, 7)))
    with pytest.raises(InsufficientSpanError):
        fit_exponent(synthetic(lambda t: t, log_grid(100, 9000, 20)))


def test_scan_single_row():
    rows = growth_scan(Fraction(1, 2), (1, 1, 1), [500], "afe", prec=PREC)
    assert len(rows) == 1 and rows[0].ok


def test_scan_matches_square_lattice_oracle():
    ts = [50, 137, 400, 1000]
    rows = growth_scan(Fraction(1, 2), (1, 1, 1), ts, "afe", prec=PREC)
    with mpmath.workdps(40):
        for r in rows:
            want = abs(mpmath.zeta(mpmath.mpc(-0.5, float(r.t)), 1))
            assert abs(float(r.abs_value) - want) <= r.budget
            assert math.isclose(float(r.abs_value), abs(complex(r.value)), rel_tol=1e-15)


def test_scan_sigma_three_halves_finite():
    rows = growth_scan(Fraction(3, 2), ("1", "1", "sqrt2"), log_grid(100, 10 ** 4, 5), prec=PREC)
    assert all(r.ok and math.isfinite(float(r.abs_value)) and math.isfinite(r.budget) for r in rows)


def test_scan_errors_are_per_row():
    rows = growth_scan(Fraction(1, 2), (1, 1, 1), [100, 200], "direct", prec=PREC)
    assert len(rows) == 2 and all(not r.ok and "DomainError" in r.error for r in rows)


def test_scan_rejects_unsorted_grid():
    with pytest.raises(DomainError):
        growth_scan(Fraction(1, 2), (1, 1, 1), [200, 100], "afe", prec=PREC)


def test_scan_independent_of_workers():
    ts = log_grid(100, 3000, 6)
    a = growth_scan(Fraction(1, 2), ("1/2", "2/3", "1/2"), ts, prec=PREC, workers=1)
    b = growth_scan(Fraction(1, 2), ("1/2", "2/3", "1/2"), ts, prec=PREC, workers=3)
    for x, y in zip(a, b):
        assert x.t == y.t and x.budget == y.budget and x.geometry == y.geometry
        assert x.value.value.mid() == y.value.value.mid()
        assert x.leading.value.mid() == y.leading.value.mid()


def test_kappa_bound_example():
    dep = detect_dependence(1, 1)
    t = 1234
    stmt, proof = kappa_bounds(t, _triple("1/2"), dep, PREC)
    val, _ = lerch_zeta(exact_point(Fraction(3, 2), -t, PREC), 1, Fraction(1, 2), PREC)
    assert math.isclose(proof, abs(complex(val)) / (2 * math.pi), rel_tol=1e-12)
    val, _ = lerch_zeta(exact_point(Fraction(1, 2), t, PREC), 1, Fraction(1, 2), PREC)
    assert math.isclose(stmt, abs(complex(val)) / (2 * math.pi), rel_tol=1e-12)


def _triple(alpha):
    from barnes_zeta.barnes_eval import as_triple

    return as_triple((alpha, "1", "1"))


def test_kappa_extract_small():
    ts = log_grid(1000, 4000, 4)
    rows = growth_scan(Fraction(1, 2), ("1/2", "1", "1"), ts, "afe", prec=PREC)
    est = kappa_extract(rows, detect_dependence(1, 1), ("1/2", "1", "1"), PREC)
    assert len(est) == 4
    for e in est:
        assert e.kappa_abs >= 0
        assert e.bound_statement > 0 and e.bound_proof > 0
        assert e.violates_proof == (e.kappa_abs >= e.bound_proof)


def test_kappa_needs_dependent_rows():
    rows = growth_scan(Fraction(1, 2), ("1", "1", "sqrt2"), [1000], "afe", prec=PREC)
    with pytest.raises(BranchMismatchError):
        kappa_extract(rows, detect_dependence(1, "sqrt2"), ("1", "1", "sqrt2"), PREC)
    with pytest.raises(BranchMismatchError):
        kappa_extract(rows, detect_dependence(1, 1), ("1", "1", "sqrt2"), PREC)
