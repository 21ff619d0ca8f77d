from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath
import pytest
from flint import acb
from hypothesis import given
from hypothesis import strategies as st

from barnes_zeta.classical_zetas import (
    hurwitz_afe,
    hurwitz_zeta,
    hurwitz_zeta_star,
    lerch_zeta,
    riemann_chi,
)
from barnes_zeta.errors import DomainError, GeometryError, PoleError
from barnes_zeta.numerics_core import exact_point, workprec

PREC = 128
TINY = mpmath.mpf(2) ** -110


def diff(got, want):
    with mpmath.workdps(60):
        return abs(got.to_mpc() - want)


def brute_zeta(s, terms=200000):
    # direct partial sum plus the integral tail, accurate to ~1e-16 at s = 3
    with mpmath.workdps(30):
        return mpmath.fsum(mpmath.mpf(n) ** -s for n in range(1, terms)) + mpmath.mpf(terms) ** (1 - s) / (s - 1)


def test_hurwitz_examples():
    with mpmath.workdps(60):
        v, b = hurwitz_zeta(2, 1, PREC)
        assert diff(v, mpmath.pi ** 2 / 6) <= float(b) + TINY
        v, b = hurwitz_zeta(2, Fraction(1, 2), PREC)
        assert diff(v, mpmath.pi ** 2 / 2) <= float(b) + TINY
        v, b = hurwitz_zeta(3, 2, PREC)
        assert abs(v.to_mpc() - (brute_zeta(3) - 1)) < 1e-14


def test_hurwitz_pole():
    with pytest.raises(PoleError):
        hurwitz_zeta(1, Fraction(1, 3), PREC)


def test_hurwitz_budget_contract():
    s = exact_point(Fraction(1, 2), 1000, PREC)
    v, b = hurwitz_zeta(s, Fraction(1, 3), PREC)
    assert float(b) <= 2.0 ** (-PREC + 16) * (1 + abs(complex(v)))
    with mpmath.workdps(60):
        assert diff(v, mpmath.zeta(mpmath.mpc(0.5, 1000), mpmath.mpf(1) / 3)) <= float(b) + TINY


def _grid():
    rng = random.Random(3)
    pts = []
    while len(pts) < 20:
        sig = Fraction(rng.randint(-100, 300), 100)
        t = Fraction(rng.randint(-5000, 5000), 100)
        if abs(sig - 1) < Fraction(1, 10) and abs(t) < 1:
            continue
        if abs(sig - 2) < Fraction(1, 10) and abs(t) < 1:
            continue
        pts.append((sig, t))
    return pts


@pytest.mark.parametrize("sig,t", _grid())
def test_hurwitz_special_alphas(sig, t):
    s = exact_point(sig, t, PREC)
    with mpmath.workdps(60):
        sm = mpmath.mpc(mpmath.mpf(sig.numerator) / sig.denominator, mpmath.mpf(t.numerator) / t.denominator)
        z = mpmath.zeta(sm)
        v1, b1 = hurwitz_zeta(s, 1, PREC)
        assert diff(v1, z) <= float(b1) + abs(z) * TINY
        vh, bh = hurwitz_zeta(s, Fraction(1, 2), PREC)
        want = (mpmath.power(2, sm) - 1) * z
        assert diff(vh, want) <= float(bh) + abs(want) * TINY


@pytest.mark.parametrize("alpha", [Fraction(1, 7), Fraction(1, 2), Fraction(5, 6), Fraction(1)])
def test_hurwitz_recurrence(alpha):
    s = exact_point(Fraction(-1, 2), 37, PREC)
    v0, b0 = hurwitz_zeta(s, alpha, PREC)
    v1, b1 = hurwitz_zeta(s, alpha + 1, PREC)
    with workprec(2 * PREC):
        lhs = v0.value - v1.value
        rhs = acb(alpha.numerator) / alpha.denominator
        rhs = rhs ** (-s)
        err = float(abs(lhs - rhs).upper())
    assert err <= float(b0) + float(b1) + 2.0 ** -100


def test_hurwitz_engines_agree():
    s = exact_point(Fraction(3, 10), 2500, PREC)
    va, ba = hurwitz_zeta(s, Fraction(2, 3), PREC, engine="auto")
    ve, be = hurwitz_zeta(s, Fraction(2, 3), PREC, engine="em")
    with workprec(PREC):
        assert float(abs(va.value - ve.value).upper()) <= float(ba) + float(be) + 2.0 ** -100


def test_hurwitz_star_examples():
    with mpmath.workdps(60):
        v, b = hurwitz_zeta_star(3, 1, 0, 0, PREC)
        assert diff(v, mpmath.zeta(3) - 1) <= float(b) + TINY
        v, b = hurwitz_zeta_star(2, Fraction(1, 2), 1, 0, PREC)
        want = mpmath.pi ** 2 / 2 - 4 - mpmath.mpf(4) / 9
        assert diff(v, want) <= float(b) + TINY
        assert abs(float(v.real) - 0.49035) < 1e-5


@given(st.integers(min_value=1, max_value=400))
def test_hurwitz_star_tail_bound(N):
    v, b = hurwitz_zeta_star(2, 1, N, 0, PREC)
    # sum_{n > N} (n+1)^-2 <= int_N^inf (u+1)^-2 du = 1/(N+1)
    assert 0 < float(v.real) <= 1 / (N + 1) + float(b)


def test_hurwitz_star_negative_rejected():
    with pytest.raises(DomainError):
        hurwitz_zeta_star(2, 1, -1, 0, PREC)


def test_lerch_examples():
    with mpmath.workdps(60):
        v, b = lerch_zeta(2, 1, 1, PREC)
        assert diff(v, mpmath.pi ** 2 / 6) <= float(b) + TINY
        v, b = lerch_zeta(2, 1, Fraction(1, 2), PREC)
        assert diff(v, mpmath.pi ** 2 / 12) <= float(b) + TINY
        v, b = lerch_zeta(3, Fraction(1, 2), 1, PREC)
        assert diff(v, 7 * mpmath.zeta(3)) <= float(b) + TINY


def test_lerch_alternating_partial_sums():
    # independent route: averaged partial sums of sum (-1)^n (n+1)^-2
    with mpmath.workdps(40):
        terms = [(-1) ** n * mpmath.mpf(n + 1) ** -2 for n in range(4001)]
        partial = mpmath.fsum(terms[:-1])
        avg = partial + terms[-1] / 2
    v, _ = lerch_zeta(2, 1, Fraction(1, 2), PREC)
    assert abs(v.to_mpc() - avg) < 1e-9


def test_lerch_conditional_region_matches_mpmath():
    s = exact_point(Fraction(1, 2), 100, PREC)
    v, b = lerch_zeta(s, Fraction(1, 3), Fraction(2, 5), PREC)
    # rational twist 2/5: split n by residue mod 5 into Hurwitz values
    with mpmath.workdps(50):
        sm = mpmath.mpc(0.5, 100)
        a = mpmath.mpf(1) / 3
        z = mpmath.exp(2j * mpmath.pi * mpmath.mpf(2) / 5)
        want = mpmath.fsum(z ** r * mpmath.power(5, -sm) * mpmath.zeta(sm, (a + r) / 5) for r in range(5))
        assert diff(v, want) <= float(b) + 1e-40


def test_lerch_domain():
    with pytest.raises(DomainError):
        lerch_zeta(exact_point(Fraction(1, 2), 10, PREC), 1, 1, PREC)
    with pytest.raises(DomainError):
        lerch_zeta(exact_point(Fraction(-1, 2), 10, PREC), 1, Fraction(1, 2), PREC)


@pytest.mark.parametrize("sig", [Fraction(3, 2), Fraction(5, 2), Fraction(11, 10)])
def test_lerch_lambda_one_is_hurwitz(sig):
    s = exact_point(sig, 17, PREC)
    vl, bl = lerch_zeta(s, Fraction(2, 7), 1, PREC)
    vh, bh = hurwitz_zeta(s, Fraction(2, 7), PREC)
    with workprec(PREC):
        assert float(abs(vl.value - vh.value).upper()) <= float(bl) + float(bh) + 2.0 ** -100


def test_chi_examples():
    s = exact_point(Fraction(3, 10), 5, PREC)
    c1, b1 = riemann_chi(s, PREC)
    with workprec(2 * PREC):
        c2, b2 = riemann_chi(1 - s, PREC)
        prod = c1.value * c2.value
        assert float(abs(prod - 1).upper()) <= 2 * (float(b1) * abs(complex(c2)) + float(b2) * abs(complex(c1))) + 2.0 ** -100
    c, b = riemann_chi(exact_point(Fraction(1, 2), 20, PREC), PREC)
    assert abs(abs(complex(c)) - 1) <= float(b) + 1e-30
    c, b = riemann_chi(2, PREC)
    with mpmath.workdps(60):
        assert diff(c, -2 * mpmath.pi ** 2) <= float(b) + TINY


@given(st.fractions(min_value=-3, max_value=3), st.fractions(min_value=1, max_value=200))
def test_chi_involution(sig, t):
    sig = sig.limit_denominator(1000)
    t = t.limit_denominator(1000)
    s = exact_point(sig, t, PREC)
    c1, b1 = riemann_chi(s, PREC)
    with workprec(2 * PREC):
        c2, b2 = riemann_chi(1 - s, PREC)
        prod = c1.value * c2.value
        tol = 2 * (float(b1) * abs(complex(c2)) + float(b2) * abs(complex(c1))) + 2.0 ** -90
        assert float(abs(prod - 1).upper()) <= tol


def test_hurwitz_afe_residual_within_budget():
    t = 50
    x = y = math.sqrt(t / (2 * math.pi))
    s = exact_point(Fraction(1, 2), t, PREC)
    v, bd = hurwitz_afe(s, Fraction(1, 3), x, y, PREC)
    ref, rb = hurwitz_zeta(s, Fraction(1, 3), PREC)
    with workprec(PREC):
        assert float(abs(v.value - ref.value).upper()) <= float(bd.budget) + float(rb)


def test_hurwitz_afe_alpha_one_symmetric_dual_sums():
    t = 200
    x = 2.0
    y = t / (2 * math.pi * x)
    s = exact_point(Fraction(1, 2), t, PREC)
    _, bd = hurwitz_afe(s, 1, x, y, PREC)
    # phases e^{2 pi i n 0} and e^{2 pi i n 1} coincide, so the sums differ only by the e^{+-pi i(1-s)/2} factor
    with workprec(PREC):
        e = (acb(1) - s).exp_pi_i()
        assert float(abs(bd.dual_plus.value - e * bd.dual_minus.value).upper()) < 2.0 ** -90


def test_hurwitz_afe_slope():
    t = 10000
    s = exact_point(Fraction(1, 2), t, PREC)
    ref, _ = hurwitz_zeta(s, Fraction(1, 3), PREC)
    xs = [2, 4, 8, 16, 32]
    errs = []
    for x in xs:
        v, _ = hurwitz_afe(s, Fraction(1, 3), x, t / (2 * math.pi * x), PREC)
        with workprec(PREC):
            errs.append(float(abs(v.value - ref.value).mid()))
    lx = [math.log(x) for x in xs]
    ly = [math.log(e) for e in errs]
    mx, my = sum(lx) / 5, sum(ly) / 5
    slope = sum((a - mx) * (b - my) for a, b in zip(lx, ly)) / sum((a - mx) ** 2 for a in lx)
    assert -0.7 <= slope <= -0.3


def test_hurwitz_afe_geometry_error():
    with pytest.raises(GeometryError):
        hurwitz_afe(exact_point(Fraction(1, 2), 50, PREC), 1, 1.0, 1.0, PREC)
