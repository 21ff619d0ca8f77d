from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest
from flint import acb
from hypothesis import given
from hypothesis import strategies as st

from barnes_zeta.barnes_eval import (
    AFEConventions,
    afe_geometry,
    afe_prefactor,
    as_triple,
    barnes_afe,
    barnes_direct,
    barnes_reference,
    barnes_truncated,
    detect_dependence,
    residue_sum,
    shifted_alpha,
)
from barnes_zeta.classical_zetas import hurwitz_zeta_star
from barnes_zeta.errors import BranchMismatchError, DomainError, GeometryError, ParseError, PoleError
from barnes_zeta.numerics_core import exact_point, workprec
from barnes_zeta.radicals import Radical

from conftest import mp_square_lattice

PREC = 128
TINY = mpmath.mpf(2) ** -100
INDEP = ("1/2", "1", "sqrt2")
DEP = ("1/2", "2/3", "1/2")


def dist(a, b) -> float:
    with workprec(PREC):
        return float(abs(a.value - b.value).upper())


def to_mp(x) -> mpmath.mpf:
    return mpmath.mpf(float(x.to_arb(64).mid())) if not x.is_rational() else mpmath.mpf(x.rational_value().numerator) / x.rational_value().denominator


# dependence and shifts


def test_detect_dependence_examples():
    d = detect_dependence(1, 1)
    assert d.dependent and (d.p, d.q) == (1, 1)
    d = detect_dependence(Fraction(2, 3), Fraction(1, 2))
    assert d.dependent and (d.p, d.q) == (3, 4)
    assert not detect_dependence(1, "sqrt2").dependent
    d = detect_dependence("2*sqrt3", "sqrt3")
    assert d.dependent and (d.p, d.q) == (1, 2)


@given(st.fractions(min_value=Fraction(1, 50), max_value=50, max_denominator=60),
       st.fractions(min_value=Fraction(1, 50), max_value=50, max_denominator=60),
       st.sampled_from([1, 2, 3, 5]))
def test_dependence_witness(v, w, d):
    rv, rw = Radical.sqrt(d, v), Radical.sqrt(d, w)
    info = detect_dependence(rv, rw)
    assert info.dependent
    assert rv * info.p == rw * info.q
    assert math.gcd(info.p, info.q) == 1


def test_shifted_alpha_examples():
    sa = shifted_alpha(Fraction(1, 2), 1, 1, 0)
    assert (sa.alpha_shift, sa.n_shift) == (Fraction(1, 2), 0)
    sa = shifted_alpha(1, 1, 1, 1)
    assert (sa.alpha_shift, sa.n_shift) == (1, 1)
    sa = shifted_alpha(Fraction(1, 2), 3, 2, 1, rule="statement")
    assert (sa.alpha_shift, sa.n_shift) == (Fraction(3, 4), 0)
    # the tail identity needs ceil(c) - 1 = 1 here
    sa = shifted_alpha(Fraction(1, 2), 3, 2, 1)
    assert (sa.alpha_shift, sa.n_shift) == (Fraction(3, 4), 1)


@given(st.fractions(min_value=Fraction(1, 10), max_value=3, max_denominator=12),
       st.sampled_from(["1", "2/3", "3/2", "sqrt2", "1/2*sqrt3"]),
       st.sampled_from(["1", "1/2", "sqrt5", "3"]),
       st.integers(min_value=0, max_value=6), st.integers(min_value=0, max_value=4))
def test_shift_tail_identity(alpha, v, w, m, N):
    """w^-s zeta_H*(s, alpha_m) with the shift equals sum_{n > N} (alpha + v m + w n)^-s."""
    p = as_triple((alpha, v, w))
    sa = shifted_alpha(p.alpha, p.v, p.w, m)
    assert 0 < sa.alpha_shift.to_arb(64) <= 1
    s = 3
    star, _ = hurwitz_zeta_star(s, sa.alpha_shift, N, sa.n_shift, 96)
    with mpmath.workdps(40):
        a, vv, ww = to_mp(p.alpha), to_mp(p.v), to_mp(p.w)
        # no shift bookkeeping: sum_{n > N} (a + v m + w n)^-s = w^-s zeta_H(s, (a + v m)/w + N + 1)
        direct = ww ** -s * mpmath.zeta(s, (a + vv * m) / ww + N + 1)
        got = ww ** -s * star.to_mpc()
        assert abs(got - direct) < 1e-15


# direct summation


def test_direct_classical_values():
    with mpmath.workdps(60):
        v, b = barnes_direct(4, (1, 1, 1), PREC)
        assert abs(v.to_mpc() - mpmath.zeta(3)) <= float(b) + TINY
        v, b = barnes_direct(3, (1, 1, 1), PREC)
        assert abs(v.to_mpc() - mpmath.pi ** 2 / 6) <= float(b) + TINY


def test_direct_needs_sigma_above_two():
    with pytest.raises(DomainError):
        barnes_direct(2, (1, 1, 1), PREC)
    with pytest.raises(DomainError):
        barnes_direct(exact_point(Fraction(3, 2), 10, PREC), (1, 1, 1), PREC)


def test_direct_swap_symmetry():
    a, ba = barnes_direct(3, ("1/2", "1", "2"), PREC)
    b, bb = barnes_direct(3, ("1/2", "2", "1"), PREC)
    assert dist(a, b) <= float(ba) + float(bb)


@given(st.fractions(min_value=Fraction(1, 5), max_value=5, max_denominator=9),
       st.sampled_from([("1", "1", "1"), ("1/2", "1", "sqrt2"), ("1/3", "2/3", "1/2")]),
       st.integers(min_value=3, max_value=6))
def test_direct_homogeneity(c, params, sig):
    p = as_triple(params)
    scaled = (p.alpha * c, p.v * c, p.w * c)
    s = exact_point(sig, Fraction(7, 2), PREC)
    a, ba = barnes_direct(s, p, PREC)
    b, bb = barnes_direct(s, scaled, PREC)
    with workprec(2 * PREC):
        cs = (acb(c.numerator) / c.denominator) ** (-s)
        assert float(abs(b.value - cs * a.value).upper()) <= float(bb) + float(ba) * float(abs(cs).upper()) + 2.0 ** -100


def test_reference_routes_agree():
    # dependent triple: Hurwitz reduction against row summation
    for s in (exact_point(Fraction(1, 2), 40, PREC), exact_point(Fraction(3, 2), -25, PREC), acb(-1.5)):
        a, ba = barnes_reference(s, DEP, PREC, method="reduction")
        b, bb = barnes_reference(s, DEP, PREC, method="rows")
        assert dist(a, b) <= float(ba) + float(bb)


def test_reference_matches_direct():
    s = exact_point(3, 20, PREC)
    a, ba = barnes_reference(s, INDEP, PREC)
    b, bb = barnes_direct(s, INDEP, PREC)
    assert dist(a, b) <= float(ba) + float(bb)


def test_reference_poles():
    for s in (1, 2):
        with pytest.raises(PoleError):
            barnes_reference(s, INDEP, PREC)


def test_reduction_needs_dependence():
    with pytest.raises(BranchMismatchError):
        barnes_reference(3, INDEP, PREC, method="reduction")


# square truncation


def test_truncated_example():
    v, b = barnes_truncated(Fraction(3, 2), (1, 1, 1), 200, PREC)
    with mpmath.workdps(40):
        assert abs(v.to_mpc() - mpmath.zeta(0.5)) <= float(b)


def test_truncated_swap_symmetry():
    s = exact_point(Fraction(3, 4), 12, PREC)
    a, ba = barnes_truncated(s, ("1/2", "1", "sqrt2"), 60, PREC)
    b, bb = barnes_truncated(s, ("1/2", "sqrt2", "1"), 60, PREC)
    assert dist(a, b) <= 2.0 ** -100


def test_truncated_self_consistency():
    s = exact_point(Fraction(19, 10), 9, PREC)
    a, ba = barnes_truncated(s, INDEP, 40, PREC)
    b, bb = barnes_truncated(s, INDEP, 80, PREC)
    assert dist(a, b) <= float(ba) + float(bb)


def test_truncated_domain():
    with pytest.raises(DomainError):
        barnes_truncated(exact_point(Fraction(1, 2), 500, PREC), INDEP, 50, PREC)
    with pytest.raises(DomainError):
        barnes_truncated(exact_point(Fraction(5, 2), 5, PREC), INDEP, 50, PREC)
    with pytest.raises(PoleError):
        barnes_truncated(1, INDEP, 50, PREC)


# prefactor


def test_prefactor_at_zero():
    p, b = afe_prefactor(0, PREC)
    assert abs(complex(p) - (-1j / (2 * math.pi))) <= float(b) + 1e-30


@pytest.mark.parametrize("t", [100, 200, 1000])
def test_prefactor_modulus_near_one(t):
    p, _ = afe_prefactor(exact_point(Fraction(1, 2), t, PREC), PREC)
    assert 0.95 <= abs(complex(p)) <= 1.05


def test_prefactor_two_routes():
    s = exact_point(Fraction(3, 10), 7, PREC)
    a, ba = afe_prefactor(s, PREC, route="product")
    b, bb = afe_prefactor(s, PREC, route="log")
    assert dist(a, b) <= float(ba) + float(bb) + 2.0 ** -100


def test_prefactor_pole():
    with pytest.raises(PoleError):
        afe_prefactor(1, PREC)


# geometry


def test_geometry_invariants():
    g = afe_geometry(1000, INDEP, x=5, height="nominal")
    assert abs(2 * math.pi * g.x * g.y - 1000) < 1e-9
    assert g.N == math.floor(5 / (1 + math.sqrt(2)))
    assert g.L == math.floor(1 * g.y) and g.M == math.floor(math.sqrt(2) * g.y)


def test_geometry_rejects_y_below_x():
    with pytest.raises(GeometryError):
        afe_geometry(100, INDEP, x=10)


def test_geometry_flags_n_zero():
    g = afe_geometry(1000, INDEP, x=1.5)
    assert g.N == 0 and "N_zero" in g.flags


# approximate functional equation


def test_afe_matches_square_lattice_identity():
    s = exact_point(Fraction(3, 2), 30, PREC)
    v, bd = barnes_afe(s, (1, 1, 1), prec=PREC)
    want = mp_square_lattice(mpmath.mpc(1.5, 30), Fraction(1))
    assert abs(v.to_mpc() - want) <= float(bd.budget)


def test_afe_vs_truncated_independent():
    s = exact_point(1, 10, PREC)
    a, bd = barnes_afe(s, INDEP, prec=PREC)
    b, bb = barnes_truncated(s, INDEP, 200, PREC)
    assert dist(a, b) <= float(bd.budget) + float(bb)


@pytest.mark.parametrize("params", [INDEP, DEP])
def test_afe_vs_truncated_grid(params):
    for k in range(10):
        sig = Fraction(11 + 8 * k, 100)
        s = exact_point(1 + sig, 20 + 9 * k, PREC)
        a, bd = barnes_afe(s, params, prec=PREC)
        b, bb = barnes_truncated(s, params, 120, PREC)
        assert dist(a, b) <= float(bd.budget) + float(bb)


def test_breakdown_total_and_shape():
    s = exact_point(Fraction(1, 2), 300, PREC)
    v, bd = barnes_afe(s, INDEP, prec=PREC)
    assert bd.dep_double_pole_32 is None and bd.dep_double_pole_12 is None
    assert dist(bd.total(), v) == 0
    v2, bd2 = barnes_afe(s, DEP, prec=PREC)
    assert bd2.dep_double_pole_32 is not None and bd2.dep_double_pole_12 is not None
    assert dist(bd2.total(), v2) == 0


def test_afe_swap_symmetry():
    s = exact_point(Fraction(1, 2), 300, PREC)
    for params in (INDEP, DEP):
        p = as_triple(params)
        a, ba = barnes_afe(s, p, prec=PREC)
        b, bb = barnes_afe(s, p.swapped(), prec=PREC)
        ref, rb = barnes_reference(s, p, PREC)
        # the geometry is symmetric, so both sides carry the same remainder
        assert dist(a, b) <= float(ba.budget) + float(bb.budget)
        assert dist(a, ref) <= float(ba.budget) + float(rb)


def test_afe_conjugate_in_t():
    a, _ = barnes_afe(exact_point(Fraction(1, 2), 200, PREC), DEP, prec=PREC)
    b, _ = barnes_afe(exact_point(Fraction(1, 2), -200, PREC), DEP, prec=PREC)
    assert abs(complex(a) - complex(b).conjugate()) < 1e-25


def test_afe_branch_mismatch():
    with pytest.raises(BranchMismatchError):
        barnes_afe(exact_point(Fraction(1, 2), 200, PREC), INDEP, dep=detect_dependence(1, 1), prec=PREC)


def test_afe_sigma_range():
    with pytest.raises(DomainError):
        barnes_afe(exact_point(3, 200, PREC), INDEP, prec=PREC)


def test_float_parameters_rejected():
    with pytest.raises(ParseError):
        as_triple((0.5, 1, 1))
    with pytest.raises(ParseError):
        as_triple(("0.5", "1", "1"))


def test_residue_sign_ab_check():
    """The statement sign -1 reproduces the reference value, the flipped sign does not."""
    t = 2000
    s = exact_point(Fraction(1, 2), t, PREC)
    results = {}
    for params in (INDEP, DEP):
        ref, rb = barnes_reference(s, params, PREC)
        for sign in (-1, 1):
            v, bd = barnes_afe(s, params, prec=PREC, conventions=AFEConventions(residue_sign=sign))
            results[(params, sign)] = dist(v, ref)
    for params in (INDEP, DEP):
        assert results[(params, -1)] < 0.1
        assert results[(params, 1)] > 10 * results[(params, -1)]


# residue sums


def test_residue_sum_empty():
    v, b = residue_sum(exact_point(Fraction(1, 2), 50, PREC), INDEP, N=2, L=0, prec=PREC)
    assert complex(v) == 0


@pytest.mark.parametrize("sig", [Fraction(1, 2), Fraction(3, 2), Fraction(1, 5)])
def test_residue_sum_pairing_at_real_s(sig):
    # on the principal branch (-n)^(1-s) = n^(1-s) e^{pi i (1-s)}, so term(-n) = e^{-pi i (1-s)} conj(term(n))
    # and e^{pi i (1-s)/2} times the bilateral sum is real
    v, b = residue_sum(sig, ("1/3", "1", "sqrt2"), N=1, L=6, prec=PREC)
    with workprec(PREC):
        rot = (acb(1) - acb(sig.numerator) / sig.denominator) / 2
        r = rot.exp_pi_i() * v.value
    assert abs(float(r.imag.mid())) <= float(b) + 1e-30
    assert abs(complex(v).imag) > 1e-3


def test_residue_sum_brute_force():
    s = exact_point(Fraction(1, 2), 50, PREC)
    alpha, N, L = Fraction(1, 3), 2, 5
    v, b = residue_sum(s, (alpha, "1", "sqrt2"), N=N, L=L, prec=PREC)
    with mpmath.workdps(50):
        sm = mpmath.mpc(0.5, 50)
        w = mpmath.sqrt(2)
        theta = mpmath.mpf(1) / 3 + w * N
        acc = mpmath.mpc(0)
        for n in list(range(1, L + 1)) + list(range(-L, 0)):
            acc += mpmath.expjpi(-2 * n * theta) / ((mpmath.expjpi(2 * n * w) - 1) * mpmath.power(n, 1 - sm))
        assert abs(v.to_mpc() - acc) <= float(b) + 1e-35
