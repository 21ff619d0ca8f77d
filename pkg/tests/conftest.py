from __future__ import annotations

import os

import mpmath
from hypothesis import settings

settings.register_profile("default", max_examples=25, deadline=None)
settings.register_profile("ci", max_examples=10, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def mp_close(got, want, tol) -> bool:
    """|got - want| <= tol with got an HPComplex/HPReal and want an mpmath number."""
    with mpmath.workdps(80):
        g = got.to_mpc() if hasattr(got, "to_mpc") else got.to_mpf()
        return abs(g - want) <= tol


def mp_square_lattice(s, alpha):
    """(1 - alpha) zeta_H(s, alpha) + zeta_H(s - 1, alpha): zeta_2(s, alpha; 1, 1)."""
    with mpmath.workdps(60):
        a = mpmath.mpf(alpha.numerator) / alpha.denominator if hasattr(alpha, "numerator") else mpmath.mpf(alpha)
        return (1 - a) * mpmath.zeta(s, a) + mpmath.zeta(s - 1, a)
