"""Offline oracle for the Barnes double zeta at large height.

Evaluates zeta_2(s, alpha; v, w) = sum_{m,n >= 0} (alpha + v m + w n)^(-s) for
one t and several sigma by an independent route:

* the lattice points below a cutoff X are summed directly in float64 with a
  numba kernel (row by row, each row anchored by a high-precision start
  value and advanced by a multiplicative recurrence);
* each row's remainder beyond X is an Euler-Maclaurin expansion in the inner
  step;
* rows that start beyond X are summed with a nested Euler-Maclaurin expansion
  evaluated in mpmath.

Usage:
    python tools/independent_oracle.py --alpha 1 --v 1 --w sqrt2 \
        --t 1010000 --sigma 0.5 --sigma 1.5 --out tests/data/oracle_1_1_sqrt2.json
"""
from __future__ import annotations

import argparse
import json
import math
import time
from fractions import Fraction

import mpmath
import numba
import numpy as np

INNER_EM_TERMS = 40


def parse_param(text: str) -> mpmath.mpf:
    text = text.strip()
    coeff, _, rad = text.partition("sqrt")
    q = Fraction(coeff.rstrip("*") or "1")
    value = mpmath.mpf(q.numerator) / q.denominator
    if rad:
        value *= mpmath.sqrt(int(rad.strip("()")))
    return value


@numba.njit(cache=True)
def _rows_kernel(starts_re, starts_im, row_c, h, t, X, sigmas, coef, out):
    """Direct sums below X plus per-row Euler-Maclaurin tails.

    ``starts`` hold c^(-1/2 - i t) for each row start c.  ``out`` receives one
    (re, im) pair per sigma, accumulated with Kahan compensation.
    """
    ns = sigmas.shape[0]
    acc_re = np.zeros(ns)
    acc_im = np.zeros(ns)
    cmp_re = np.zeros(ns)
    cmp_im = np.zeros(ns)
    K = coef.shape[0]
    for r in range(row_c.shape[0]):
        c = row_c[r]
        tr = starts_re[r]
        ti = starts_im[r]
        row_re = np.zeros(ns)
        row_im = np.zeros(ns)
        a = c
        n = 0
        while a < X:
            inv = 1.0 / a
            for j in range(ns):
                e = 0.5 - sigmas[j]
                if e == 0.0:
                    scale = 1.0
                elif e == -1.0:
                    scale = inv
                else:
                    scale = a ** e
                row_re[j] += tr * scale
                row_im[j] += ti * scale
            L = math.log1p(h / a)
            mag = math.exp(-0.5 * L)
            ph = -t * L
            fr = mag * math.cos(ph)
            fi = mag * math.sin(ph)
            tr, ti = tr * fr - ti * fi, tr * fi + ti * fr
            n += 1
            a = c + h * n
        # remainder of the row: sum_{k>=0} (a + h k)^(-s)
        u = a
        for j in range(ns):
            sr = sigmas[j]
            scale = u ** (0.5 - sr)
            pr = tr * scale
            pi = ti * scale
            # u^(1-s)/(h(s-1)) + u^(-s)/2
            dr = sr - 1.0
            di = t
            den = dr * dr + di * di
            qr = u * (dr / den) / h
            qi = u * (-di / den) / h
            br = qr + 0.5
            bi = qi
            # Bernoulli corrections b_k q_k, q_k = h^(2k-1) (s)_{2k-1} u^(1-2k) (2 pi)^(-2k)
            tp2 = 4.0 * math.pi * math.pi
            qr = h * sr / (u * tp2)
            qi = h * t / (u * tp2)
            step = h * h / (u * u * tp2)
            for k in range(K):
                br += coef[k] * qr
                bi += coef[k] * qi
                a1r = sr + 2 * k + 1
                a2r = sr + 2 * k + 2
                mr = (a1r * a2r - t * t) * step
                mi = t * (a1r + a2r) * step
                qr, qi = qr * mr - qi * mi, qr * mi + qi * mr
            row_re[j] += pr * br - pi * bi
            row_im[j] += pr * bi + pi * br
        for j in range(ns):
            y = row_re[j] - cmp_re[j]
            s_ = acc_re[j] + y
            cmp_re[j] = (s_ - acc_re[j]) - y
            acc_re[j] = s_
            y = row_im[j] - cmp_im[j]
            s_ = acc_im[j] + y
            cmp_im[j] = (s_ - acc_im[j]) - y
            acc_im[j] = s_
    for j in range(ns):
        out[j, 0] = acc_re[j]
        out[j, 1] = acc_im[j]


def _em_power_tail(z, c, g, terms: int):
    """sum_{j>=0} (c + g j)^(-z) by Euler-Maclaurin at c (no direct terms)."""
    total = c ** (1 - z) / (g * (z - 1)) + c ** (-z) / 2
    poch = z
    for k in range(1, terms + 1):
        term = mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k) * g ** (2 * k - 1) * poch * c ** (1 - z - 2 * k)
        total += term
        if abs(term) < mpmath.mpf(10) ** (-mpmath.mp.dps) * abs(total) and k > 4:
            break
        poch *= (z + 2 * k - 1) * (z + 2 * k)
    return total


def outer_tail(s, cR, h, g, inner_terms: int, outer_terms: int):
    """sum over rows starting at cR, cR+g, ... of the row expansion."""
    total = _em_power_tail(s - 1, cR, g, outer_terms) / (h * (s - 1))
    total += _em_power_tail(s, cR, g, outer_terms) / 2
    poch = s
    for k in range(1, inner_terms + 1):
        coef = mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k) * h ** (2 * k - 1) * poch
        total += coef * _em_power_tail(s + 2 * k - 1, cR, g, outer_terms)
        poch *= (s + 2 * k - 1) * (s + 2 * k)
    return total


def evaluate(alpha, v, w, t: float, sigmas: list[float], cutoff_factor: float = 1.0,
             dps: int = 30, verbose: bool = False) -> dict:
    mpmath.mp.dps = dps
    alpha, v, w = (mpmath.mpf(p) for p in (alpha, v, w))
    h, g = (v, w) if v <= w else (w, v)
    X = cutoff_factor * t * float(h) / math.pi
    X = max(X, 4 * float(h) * INNER_EM_TERMS)
    R = int(mpmath.ceil((X - alpha) / g)) if X > alpha else 0
    t0 = time.time()
    row_c = np.empty(R)
    sre = np.empty(R)
    sim = np.empty(R)
    for m in range(R):
        c = alpha + g * m
        val = mpmath.power(c, mpmath.mpc(-0.5, -t))
        row_c[m] = float(c)
        sre[m] = float(val.real)
        sim[m] = float(val.imag)
    # B_2k (2 pi)^(2k) / (2k)!, each of size about 2
    coef = np.array([float(mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k) * (2 * mpmath.pi) ** (2 * k))
                     for k in range(1, INNER_EM_TERMS + 1)])
    if verbose:
        print(f"rows={R} X={X:.6g} starts {time.time() - t0:.1f}s", flush=True)
    t1 = time.time()
    out = np.zeros((len(sigmas), 2))
    _rows_kernel(sre, sim, row_c, float(h), float(t), float(X), np.array(sigmas, dtype=float), coef, out)
    if verbose:
        print(f"kernel {time.time() - t1:.1f}s", flush=True)
    cR = alpha + g * R
    results = []
    for j, sigma in enumerate(sigmas):
        s = mpmath.mpc(sigma, t)
        tail = outer_tail(s, cR, h, g, INNER_EM_TERMS, 400)
        val = mpmath.mpc(out[j, 0], out[j, 1]) + tail
        results.append({"sigma": sigma, "re": mpmath.nstr(val.real, 20), "im": mpmath.nstr(val.imag, 20)})
    return {"t": t, "cutoff": X, "rows": R, "values": results, "seconds": round(time.time() - t0, 1)}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", required=True)
    ap.add_argument("--v", required=True)
    ap.add_argument("--w", required=True)
    ap.add_argument("--t", type=float, required=True)
    ap.add_argument("--sigma", type=float, action="append", required=True)
    ap.add_argument("--cutoff-factor", type=float, default=1.0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    res = evaluate(parse_param(args.alpha), parse_param(args.v), parse_param(args.w), args.t,
                   args.sigma, args.cutoff_factor, verbose=True)
    res.update({"alpha": args.alpha, "v": args.v, "w": args.w})
    text = json.dumps(res, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
