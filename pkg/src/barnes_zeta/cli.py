"""Command-line interface: ``barnes-zeta {eval,verify,scan,kappa}``.

Configuration is layered: built-in defaults (precision from ``BARNES_PREC``
when set), then a flat JSON object given with ``--config``, then flags.
Exit codes: 0 success, 1 verification failure, 2 parse error, 3 domain
error, 4 precision error, 5 every scan row failed.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from importlib import resources
from typing import Callable, Optional

import jsonschema
import mpmath
from flint import acb

from . import exp_sums, growth_lab
from .barnes_eval import (
    AFEConventions,
    POLICIES,
    afe_geometry,
    as_triple,
    barnes_afe,
    barnes_direct,
    barnes_reference,
    barnes_truncated,
    detect_dependence,
)
from .classical_zetas import hurwitz_zeta, lerch_zeta
from .errors import BarnesError, ParseError, ScanFailure
from .numerics_core import DEFAULT_PREC, HPComplex, MIN_PREC, exact_point, format_arb, fraction_to_arb, workprec

FORMAT_VERSION = 1
CSV_COLUMNS = ["t", "re", "im", "abs", "method", "budget", "x", "y", "N", "L", "M", "error"]
SIGN_CONVENTIONS = {"statement": -1, "flipped": 1}


@dataclass
class RunConfig:
    precision: int = DEFAULT_PREC
    budget_constant: float = 10.0
    geometry_policy: str = "balanced"
    sign_convention: str = "statement"
    height: str = "centered"
    output_format: str = "csv"
    seed: int = 0
    workers: int = 1

    def validate(self) -> "RunConfig":
        if int(self.precision) < MIN_PREC:
            raise ParseError(f"precision must be at least {MIN_PREC} bits")
        if not self.budget_constant > 0:
            raise ParseError("budget_constant must be positive")
        if self.geometry_policy not in POLICIES:
            raise ParseError(f"geometry_policy must be one of {', '.join(POLICIES)}")
        if self.sign_convention not in SIGN_CONVENTIONS:
            raise ParseError("sign_convention must be 'statement' or 'flipped'")
        if self.height not in ("centered", "nominal"):
            raise ParseError("height must be 'centered' or 'nominal'")
        if self.output_format not in ("csv", "json"):
            raise ParseError("output_format must be 'csv' or 'json'")
        if int(self.workers) < 1:
            raise ParseError("workers must be at least 1")
        return self

    def conventions(self) -> AFEConventions:
        return AFEConventions(residue_sign=SIGN_CONVENTIONS[self.sign_convention])


def default_config() -> RunConfig:
    cfg = RunConfig()
    env = os.environ.get("BARNES_PREC")
    if env:
        try:
            cfg.precision = int(env)
        except ValueError as exc:
            raise ParseError(f"BARNES_PREC={env!r} is not an integer") from exc
    return cfg


def load_config(args) -> RunConfig:
    cfg = default_config()
    fields = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(data, dict):
            raise ParseError("config file must hold a flat JSON object")
        for key, value in data.items():
            if key not in fields:
                raise ParseError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    for key in fields:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


# ----------------------------------------------------------------------------
# parsing and formatting
# ----------------------------------------------------------------------------


def parse_exact(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"cannot parse {text!r} as an exact decimal or rational") from exc


def parse_s(text: str, prec: int) -> acb:
    """``"sigma+ti"`` with decimal or rational sigma and t."""
    body = text.strip().replace(" ", "").replace("j", "i")
    if not body:
        raise ParseError("empty value for s")
    if not body.endswith("i"):
        re_txt, im_txt = body, "0"
    else:
        core = body[:-1]
        cut = -1
        for i in range(len(core) - 1, 0, -1):
            if core[i] in "+-" and core[i - 1] not in "eE":
                cut = i
                break
        if cut < 0:
            re_txt, im_txt = "0", core
        else:
            re_txt, im_txt = core[:cut], core[cut:]
        if im_txt in ("", "+", "-"):
            im_txt += "1"
    return exact_point(parse_exact(re_txt), parse_exact(im_txt), prec)


def parse_t_range(text: str, points: Optional[int]) -> list[Fraction]:
    parts = text.split(":")
    if len(parts) == 1:
        return [parse_exact(parts[0])]
    if len(parts) not in (2, 3):
        raise ParseError("t range must be 't', 'a:b' or 'a:b:n'")
    a, b = parse_exact(parts[0]), parse_exact(parts[1])
    n = points if points is not None else (int(parts[2]) if len(parts) == 3 else 16)
    if n < 1:
        raise ParseError("the number of points must be positive")
    if n == 1:
        return [a]
    if not (0 < a < b):
        raise ParseError("t range needs 0 < a < b")
    return growth_lab.log_grid(a, b, n)


def fmt_fraction(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    d = Decimal(q.numerator) / Decimal(q.denominator)
    return format(d.normalize(), "f")


def fmt_float(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def fmt_hp(z: HPComplex) -> tuple[str, str]:
    return format_arb(z.value.real, z.prec), format_arb(z.value.imag, z.prec)


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------------
# eval
# ----------------------------------------------------------------------------


def cmd_eval(args, cfg: RunConfig) -> int:
    prec = int(cfg.precision)
    s = parse_s(args.s, prec)
    params = as_triple((args.alpha, args.v, args.w))
    dep = detect_dependence(params.v, params.w)
    lines = [f"params: alpha={params.alpha} v={params.v} w={params.w} ({dep})",
             f"s: {args.s}", f"method: {args.method}", f"precision: {prec}"]
    if args.method == "direct":
        val, budget = barnes_direct(s, params, prec)
    elif args.method == "reference":
        val, budget = barnes_reference(s, params, prec)
    elif args.method == "truncated":
        t_abs = abs(float(s.imag.mid()))
        x = args.x if args.x is not None else max(50.0, math.ceil(2.0 * t_abs / (2 * math.pi)))
        lines.append(f"x: {fmt_float(x)}")
        val, budget = barnes_truncated(s, params, x, prec, constant=cfg.budget_constant)
    else:
        geom = None
        if args.x is not None:
            geom = afe_geometry(s.imag, params, x=args.x, height=cfg.height)
        val, bd = barnes_afe(s, params, geom, prec=prec, constant=cfg.budget_constant,
                             conventions=cfg.conventions(), policy=cfg.geometry_policy, height=cfg.height)
        budget = bd.budget
        g = bd.geometry
        lines.append(f"geometry: x={fmt_float(g.x)} y={fmt_float(g.y)} N={g.N} L={g.L} M={g.M} "
                     f"policy={g.policy} height={g.height}" + (f" flags={','.join(g.flags)}" if g.flags else ""))
        names = ["main_double_sum", "tail_v", "tail_w", "residue_v", "residue_w",
                 "dep_double_pole_32", "dep_double_pole_12"]
        for name in names:
            part = getattr(bd, name)
            if part is not None:
                re, im = fmt_hp(part)
                lines.append(f"  {name}: {re} {im}")
    re, im = fmt_hp(val)
    with workprec(prec):
        mag = format_arb(abs(val.value), prec)
    lines += [f"value: {re} {im}", f"abs: {mag}", f"budget: {fmt_float(float(budget))}"]
    for label, amount in budget.by_label().items():
        lines.append(f"  budget.{label}: {fmt_float(float(amount))}")
    _emit("\n".join(lines) + "\n", None)
    return 0


# ----------------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool


def _oracle_dps(prec: int) -> int:
    return int(prec * 0.30103) + 20


def _close(name: str, got: HPComplex, want, budget: float, floor: float = 0.0) -> Check:
    with mpmath.workdps(_oracle_dps(got.prec)):
        diff = abs(got.to_mpc() - mpmath.mpc(want))
    tol = float(budget) + floor
    return Check(name, float(diff), tol, float(diff) <= tol)


def _suite_identities(args, cfg: RunConfig) -> list[Check]:
    prec = int(cfg.precision)
    out = []
    with mpmath.workdps(_oracle_dps(prec)):
        z3 = mpmath.zeta(3)
        pi2 = mpmath.pi ** 2
        v, b = hurwitz_zeta(2, 1, prec)
        out.append(_close("hurwitz(2,1) = pi^2/6", v, pi2 / 6, b))
        v, b = hurwitz_zeta(2, Fraction(1, 2), prec)
        out.append(_close("hurwitz(2,1/2) = pi^2/2", v, pi2 / 2, b))
        s = mpmath.mpc(0.5, 10)
        v, b = hurwitz_zeta(acb(0.5, 10), Fraction(1, 2), prec)
        out.append(_close("hurwitz(s,1/2) = (2^s-1) zeta(s)", v, (2 ** s - 1) * mpmath.zeta(s), b, 1e-40))
        v1, b1 = hurwitz_zeta(acb(0.5, 10), Fraction(1, 3), prec)
        v2, b2 = hurwitz_zeta(acb(0.5, 10), Fraction(4, 3), prec)
        rec = mpmath.power(mpmath.mpf(1) / 3, -s)
        out.append(_close("recurrence alpha^-s", v1 - v2, rec, float(b1) + float(b2), 1e-40))
        v, b = lerch_zeta(2, 1, Fraction(1, 2), prec)
        out.append(_close("lerch(2,1,1/2) = pi^2/12", v, pi2 / 12, b))
        v, b = barnes_direct(4, ("1", "1", "1"), prec)
        out.append(_close("direct(4;1,1,1) = zeta(3)", v, z3, b))
        for alpha in ("1/3", "1/2", "1"):
            a = Fraction(alpha)
            s_acb = acb(1.5, 30)
            ref_s, rb1 = hurwitz_zeta(s_acb, a, prec)
            ref_s1, rb2 = hurwitz_zeta(s_acb - 1, a, prec)
            want = (1 - a.numerator / mpmath.mpf(a.denominator)) * ref_s.to_mpc() + ref_s1.to_mpc()
            val, bd = barnes_afe(s_acb, (alpha, "1", "1"), prec=prec, constant=cfg.budget_constant)
            out.append(_close(f"afe vs square-lattice identity alpha={alpha}", val, want,
                              float(bd.budget) + float(rb1) + float(rb2)))
    return out


def _slope(xs, ys) -> float:
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    mx = sum(lx) / len(lx)
    my = sum(ly) / len(ly)
    return sum((a - mx) * (b - my) for a, b in zip(lx, ly)) / sum((a - mx) ** 2 for a in lx)


def _suite_afe_residual(args, cfg: RunConfig) -> list[Check]:
    prec = int(cfg.precision)
    out = []
    # square truncation: v = w = 1, alpha = 1 against the square-lattice identity
    xs = [50, 100, 200, 400]
    for sigma in (Fraction(1, 2), Fraction(3, 2)):
        s = acb(fraction_to_arb(sigma), 10)
        h1, _ = hurwitz_zeta(s - 1, 1, prec)
        errs = []
        for x in xs:
            val, _ = barnes_truncated(s, ("1", "1", "1"), x, prec)
            with workprec(prec):
                errs.append(float(abs(val.value - h1.value).mid()))
        sl = _slope(xs, errs)
        target = 1 - float(sigma)
        out.append(Check(f"truncated slope sigma={sigma} (target {target:+.2f})", sl, 0.2, abs(sl - target) <= 0.2))
    # approximate functional equation at fixed t, doubling x
    t = 10000
    xs = [2, 4, 8, 16, 32]
    for sigma in (Fraction(1, 2), Fraction(3, 2)):
        s = acb(fraction_to_arb(sigma), t)
        h0, _ = hurwitz_zeta(s, Fraction(1, 2), prec)
        h1, _ = hurwitz_zeta(s - 1, Fraction(1, 2), prec)
        with workprec(prec):
            want = h0.value / 2 + h1.value
        errs = []
        for x in xs:
            geom = afe_geometry(s.imag, ("1/2", "1", "1"), x=x, height="nominal")
            val, _ = barnes_afe(s, ("1/2", "1", "1"), geom, prec=prec, conventions=cfg.conventions())
            with workprec(prec):
                errs.append(float(abs(val.value - want).mid()))
        sl = _slope(xs, errs)
        target = -float(sigma)
        out.append(Check(f"afe slope sigma={sigma} alpha=1/2 v=w=1 (target {target:+.2f})", sl, 0.2,
                         abs(sl - target) <= 0.2))
    return out


def _suite_vdc(args, cfg: RunConfig) -> list[Check]:
    out = []
    rows3 = exp_sums.vdc_sweep(args.windows, args.seed if args.seed is not None else cfg.seed, order=3)
    rows2 = exp_sums.vdc_sweep(args.windows, args.seed if args.seed is not None else cfg.seed, order=2)
    for k, (r3, r2) in enumerate(zip(rows3, rows2)):
        out.append(Check(f"window {k} a={r3.a} b={r3.b} t={r3.t} third", r3.ratio, 10.0, r3.ratio <= 10))
        out.append(Check(f"window {k} a={r2.a} b={r2.b} t={r2.t} second", r2.ratio, 10.0, r2.ratio <= 10))
    return out


def _suite_partial_sums(args, cfg: RunConfig) -> list[Check]:
    out = []
    for row in exp_sums.partial_sum_sweep():
        out.append(Check(f"partial sum t={row.t} x={row.x}", row.ratio, 10.0, row.ratio <= 10))
    return out


SUITES: dict[str, Callable] = {
    "identities": _suite_identities,
    "afe-residual": _suite_afe_residual,
    "vdc": _suite_vdc,
    "lemma5": _suite_partial_sums,
}


def cmd_verify(args, cfg: RunConfig) -> int:
    checks = SUITES[args.suite](args, cfg)
    width = max(len(c.name) for c in checks)
    lines = [f"{'check'.ljust(width)}  {'value':>12}  {'threshold':>12}  result"]
    for c in checks:
        lines.append(f"{c.name.ljust(width)}  {c.value:12.4e}  {c.threshold:12.4e}  {'PASS' if c.passed else 'FAIL'}")
    failed = [c for c in checks if not c.passed]
    lines.append(f"{len(checks) - len(failed)}/{len(checks)} passed")
    for c in failed:
        lines.append(f"failed: {c.name}")
    _emit("\n".join(lines) + "\n", None)
    return 1 if failed else 0


# ----------------------------------------------------------------------------
# scan
# ----------------------------------------------------------------------------


def _row_record(row: growth_lab.ScanRow) -> dict:
    rec = {k: None for k in CSV_COLUMNS}
    rec["t"] = fmt_fraction(row.t)
    rec["method"] = row.method
    rec["error"] = row.error
    if row.ok:
        rec["re"], rec["im"] = fmt_hp(row.value)
        rec["abs"] = format_arb(row.abs_value.value, row.abs_value.prec)
        rec["budget"] = fmt_float(row.budget)
        g = row.geometry
        if g is not None:
            rec.update(x=fmt_float(g.x), y=fmt_float(g.y), N=g.N, L=g.L, M=g.M)
    return rec


def _fit_record(rows, envelope: str) -> tuple[Optional[dict], Optional[str]]:
    try:
        fit = growth_lab.fit_exponent(rows, envelope)
    except BarnesError as exc:
        return None, str(exc)
    return {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared,
            "t_min": fit.window[0], "t_max": fit.window[1], "envelope": fit.envelope,
            "points": fit.points}, None


def scan_document(args, cfg: RunConfig) -> tuple[str, bool]:
    """Render the scan output; the flag is True when every row failed."""
    prec = int(cfg.precision)
    sigma = parse_exact(args.sigma)
    params = as_triple((args.alpha, args.v, args.w))
    ts = parse_t_range(args.t, args.points)
    rows = growth_lab.growth_scan(sigma, params, ts, args.method, cfg.geometry_policy, prec,
                                  int(cfg.workers), cfg.budget_constant, cfg.height)
    records = [_row_record(r) for r in rows]
    fit, why = _fit_record(rows, args.envelope) if len(rows) > 1 else (None, "single row")
    meta = {
        "format_version": FORMAT_VERSION,
        "precision": prec,
        "budget_constant": cfg.budget_constant,
        "geometry_policy": cfg.geometry_policy,
        "sign_convention": cfg.sign_convention,
        "height": cfg.height,
        "output_format": cfg.output_format,
        "seed": cfg.seed,
        "workers": int(cfg.workers),
        "sigma": fmt_fraction(sigma),
        "alpha": str(params.alpha),
        "v": str(params.v),
        "w": str(params.w),
        "method": growth_lab.resolve_method(args.method, sigma),
    }
    all_failed = bool(rows) and all(not r.ok for r in rows)
    if cfg.output_format == "json":
        doc = {"meta": meta, "rows": records, "fit": fit}
        validate_scan_json(doc)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n", all_failed
    buf = io.StringIO()
    buf.write(f"# barnes-zeta scan v{FORMAT_VERSION}\n")
    buf.write("# " + " ".join(f"{k}={meta[k]}" for k in sorted(meta) if k not in ("workers", "output_format")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(["" if rec[k] is None else rec[k] for k in CSV_COLUMNS])
    if fit is not None:
        buf.write("# fit," + ",".join(f"{k}={fit[k]!r}" if isinstance(fit[k], float) else f"{k}={fit[k]}"
                                      for k in ("slope", "intercept", "r_squared", "t_min", "t_max",
                                                "envelope", "points")) + "\n")
    elif len(rows) > 1:
        buf.write(f"# fit unavailable: {why}\n")
    return buf.getvalue(), all_failed


def load_schema() -> dict:
    with resources.files("barnes_zeta").joinpath("schemas/scan.schema.json").open(encoding="utf-8") as fh:
        return json.load(fh)


def validate_scan_json(doc: dict) -> None:
    jsonschema.validate(doc, load_schema())


def cmd_scan(args, cfg: RunConfig) -> int:
    text, all_failed = scan_document(args, cfg)
    _emit(text, args.output)
    if all_failed:
        raise ScanFailure("every row of the scan failed")
    return 0


# ----------------------------------------------------------------------------
# kappa
# ----------------------------------------------------------------------------


def cmd_kappa(args, cfg: RunConfig) -> int:
    prec = int(cfg.precision)
    params = as_triple((args.alpha, args.v, args.w))
    dep = detect_dependence(params.v, params.w)
    ts = parse_t_range(args.t, args.points)
    rows = growth_lab.growth_scan(Fraction(1, 2), params, ts, "afe", cfg.geometry_policy, prec,
                                  int(cfg.workers), cfg.budget_constant, cfg.height)
    est = growth_lab.kappa_extract(rows, dep, params, prec)
    buf = io.StringIO()
    buf.write(f"# barnes-zeta kappa v{FORMAT_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "ratio", "kappa_abs", "bound_statement", "bound_proof",
                     "violates_statement", "violates_proof"])
    for e in est:
        writer.writerow([fmt_fraction(e.t), repr(e.ratio), repr(e.kappa_abs), repr(e.bound_statement),
                         repr(e.bound_proof), int(e.violates_statement), int(e.violates_proof)])
    failed = [r for r in rows if not r.ok]
    for r in failed:
        buf.write(f"# row failed t={fmt_fraction(r.t)}: {r.error}\n")
    _emit(buf.getvalue(), args.output)
    return 1 if any(e.violates_proof for e in est) else 0


# ----------------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON object with RunConfig fields")
    common.add_argument("--prec", dest="precision", type=int, help="working precision in bits")
    common.add_argument("--constant", dest="budget_constant", type=float, help="O-constant used in budgets")
    common.add_argument("--policy", dest="geometry_policy", choices=POLICIES)
    common.add_argument("--sign", dest="sign_convention", choices=sorted(SIGN_CONVENTIONS))
    common.add_argument("--height", choices=("centered", "nominal"), help="residue cutoff height rule")
    common.add_argument("--format", dest="output_format", choices=("csv", "json"))
    common.add_argument("--workers", type=int)

    ap = argparse.ArgumentParser(prog="barnes-zeta", description="Barnes double zeta evaluator")
    sub = ap.add_subparsers(dest="command", required=True)

    def params(p):
        p.add_argument("--alpha", required=True)
        p.add_argument("--v", required=True)
        p.add_argument("--w", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate zeta_2(s, alpha; v, w)")
    p.add_argument("--s", required=True, help='e.g. "1/2+30i"')
    params(p)
    p.add_argument("--method", choices=("afe", "direct", "truncated", "reference"), default="afe")
    p.add_argument("--x", type=float, help="geometry parameter x (afe, truncated)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--windows", type=int, default=50)
    p.add_argument("--seed", dest="seed", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", parents=[common], help="sample |zeta_2| along sigma + i t")
    p.add_argument("--sigma", required=True)
    params(p)
    p.add_argument("--t", required=True, help="t or a:b[:n] (log-spaced)")
    p.add_argument("--points", type=int)
    p.add_argument("--method", choices=growth_lab.METHODS, default="auto")
    p.add_argument("--envelope", choices=growth_lab.ENVELOPES, default="dyadic")
    p.add_argument("--seed", dest="seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("kappa", parents=[common], help="linear coefficient on the critical line")
    params(p)
    p.add_argument("--t", required=True)
    p.add_argument("--points", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_kappa)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args)
        return args.func(args, cfg)
    except BarnesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
