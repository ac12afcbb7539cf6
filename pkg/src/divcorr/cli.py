"""Command-line interface: ``python -m divcorr <command> ...`` (also installed as ``divcorr``).

Exit codes: 0 success, 1 failed verification, 2 usage or domain error,
3 resource or precision error (a JSON diagnostic goes to stderr).
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import acceptance, analysis, mainterms, sieve
from .errors import DegenerateFitError, DomainError, PrecisionError, ResourceError

DIGITS_ENV = "DIVCORR_DIGITS"


@dataclass(frozen=True)
class RunConfig:
    digits: int = 90
    segment_size: int = sieve.DEFAULT_SEGMENT
    threads: int = 0          # 0: one per CPU
    budget_seconds: int = 3600
    output: str = "csv"       # "csv" or "json"
    seed: int = 0

    def __post_init__(self):
        if self.digits < 30:
            raise DomainError("digits must be at least 30")
        if self.segment_size < 1024:
            raise DomainError("segment size must be at least 1024")
        if self.threads < 0 or self.budget_seconds <= 0:
            raise DomainError("threads must be >= 0 and the budget positive")
        if self.output not in ("csv", "json"):
            raise DomainError("output must be csv or json")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def workers(self):
        return self.threads or (os.cpu_count() or 1)

    @classmethod
    def from_args(cls, args):
        return cls(digits=args.digits, segment_size=args.segment_size, threads=args.threads,
                   budget_seconds=args.budget_seconds, output=args.output, seed=args.seed)


def _default_digits():
    raw = os.environ.get(DIGITS_ENV)
    if raw is None:
        return 90
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"{DIGITS_ENV} must be an integer, got {raw!r}") from None


def _emit_rows(cfg, header, rows, out):
    if cfg.output == "json":
        out.write(json.dumps([dict(zip(header, (_json_safe(v) for v in r))) for r in rows], indent=1) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _json_safe(v):
    """Integers beyond 2^53 and multiprecision numbers become decimal strings."""
    if isinstance(v, (int, np.integer)) and abs(int(v)) > 2**53:
        return str(int(v))
    if isinstance(v, (int, float, str)) or v is None:
        return v
    return str(v)


# --------------------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------------------


def cmd_correlate(args, cfg, out):
    rec = sieve.correlate(args.k, args.ell, args.x, args.h, cfg.segment_size, cfg.workers)
    _emit_rows(cfg, rec.CSV_HEADER, [rec.csv_row()], out)


def cmd_sieve(args, cfg, out):
    table = sieve.tau_table(args.k, args.lo, args.hi, cfg.segment_size, cfg.workers)
    with open(args.out, "wb") as fh:
        fh.write(table.to_bytes())
    _emit_rows(cfg, ("k", "lo", "hi", "path"), [(args.k, args.lo, args.hi, args.out)], out)


def cmd_hooley(args, cfg, out):
    s = sieve.hooley_sigma_sums(args.x, args.h, cfg.segment_size)
    d = sieve.correlate(3, 3, args.x, args.h, cfg.segment_size, cfg.workers).value
    upto = min(args.identity_upto, args.x)
    bad = [n for n in range(1, upto + 1) if not sieve.hooley_identity_check(n, args.x)[3]]
    header = ("X", "h", "sigma11", "sigma21", "sigma31", "combined", "D33", "decomposition_holds",
              "identity_checked_upto", "identity_failures")
    row = (args.x, args.h, s.sigma11, s.sigma21, s.sigma31, s.combined, d, s.combined == d, upto, len(bad))
    _emit_rows(cfg, header, [row], out)


def cmd_mainterm(args, cfg, out):
    if args.which == "m22":
        poly = mainterms.m22_coefficients(args.h, cfg.digits)
    elif args.h != 1:
        raise DomainError(f"{args.which} is available for h = 1 only")
    elif args.which == "m33":
        poly = mainterms.m33_coefficients(cfg.digits)
    else:
        poly = mainterms.delta_m3_coefficients(cfg.digits)
    out.write(json.dumps({"name": args.which, "h": args.h, "digits": cfg.digits, **poly.to_json()},
                         indent=1) + "\n")


def cmd_constants(args, cfg, out):
    names = [args.name] if args.name else list(mainterms.CONSTANT_NAMES)
    rows = [(n, str(mainterms.named_constant(n, cfg.digits))) for n in names]
    if args.name and cfg.output == "csv" and not args.header:
        out.write(rows[0][1] + "\n")
        return
    _emit_rows(cfg, ("name", "value"), rows, out)


def cmd_local_factor(args, cfg, out):
    lf = mainterms.f_kl_h(args.k, args.ell, args.h, cfg.digits, args.method)
    rows = [(p, nu, f"{f.numerator}/{f.denominator}", _decimal(f, cfg.digits)) for p, nu, f in lf.factors]
    rows.append(("all", "", f"{lf.exact.numerator}/{lf.exact.denominator}", str(lf.value)))
    _emit_rows(cfg, ("p", "nu", "exact", "factor"), rows, out)


def _decimal(fr, digits):
    import mpmath

    with mpmath.mp.workdps(digits + 5):
        return mpmath.nstr(mpmath.mpf(fr.numerator) / fr.denominator, digits, strip_zeros=False)


def cmd_ap_remainder(args, cfg, out):
    rec = sieve.ap_remainder_sum(args.k, args.x, args.h, args.q_limit, args.sample, cfg.seed,
                                 cfg.budget_seconds)
    header = rec.CSV_HEADER + ("q_sampled",)
    _emit_rows(cfg, header, [rec.csv_row() + (rec.q_sampled or "all",)], out)


def cmd_fit_error(args, cfg, out):
    if args.grid == "dense":
        grid = np.arange(1, args.xmax + 1, dtype=np.int64)
    else:
        grid = analysis.default_grid(args.xmax, args.per_decade)
    series = analysis.error_series(args.k, args.ell, args.h, grid, segment_size=cfg.segment_size)
    fit = analysis.loglog_fit(series, args.method)
    text = series.to_csv(fit.C, fit.alpha)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    out.write(fit.to_json() + "\n")


def cmd_verify(args, cfg, out):
    def emit(line):
        out.write(line + "\n")
        out.flush()

    lines = acceptance.run(args.criteria or None, args.extended, emit)
    failed = [ln for ln in lines if ln.passed is False]
    out.write(f"{len(lines) - len(failed)} of {len(lines)} checks passed or skipped; {len(failed)} failed\n")
    return 1 if failed else 0


# --------------------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, default=None,
                        help=f"working precision in decimal digits (default ${DIGITS_ENV} or 90)")
    common.add_argument("--segment-size", type=int, default=sieve.DEFAULT_SEGMENT)
    common.add_argument("--threads", type=int, default=0, help="sieve worker threads, 0 = one per CPU")
    common.add_argument("--budget-seconds", type=int, default=3600)
    common.add_argument("--output", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="divcorr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("correlate", parents=[common], help="exact D_{k,l}(X, h)")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--ell", type=int, required=True)
    c.add_argument("--h", type=int, default=1)
    c.add_argument("--x", type=int, required=True)
    c.set_defaults(func=cmd_correlate)

    c = sub.add_parser("sieve", parents=[common], help="dump tau_k(n), lo <= n < hi, as a TAUK table")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--lo", type=int, required=True)
    c.add_argument("--hi", type=int, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_sieve)

    c = sub.add_parser("hooley-check", parents=[common], help="check 3 S11 - 3 S21 + S31 = D_{3,3}")
    c.add_argument("--x", type=int, required=True)
    c.add_argument("--h", type=int, default=1)
    c.add_argument("--identity-upto", type=int, default=1000,
                   help="also check the pointwise identity for n up to this bound")
    c.set_defaults(func=cmd_hooley)

    c = sub.add_parser("mainterm", parents=[common], help="main-term polynomial as JSON")
    c.add_argument("which", choices=("m22", "m33", "delta"))
    c.add_argument("--h", type=int, default=1)
    c.set_defaults(func=cmd_mainterm)

    c = sub.add_parser("constants", parents=[common], help="named constants")
    c.add_argument("--name", help="one of: " + ", ".join(mainterms.CONSTANT_NAMES) + ", C_k,l")
    c.add_argument("--header", action="store_true", help="with --name, print a CSV header row too")
    c.set_defaults(func=cmd_constants)

    c = sub.add_parser("local-factor", parents=[common], help="per-prime factors of f_{k,l}(h)")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--ell", type=int, required=True)
    c.add_argument("--h", type=int, required=True)
    c.add_argument("--method", choices=("auto", "closed", "general"), default="auto")
    c.set_defaults(func=cmd_local_factor)

    c = sub.add_parser("ap-remainder", parents=[common], help="summed remainder of tau_k in progressions")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--x", type=int, required=True)
    c.add_argument("--h", type=int, default=1)
    c.add_argument("--q-limit", type=int, default=None)
    c.add_argument("--sample", type=int, default=None, help="draw this many moduli (uses --seed)")
    c.set_defaults(func=cmd_ap_remainder)

    c = sub.add_parser("fit-error", parents=[common], help="error series CSV and power-law fit JSON")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--ell", type=int, required=True)
    c.add_argument("--h", type=int, default=1)
    c.add_argument("--xmax", type=int, required=True)
    c.add_argument("--grid", choices=("geometric", "dense"), default="geometric")
    c.add_argument("--per-decade", type=int, default=60)
    c.add_argument("--method", choices=("record-points", "least-squares"), default="record-points")
    c.add_argument("--csv", help="write the error series here instead of stdout")
    c.set_defaults(func=cmd_fit_error)

    c = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    c.add_argument("--extended", action="store_true", help="include the X = 1e9 correlation")
    c.add_argument("--criteria", type=int, nargs="*", choices=sorted(acceptance.CRITERIA))
    c.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None):
    out = out if out is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)   # exits with code 2 on usage errors
    try:
        if args.digits is None:
            args.digits = _default_digits()
        cfg = RunConfig.from_args(args)
        rc = args.func(args, cfg, out)
    except (ResourceError, PrecisionError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        for key in ("estimate", "budget", "required"):
            if getattr(exc, key, None) is not None:
                diag[key] = _json_safe(getattr(exc, key))
        sys.stderr.write(json.dumps(diag) + "\n")
        return 3
    except (DomainError, DegenerateFitError) as exc:
        sys.stderr.write(f"divcorr {args.command}: error: {exc}\n")
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
