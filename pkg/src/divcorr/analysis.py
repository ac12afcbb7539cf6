"""Error terms E = D - M, power-law fits and bound checks.

D comes from the sieve (exact integers), M from the main-term polynomials.
The difference is formed at ``digits`` significant digits (default 30) and
then stored as float64: at X <= 1e9 the error term is at least nine orders of
magnitude smaller than D, so the float keeps every digit that the subtraction
produced that matters for fitting and plotting.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from mpmath import mp, mpf

from . import mainterms, sieve
from .bigreal import BigReal
from .errors import DegenerateFitError, DomainError

# D is taken from a prefix array up to this X, from a checkpointed sweep beyond
PREFIX_LIMIT = 2 * 10**7
CHECKPOINTS = (10**6, 20_220_000, 10**9)


def main_term_polynomial(k, ell, h, digits=mainterms.DEFAULT_DIGITS):
    """The LogPolynomial M with M(X) = X P(log X), for the supported (k, l, h)."""
    if (k, ell) == (2, 2):
        return mainterms.m22_coefficients(h, digits)
    if (k, ell, h) == (3, 3, 1):
        return mainterms.m33_coefficients(digits)
    raise DomainError(f"no main term available for (k, l, h) = ({k}, {ell}, {h})")


def default_grid(xmax, per_decade=60, checkpoints=CHECKPOINTS):
    """Geometric grid from 10 to xmax (integer points, deduplicated) plus checkpoints <= xmax."""
    if xmax < 10:
        return np.arange(1, xmax + 1, dtype=np.int64)
    n = int(math.ceil(per_decade * (math.log10(xmax) - 1))) + 1
    pts = np.unique(np.round(np.logspace(1, math.log10(xmax), n)).astype(np.int64))
    extra = [c for c in checkpoints if c <= xmax]
    return np.unique(np.concatenate([pts, np.asarray(extra, dtype=np.int64), [xmax]]))


@dataclass
class ErrorSeries:
    k: int
    ell: int
    h: int
    grid: np.ndarray
    D: np.ndarray          # exact integers (int64 or Python ints in an object array)
    E: np.ndarray          # float64, from the difference formed at ``digits`` digits
    digits: int = 30
    main_term: object = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.grid) > 1 and np.any(np.diff(self.grid) <= 0):
            raise DomainError("grid must be strictly increasing")

    def __len__(self):
        return len(self.grid)

    def M(self, i):
        """Main term at the i-th grid point as a BigReal."""
        with mp.workdps(self.digits + 5):
            return BigReal(+mpf(int(self.D[i])) - mpf(float(self.E[i])), self.digits) \
                if self.main_term is None else BigReal(+_eval_main(self.main_term, int(self.grid[i])), self.digits)

    def to_csv(self, C=None, alpha=None):
        """CSV with columns X, E, bound_upper, bound_lower (25 significant digits)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["X", "E", "bound_upper", "bound_lower"])
        for X, e in zip(self.grid.tolist(), self.E.tolist()):
            if C is None:
                w.writerow([X, _fmt(e), "", ""])
            else:
                b = C * X**alpha
                w.writerow([X, _fmt(e), _fmt(b), _fmt(-b)])
        return buf.getvalue()


def _fmt(v):
    return f"{v:.25g}"


def _eval_main(main_term, X):
    if callable(main_term) and not isinstance(main_term, mainterms.LogPolynomial):
        return mpmath.mpmathify(main_term(X))
    return main_term(mpf(X))


def correlation_values(k, ell, h, grid, segment_size=sieve.DEFAULT_SEGMENT):
    """D_{k,l}(X, h) at every grid point."""
    grid = np.asarray(grid, dtype=np.int64)
    xmax = int(grid[-1])
    if xmax <= PREFIX_LIMIT:
        P = sieve.correlation_prefix(k, ell, h, xmax, segment_size)
        return P[grid]
    vals = sieve.correlation_checkpoints(k, ell, h, grid, segment_size)
    arr = np.empty(len(vals), dtype=object)
    arr[:] = vals
    return arr


def error_series(k, ell, h, grid, digits=30, main_term=None, D=None, segment_size=sieve.DEFAULT_SEGMENT):
    """E = D - M on the grid.

    ``main_term`` overrides the polynomial (any callable X -> number); ``D``
    supplies precomputed correlation values (e.g. shared with another series).
    """
    grid = np.asarray(grid, dtype=np.int64)
    if len(grid) == 0:
        raise DomainError("empty grid")
    if np.any(np.diff(grid) <= 0) or grid[0] < 1:
        raise DomainError("grid must be strictly increasing and start at X >= 1")
    if main_term is None:
        main_term = main_term_polynomial(k, ell, h)
    if D is None:
        D = correlation_values(k, ell, h, grid, segment_size)
    E = np.empty(len(grid), dtype=np.float64)
    with mp.workdps(digits + 5):
        if isinstance(main_term, mainterms.LogPolynomial):
            c = [mpf(x) for x in main_term.coeffs]
            for i, X in enumerate(grid.tolist()):
                L = mpmath.log(X)
                acc = c[-1]
                for a in reversed(c[:-1]):
                    acc = acc * L + a
                E[i] = float(int(D[i]) - X * acc)
        else:
            for i, X in enumerate(grid.tolist()):
                E[i] = float(int(D[i]) - _eval_main(main_term, X))
    return ErrorSeries(k, ell, h, grid, D, E, digits, main_term)


# --------------------------------------------------------------------------------------
# fits
# --------------------------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    alpha: float
    C: float
    points_used: int
    method: str
    residual: float

    def to_json(self):
        return json.dumps({"alpha": self.alpha, "C": self.C, "points_used": self.points_used,
                           "method": self.method, "residual": self.residual})


def record_points(X, A):
    """Indices where A = |E| exceeds every earlier value (running maxima)."""
    idx = []
    best = -math.inf
    for i, a in enumerate(A):
        if a > best:
            idx.append(i)
            best = a
    return np.asarray(idx, dtype=np.int64)


def _power_fit(X, A, method):
    X = np.asarray(X, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    keep = A > 0
    X, A = X[keep], A[keep]
    if len(X) == 0:
        raise DegenerateFitError("all error values are zero")
    if method == "record-points":
        sel = record_points(X, A)
        X, A = X[sel], A[sel]
    elif method != "least-squares":
        raise DomainError(f"unknown fit method {method!r}")
    if len(X) < 2 or np.ptp(np.log(X)) == 0:
        raise DegenerateFitError(f"only {len(X)} usable point(s) for the fit")
    lx, ly = np.log(X), np.log(A)
    (alpha, icpt), *_ = np.linalg.lstsq(np.vstack([lx, np.ones_like(lx)]).T, ly, rcond=None)
    res = ly - (alpha * lx + icpt)
    return FitResult(float(alpha), float(math.exp(icpt)), int(len(X)), method,
                     float(math.sqrt(np.mean(res**2))))


def loglog_fit(series, method="record-points", min_points=10):
    """Fit |E| ~ C X^alpha by regression of log|E| on log X.

    "record-points" regresses through the running maxima of |E| (the points
    that set a new record); "least-squares" uses every nonzero point.
    """
    A = np.abs(series.E)
    if np.count_nonzero(A) == 0:
        raise DegenerateFitError("all error values are zero")
    if np.count_nonzero(A) < min_points:
        raise DegenerateFitError(f"need at least {min_points} nonzero points")
    return _power_fit(series.grid, A, method)


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    first_violation: int | None
    worst_ratio: float

    def to_json(self):
        return json.dumps({"pass": self.passed, "first_violation": self.first_violation,
                           "worst_ratio": self.worst_ratio})


def bound_check(series, C, alpha):
    """Check |E(X)| <= C X^alpha at every grid point."""
    X = series.grid.astype(np.float64)
    bound = C * X**alpha
    ratio = np.abs(series.E) / bound
    bad = np.flatnonzero(ratio > 1)
    first = int(series.grid[bad[0]]) if len(bad) else None
    return BoundCheck(first is None, first, float(ratio.max()) if len(ratio) else 0.0)


# --------------------------------------------------------------------------------------
# arithmetic-progression probe
# --------------------------------------------------------------------------------------


@dataclass(frozen=True)
class APProbe:
    records: tuple
    fit: FitResult

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "h", "X", "q_limit", "delta_sum"])
        for r in self.records:
            w.writerow([r.k, r.h, r.X, r.q_limit, _fmt(float(r.delta_sum))])
        return buf.getvalue()


def ap_exponent_probe(k, h, grid, q_limit=None, sample=None, seed=0, budget_seconds=None):
    """Fit the summed progression remainder Delta(X) to C X^alpha over the grid.

    ``q_limit`` = None uses the full range floor(X^((k-1)/k)) at each X; an integer
    caps it (clipped to the range).  Records are returned with the fit so that
    they can be written out whatever the fitted exponent.
    """
    records = []
    for X in sorted(int(x) for x in grid):
        top = sieve.default_q_limit(k, X)
        ql = top if q_limit is None else min(q_limit, top)
        smp = None if sample is None else min(sample, ql)
        records.append(sieve.ap_remainder_sum(k, X, h, ql, smp, seed, budget_seconds))
    X = [r.X for r in records]
    A = [float(r.delta_sum) for r in records]
    fit = _power_fit(X, A, "least-squares")
    return APProbe(tuple(records), fit)
