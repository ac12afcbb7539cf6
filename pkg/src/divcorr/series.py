"""Truncated multivariate Laurent series and residue extraction.

A :class:`TruncatedSeries` is a finite map from exponent tuples to
coefficients together with a description of *where it is exact*: every
monomial with total degree <= ``degree`` and exponent_i <= ``caps[i]``
(when a cap is set) carries its true coefficient.  ``vmin`` and ``mins``
are lower bounds for the total degree and for each exponent over the
*untruncated* series (``None`` meaning unbounded below); they are what
makes the truncation bookkeeping of a product sound.

Variables are listed outermost first.  A factor 1/(c_1 v_1 + ... + c_n v_n)
is expanded around its outermost variable, i.e. as a power series in the
inner ones, matching nested contours |v_n| < ... < |v_1|.  The residue at
the origin taken innermost first is then the coefficient of
v_1^-1 ... v_n^-1.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp, mpf

from .bigreal import zeta_laurent_at_one
from .errors import DomainError, PrecisionError, SingularityError, TruncationError


def _min_opt(*vals):
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


def _as_mp(c):
    if isinstance(c, Fraction):
        return mpf(c.numerator) / c.denominator
    return mpmath.mpmathify(c)


class TruncatedSeries:
    __slots__ = ("names", "terms", "degree", "caps", "vmin", "mins")

    def __init__(self, names, terms, degree, caps=None, vmin=0, mins=None):
        self.names = tuple(names)
        n = len(self.names)
        self.degree = degree
        self.caps = tuple(caps) if caps is not None else (None,) * n
        self.vmin = vmin
        self.mins = tuple(mins) if mins is not None else (0,) * n
        self.terms = {e: c for e, c in terms.items() if c != 0 and self._inside(e)}

    # --- construction ---------------------------------------------------------

    @classmethod
    def constant(cls, names, c, degree, caps=None):
        return cls(names, {(0,) * len(names): _as_mp(c)}, degree, caps)

    @classmethod
    def variable(cls, names, name, degree, caps=None):
        e = tuple(int(n == name) for n in names)
        return cls(names, {e: mpf(1)}, degree, caps)

    @classmethod
    def monomial(cls, names, exps, c, degree, caps=None):
        exps = tuple(exps)
        mins = tuple(exps)
        return cls(names, {exps: _as_mp(c)}, degree, caps, vmin=sum(exps), mins=mins)

    @classmethod
    def of_linear_form(cls, names, coeffs, form, degree, caps=None, nesting="outer"):
        """f(l) for l = sum form[i] * v_i, with f(z) = sum_j coeffs[j] z^j (j may be negative).

        ``coeffs`` is a dict j -> coefficient.  Negative powers of a form with
        several variables are expanded around the outermost variable present
        (``nesting="outer"``) or the innermost (``nesting="inner"``).
        """
        n = len(names)
        form = tuple(Fraction(c) for c in form)
        if len(form) != n:
            raise DomainError("form length must match the variables")
        support = [i for i, c in enumerate(form) if c != 0]
        if not support:
            raise DomainError("linear form must be nonzero")
        caps = tuple(caps) if caps is not None else (None,) * n
        jmin = min(j for j, c in coeffs.items() if c != 0)
        out = {}
        mins = [0] * n
        if jmin < 0:
            o = support[0] if nesting == "outer" else support[-1]
            rest = [i for i in support if i != o]
            if any(caps[i] is None for i in rest):
                raise TruncationError("negative powers of a multi-variable form need caps on its inner variables")
            nmax = sum(caps[i] for i in rest) if rest else 0
            mins[o] = None if rest else jmin
            # rho = sum_{i in rest} (c_i/c_o) v_i / v_o; powers of rho up to nmax
            rho = {}
            for i in rest:
                e = [0] * n
                e[i] = 1
                e[o] = -1
                rho[tuple(e)] = form[i] / form[o]
            rho_pows = [{(0,) * n: Fraction(1)}]
            for _ in range(nmax):
                nxt = {}
                for e1, c1 in rho_pows[-1].items():
                    for e2, c2 in rho.items():
                        e = tuple(a + b for a, b in zip(e1, e2))
                        if all(caps[i] is None or e[i] <= caps[i] for i in rest):
                            nxt[e] = nxt.get(e, 0) + c1 * c2
                rho_pows.append(nxt)
            for j in range(jmin, 0):
                cj = coeffs.get(j, 0)
                if cj == 0:
                    continue
                lead = _as_mp(cj) * _as_mp(form[o] ** j)
                for k, rk in enumerate(rho_pows):
                    b = _as_mp(Fraction(math.comb(-j + k - 1, k) * (-1) ** k))  # binom(j, k) for j < 0
                    for e, c in rk.items():
                        e2 = list(e)
                        e2[o] += j
                        e2 = tuple(e2)
                        out[e2] = out.get(e2, 0) + lead * b * _as_mp(c)
        # nonnegative powers: l^j by repeated multiplication
        power = {(0,) * n: Fraction(1)}
        for j in range(0, degree + 1 if degree is not None else 0):
            if j > 0:
                nxt = {}
                for e1, c1 in power.items():
                    for i in support:
                        e = list(e1)
                        e[i] += 1
                        e = tuple(e)
                        if caps[i] is None or e[i] <= caps[i]:
                            nxt[e] = nxt.get(e, 0) + c1 * form[i]
                power = nxt
            cj = coeffs.get(j, 0)
            if cj == 0:
                continue
            cj = _as_mp(cj)
            for e, c in power.items():
                out[e] = out.get(e, 0) + cj * _as_mp(c)
        return cls(names, out, degree, caps, vmin=min(jmin, 0), mins=mins)

    # --- bookkeeping ------------------------------------------------------------

    def _inside(self, e):
        if self.degree is not None and sum(e) > self.degree:
            return False
        return all(c is None or x <= c for x, c in zip(e, self.caps))

    def _check(self, other):
        if self.names != other.names:
            raise DomainError(f"variable mismatch: {self.names} vs {other.names}")

    def coefficient(self, exps):
        exps = tuple(exps)
        if not self._inside(exps):
            raise TruncationError(f"coefficient {exps} lies outside the known range "
                                  f"(degree <= {self.degree}, caps {self.caps})")
        return self.terms.get(exps, mpf(0))

    def truncate(self, degree):
        return TruncatedSeries(self.names, self.terms, _min_opt(self.degree, degree), self.caps, self.vmin, self.mins)

    def is_taylor(self):
        return self.vmin >= 0 and all(m is not None and m >= 0 for m in self.mins)

    def constant_term(self):
        return self.terms.get((0,) * len(self.names), mpf(0))

    def __repr__(self):
        return f"TruncatedSeries({self.names}, {len(self.terms)} terms, degree<={self.degree}, caps={self.caps})"

    # --- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self + TruncatedSeries.constant(self.names, other, self.degree, self.caps)
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        mins = tuple(None if a is None or b is None else min(a, b) for a, b in zip(self.mins, other.mins))
        caps = tuple(_min_opt(a, b) for a, b in zip(self.caps, other.caps))
        return TruncatedSeries(self.names, terms, _min_opt(self.degree, other.degree), caps,
                               min(self.vmin, other.vmin), mins)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TruncatedSeries) else -_as_mp(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = _as_mp(c)
        return TruncatedSeries(self.names, {e: c * v for e, v in self.terms.items()}, self.degree,
                               self.caps, self.vmin, self.mins)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        degs = [d for d in (None if self.degree is None else self.degree + other.vmin,
                            None if other.degree is None else other.degree + self.vmin) if d is not None]
        degree = min(degs) if degs else None
        caps = []
        for i in range(len(self.names)):
            cands = []
            for a, b in ((self, other), (other, self)):
                if a.caps[i] is not None:
                    if b.mins[i] is None:
                        raise TruncationError(f"cannot bound variable {self.names[i]} in product")
                    cands.append(a.caps[i] + b.mins[i])
            caps.append(min(cands) if cands else None)
        mins = tuple(None if a is None or b is None else a + b for a, b in zip(self.mins, other.mins))
        by_deg = {}
        for e, c in other.terms.items():
            by_deg.setdefault(sum(e), []).append((e, c))
        out = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for d2, group in by_deg.items():
                if degree is not None and d1 + d2 > degree:
                    continue
                for e2, c2 in group:
                    e = tuple(a + b for a, b in zip(e1, e2))
                    if any(cp is not None and x > cp for x, cp in zip(e, caps)):
                        continue
                    out[e] = out.get(e, 0) + c1 * c2
        return TruncatedSeries(self.names, out, degree, caps, self.vmin + other.vmin, mins)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.inverse()
        return self.scale(1 / _as_mp(other))

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = TruncatedSeries.constant(self.names, 1, self.degree, self.caps)
        for _ in range(n):
            out = out * self
        return out

    def _split_constant(self, op):
        if not self.is_taylor():
            raise SingularityError(f"{op} needs a Taylor series (no negative exponents)")
        if self.degree is None:
            raise TruncationError(f"{op} needs a finite degree bound")
        c0 = self.constant_term()
        rest = TruncatedSeries(self.names, {e: c for e, c in self.terms.items() if any(e)},
                               self.degree, self.caps, 1, self.mins)
        return c0, rest

    def _power_sum(self, rest, weights):
        """sum_n weights[n] rest**n for n = 0..degree (rest has no constant term)."""
        out = TruncatedSeries.constant(self.names, weights[0], self.degree, self.caps)
        p = TruncatedSeries.constant(self.names, 1, self.degree, self.caps)
        for n in range(1, self.degree + 1):
            p = p * rest
            if not p.terms:
                break
            out = out + p.scale(weights[n])
        out.vmin, out.mins = 0, tuple(0 for _ in self.names)
        return out

    def inverse(self):
        c0, rest = self._split_constant("inverse")
        if c0 == 0:
            raise SingularityError("series with zero constant term is not invertible")
        w = [(-1) ** n / c0 ** (n + 1) for n in range(self.degree + 1)]
        return self._power_sum(rest, w)

    def exp(self):
        c0, rest = self._split_constant("exp")
        e0 = mpmath.exp(c0)
        w = [e0 / math.factorial(n) for n in range(self.degree + 1)]
        return self._power_sum(rest, w)

    def log(self):
        c0, rest = self._split_constant("log")
        if c0 <= 0:
            raise DomainError("log needs a positive constant term")
        w = [mpmath.log(c0)] + [mpf((-1) ** (n + 1)) / (n * c0**n) for n in range(1, self.degree + 1)]
        return self._power_sum(rest, w)

    def substitute(self, names, forms, caps=None):
        """Replace variable i by the linear form forms[i] (coefficients over ``names``)."""
        if not self.is_taylor():
            raise DomainError("substitution is supported for Taylor series only")
        n = len(names)
        lin = [TruncatedSeries.of_linear_form(names, {1: 1}, f, self.degree, caps) for f in forms]
        powers = [[TruncatedSeries.constant(names, 1, self.degree, caps)] for _ in forms]
        out = TruncatedSeries(names, {}, self.degree, caps)
        for e, c in self.terms.items():
            term = TruncatedSeries.constant(names, c, self.degree, caps)
            for i, k in enumerate(e):
                while len(powers[i]) <= k:
                    powers[i].append(powers[i][-1] * lin[i])
                term = term * powers[i][k]
            out = out + term
        out.vmin, out.mins = 0, (0,) * n
        return out


# --- zeta and X-power factors ---------------------------------------------------


def zeta_laurent(names, form, degree, caps=None, digits=90, nesting="outer"):
    """zeta(1 + l) for the linear form l, as a truncated Laurent series."""
    c = zeta_laurent_at_one(max(degree + 1, 0), digits)
    coeffs = {-1: 1}
    coeffs.update({j: cj for j, cj in enumerate(c)})
    return TruncatedSeries.of_linear_form(names, coeffs, form, degree, caps, nesting)


def taylor_of_linear_form(names, coeffs, form, degree, caps=None):
    """f(l) for f given by Taylor coefficients coeffs[0], coeffs[1], ..."""
    return TruncatedSeries.of_linear_form(names, dict(enumerate(coeffs)), form, degree, caps)


def reciprocal_shifted(names, a, form, degree, caps=None):
    """1/(a + l) expanded as a power series in l (a != 0)."""
    a = _as_mp(a)
    return taylor_of_linear_form(names, [(-1) ** j / a ** (j + 1) for j in range(degree + 2)], form, degree, caps)


@dataclass(frozen=True)
class XPower:
    """X**(base + sum form[i] v_i) = X**base * exp(L * sum form[i] v_i), L = log X."""

    base: Fraction
    form: tuple

    def coefficient(self, b):
        """(j, c): the coefficient of v**b is c * L**j."""
        if any(x < 0 for x in b):
            return 0, mpf(0)
        c = mpf(1)
        for x, f in zip(b, self.form):
            if x:
                c *= _as_mp(Fraction(f) ** x) / math.factorial(x)
        return sum(b), c

    def series(self, names, L, degree, caps=None):
        """Numeric specialisation (without the X**base factor)."""
        lin = [Fraction(f) for f in self.form]
        return taylor_of_linear_form(names, [mpmath.power(L, j) / math.factorial(j) for j in range(degree + 2)],
                                     lin, degree, caps)


def x_power(base, form):
    return XPower(Fraction(base), tuple(Fraction(f) for f in form))


# --- residues -------------------------------------------------------------------


@dataclass(frozen=True)
class LogPolynomial:
    """X**power * sum_j coeffs[j] (log X)**j."""

    coeffs: tuple
    digits: int = 90
    power: Fraction = Fraction(1)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, X):
        L = mpmath.log(X)
        return mpmath.power(X, _as_mp(self.power)) * mpmath.polyval(list(reversed(self.coeffs)), L)

    def __add__(self, other):
        if self.power != other.power:
            raise DomainError("cannot add polynomials with different X powers")
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [mpf(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [mpf(0)] * (n - len(other.coeffs))
        return LogPolynomial(tuple(x + y for x, y in zip(a, b)), min(self.digits, other.digits), self.power)

    def scale(self, c):
        c = _as_mp(c)
        return LogPolynomial(tuple(c * x for x in self.coeffs), self.digits, self.power)

    def coefficient_strings(self, digits=None):
        d = digits or self.digits
        return [mpmath.nstr(c, d, strip_zeros=False, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)
                for c in self.coeffs]

    def to_json(self):
        return {"degree": self.degree, "coefficients": self.coefficient_strings(), "log_base": "natural"}


def iterated_residue(G, xpower=None, digits=90):
    """Residue at the origin (innermost variable first) of G * X**xpower.

    Returns the LogPolynomial sum_j c_j L**j multiplying X**base.  Without an
    X-power factor this is the plain coefficient of v_1^-1 ... v_n^-1.
    """
    n = len(G.names)
    target = (-1,) * n
    if G.degree is not None and G.degree < -n:
        raise TruncationError(f"series known only to degree {G.degree}; residue needs {-n}")
    if any(c is not None and c < -1 for c in G.caps):
        raise TruncationError(f"caps {G.caps} do not reach the residue exponent")
    if xpower is None:
        return LogPolynomial((G.terms.get(target, mpf(0)),), digits, Fraction(0))
    coeffs = {}
    for e, c in G.terms.items():
        b = tuple(t - x for t, x in zip(target, e))
        if any(x < 0 for x in b):
            continue
        j, xc = xpower.coefficient(b)
        coeffs[j] = coeffs.get(j, 0) + c * xc
    # the top power L^j needs G down to degree -n - j, which G always carries when
    # vmin is finite; check that nothing was cut at the low end
    if G.vmin is None:
        raise TruncationError("series has unbounded negative degree")
    top = max(coeffs) if coeffs else 0
    return LogPolynomial(tuple(coeffs.get(j, mpf(0)) for j in range(top + 1)), digits, xpower.base)


def contour_residue_validate(F, radii, nodes=64, digits=40, max_nodes=1024):
    """Iterated trapezoidal contour integral (1/(2 pi i))^n oint ... oint F.

    ``radii`` are listed outermost variable first and must strictly decrease.
    Node counts double from ``nodes`` until two successive results agree to
    ``digits`` digits; otherwise PrecisionError is raised.
    """
    radii = [mpf(r) for r in radii]
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must strictly decrease from outer to inner")
    prev = None
    N = nodes
    while N <= max_nodes:
        val = _trapezoid(F, radii, N)
        if prev is not None and abs(val - prev) <= mpf(10) ** (-digits) * max(1, abs(val)):
            return val
        prev = val
        N *= 2
    raise PrecisionError(f"contour quadrature did not converge with {max_nodes} nodes", required=2 * max_nodes)


def _trapezoid(F, radii, N):
    pts = [[r * mpmath.expjpi(mpf(2 * k) / N) for k in range(N)] for r in radii]

    def rec(level, args):
        if level == len(radii):
            return F(*args)
        total = 0
        for z in pts[level]:
            total += rec(level + 1, args + (z,)) * z
        return total / N

    return rec(0, ())
