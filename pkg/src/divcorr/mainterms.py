"""Constants and main-term polynomials for the divisor correlations.

Main terms are residues of products of zeta factors, X-powers and an Euler
product.  Euler products that depend on several complex variables are handled
by :func:`euler_log_series`, which returns the Taylor expansion of

    sum_p log( F_p ) ,   F_p = N(1/p, p^-l_1(v), ..., p^-l_r(v)) / (1 - 1/p)^r0

around v = 0.  Primes p <= 50 are expanded directly in floating multiprecision
series arithmetic.  For the remaining primes, log F_p is expanded in x = 1/p
with exact-rational coefficients that are themselves Taylor polynomials in v
(each p^-l(v) becomes exp(-l(v) log p)); the monomial v^a of total degree m
comes with log(p)^m, so the tail is a finite combination of
T_m(N) = sum_{p > 50} log(p)^m p^-N.
"""

import math
from fractions import Fraction
from functools import lru_cache
from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf

from .arith import euler_phi, factorize, primes_upto, sigma_minus_one
from .bigreal import (
    BigReal,
    DEFAULT_DIGITS,
    MAX_EXCLUDE,
    PrimeExpansion,
    _next_prime,
    euler_product,
    euler_sum,
    prime_log_power_sum,
    stieltjes,
    work_dps,
)
from .errors import DomainError, PrecisionError, TruncationError
from .series import (
    LogPolynomial,
    TruncatedSeries,
    iterated_residue,
    reciprocal_shifted,
    taylor_of_linear_form,
    x_power,
    zeta_laurent,
)

SERIES_DEGREE = 5   # Taylor order kept for Euler factors (4 needed + 1 sentinel)
FACTOR_DEGREE = 8   # order for the zeta / reciprocal factors before multiplication
_TAIL_NMAX = 400


def _mpq(fr):
    fr = Fraction(fr)
    return mpf(fr.numerator) / fr.denominator


def _nu(h):
    if h < 1:
        raise DomainError("shift h must be a positive integer")
    return factorize(h) if h > 1 else ()


# --------------------------------------------------------------------------------------
# exact polynomials in x with truncated-series coefficients
# --------------------------------------------------------------------------------------


class _XPoly:
    """sum_n c_n(v) x^n, each c_n an exact Taylor polynomial (dict exps -> Fraction)."""

    __slots__ = ("c", "nv", "deg")

    def __init__(self, c, nv, deg):
        self.c, self.nv, self.deg = c, nv, deg

    @classmethod
    def scalar(cls, a, nv, deg):
        return cls([{(0,) * nv: Fraction(a)}], nv, deg)

    def _lift(self, other):
        return other if isinstance(other, _XPoly) else _XPoly.scalar(other, self.nv, self.deg)

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.c), len(other.c))
        out = []
        for i in range(n):
            d = dict(self.c[i]) if i < len(self.c) else {}
            if i < len(other.c):
                for e, v in other.c[i].items():
                    d[e] = d.get(e, 0) + v
            out.append({e: v for e, v in d.items() if v != 0})
        return _XPoly(out, self.nv, self.deg)

    __radd__ = __add__

    def __neg__(self):
        return _XPoly([{e: -v for e, v in d.items()} for d in self.c], self.nv, self.deg)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        out = [dict() for _ in range(len(self.c) + len(other.c) - 1)]
        for i, a in enumerate(self.c):
            for j, b in enumerate(other.c):
                _dict_mul_into(out[i + j], a, b, self.deg)
        return _XPoly([{e: v for e, v in d.items() if v != 0} for d in out], self.nv, self.deg)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = _XPoly.scalar(1, self.nv, self.deg)
        for _ in range(n):
            out = out * self
        return out


def _dict_mul_into(out, a, b, deg):
    for e1, c1 in a.items():
        s1 = sum(e1)
        for e2, c2 in b.items():
            if s1 + sum(e2) > deg:
                continue
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2


def _exact_exp_neg(form, nv, deg):
    """exp(-sum form_i v_i) as an exact truncated Taylor polynomial."""
    out = {(0,) * nv: Fraction(1)}
    for i, f in enumerate(form):
        f = Fraction(f)
        if f == 0:
            continue
        uni = {}
        for m in range(deg + 1):
            e = [0] * nv
            e[i] = m
            uni[tuple(e)] = (-f) ** m / math.factorial(m)
        nxt = {}
        _dict_mul_into(nxt, out, uni, deg)
        out = nxt
    return out


@dataclass(frozen=True)
class EulerLogSeries:
    """Taylor series of sum_p log F_p around v = 0, with bookkeeping of the prime tail."""

    series: TruncatedSeries
    tail_terms: int
    exclude_upto: int
    digits: int

    def product(self):
        with mp.workdps(work_dps(self.digits)):
            return self.series.exp()


def euler_log_series(names, forms, factor, den_power=0, degree=SERIES_DEGREE, digits=DEFAULT_DIGITS,
                     exclude_upto=MAX_EXCLUDE):
    """Taylor series of sum_p log( factor(x, a_1, ..., a_r) / (1 - x)^den_power ).

    ``factor`` receives x = 1/p and a_i = p^(-forms[i] . v) and must be written
    with ring operations only (it is evaluated both on multiprecision series and
    on exact polynomials in x).  factor(0, ...) must be 1.
    """
    nv = len(names)
    with mp.workdps(work_dps(digits)):
        # exact log-expansion in x for the primes above exclude_upto
        xs = _XPoly([{}, {(0,) * nv: Fraction(1)}], nv, degree)
        alphas = [_XPoly([_exact_exp_neg(f, nv, degree)], nv, degree) for f in forms]
        num = factor(xs, *alphas).c
        while num and not num[-1]:
            num.pop()
        if num[0] != {(0,) * nv: Fraction(1)}:
            raise DomainError("local factor must equal 1 at x = 0")
        q1 = _next_prime(exclude_upto)
        lq = math.log(q1)
        target = 10.0 ** (-digits - 4)
        M = [None]
        tail = {}
        weights = []
        used = None
        for n in range(1, _TAIL_NMAX + 1):
            v = {e: n * c for e, c in num[n].items()} if n < len(num) else {}
            for k in range(max(1, n - len(num) + 1), n):
                prod = {}
                _dict_mul_into(prod, M[k], num[n - k], degree)
                for e, c in prod.items():
                    v[e] = v.get(e, 0) - c
            v = {e: c for e, c in v.items() if c != 0}
            M.append(v)
            Ln = {e: c / n for e, c in v.items()}
            if den_power:
                z = (0,) * nv
                Ln[z] = Ln.get(z, 0) + Fraction(den_power, n)
            Ln = {e: c for e, c in Ln.items() if c != 0}
            w = sum(float(abs(c)) * lq ** sum(e) for e, c in Ln.items())
            weights.append((n, w))
            if n == 1 and Ln:
                raise DomainError("log of the local factor has a 1/p term; the product diverges")
            for e, c in Ln.items():
                tail[e] = tail.get(e, 0) + _mpq(c) * prime_log_power_sum(sum(e), n, exclude_upto, digits)
            if n >= 12:
                recent = [(k, x) for k, x in weights[n // 2:] if x > 0]
                rho = 1.05 * max((math.exp(math.log(x) / k) for k, x in recent), default=0.0)
                r = rho / q1
                if r < 1 and 4 * w * q1 ** (-n) / (1 - r) < target:
                    used = n
                    break
        if used is None:
            raise PrecisionError(f"prime tail of the Euler factor needs more than {_TAIL_NMAX} terms",
                                 required=2 * _TAIL_NMAX)
        logs = TruncatedSeries(names, tail, degree)
        for p in primes_upto(exclude_upto).tolist():
            lp = mpmath.log(p)
            x = mpf(1) / p
            al = [taylor_of_linear_form(names, [(-lp) ** j / math.factorial(j)
                                                 for j in range(degree + 2)], f, degree) for f in forms]
            loc = factor(x, *al)
            if den_power:
                loc = loc / (1 - x) ** den_power
            logs = logs + loc.log()
        return EulerLogSeries(logs, used, exclude_upto, digits)


# local factors -----------------------------------------------------------------------


def _h_factor(x, c, a, b):
    """(1-a)(1-b) + (1-c)^3 (a+b-ab) p/(p-1) times (1 - x), with a = x*alpha etc."""
    return (1 - x * a) * (1 - x * b) * (1 - x) + (1 - x * c) ** 3 * x * (a + b - x * a * b)


def _bb_factor(x, c, b):
    """BB_p(1+u; w) times (1 - x): (1 - p^-1-w)(1 - x) + (1 - p^-1-u)^2 p^-1-w."""
    return (1 - x * b) * (1 - x) + (1 - x * c) ** 2 * x * b


def _delta_factor(x, a, b):
    """(1 - G(s)G(w)) times (1 - x)^2, with G(s) = 1 - (1 - p^-1-s)^3 p/(p-1)."""
    return (1 - x) ** 2 - ((1 - x) - (1 - x * a) ** 3) * ((1 - x) - (1 - x * b) ** 3)


@lru_cache(maxsize=8)
def h_series(digits=DEFAULT_DIGITS, degree=SERIES_DEGREE):
    """H(u, y, z): the Euler product shared by the three M_{3,3} residue terms."""
    names = ("u", "y", "z")
    return euler_log_series(names, [(1, 0, 0), (0, 1, 0), (0, 0, 1)], _h_factor, 1, degree, digits).product()


@lru_cache(maxsize=8)
def bb_log_series(digits=DEFAULT_DIGITS, degree=4):
    """sum_p log BB_p(1+u; w) as a series in (u, w)."""
    return euler_log_series(("u", "w"), [(1, 0), (0, 1)], _bb_factor, 1, degree, digits).series


@lru_cache(maxsize=8)
def delta_series(digits=DEFAULT_DIGITS, degree=SERIES_DEGREE):
    """A(s, w) = prod_p (1 - G_3(s+1,p) G_3(w+1,p) / p^(s+w+2)) as a series in (s, w)."""
    return euler_log_series(("s", "w"), [(1, 0), (0, 1)], _delta_factor, 2, degree, digits).product()


# --------------------------------------------------------------------------------------
# C_{k,l}
# --------------------------------------------------------------------------------------


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_add(*ps):
    n = max(len(p) for p in ps)
    out = [Fraction(0)] * n
    for p in ps:
        for i, x in enumerate(p):
            out[i] += x
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _one_minus_x_pow(n):
    return [Fraction((-1) ** j * math.comb(n, j)) for j in range(n + 1)]


def ckl_factor_polynomial(k, ell):
    """(1-x)^(k-1) + (1-x)^(l-1) - (1-x)^(k+l-2), coefficients in x = 1/p."""
    return _poly_add(_one_minus_x_pow(k - 1), _one_minus_x_pow(ell - 1),
                     [-c for c in _one_minus_x_pow(k + ell - 2)])


def ckl_binomial_polynomial(k, ell):
    """(1-x)^(k-1) (1 + (1-x)^(l-1) sum_j binom(k-1, j) (p-1)^-j), cleared of denominators.

    With 1/(p-1) = x/(1-x) the j-th term is binom(k-1,j) x^j (1-x)^(k+l-2-j).
    """
    parts = [_one_minus_x_pow(k - 1)]
    for j in range(1, k):
        parts.append(_poly_mul([Fraction(0)] * j + [Fraction(math.comb(k - 1, j))],
                               _one_minus_x_pow(k + ell - 2 - j)))
    return _poly_add(*parts)


@dataclass(frozen=True)
class SingularConstant:
    k: int
    ell: int
    value: BigReal
    alternate: BigReal

    def to_json(self):
        return {"k": self.k, "ell": self.ell, **self.value.to_json(f"C_{self.k},{self.ell}")}


@lru_cache(maxsize=64)
def C_kl(k, ell, digits=DEFAULT_DIGITS):
    """The constant prod_p ((1-1/p)^(k-1) + (1-1/p)^(l-1) - (1-1/p)^(k+l-2)).

    ``alternate`` holds the same product computed from the binomial-sum form of
    the local factor; the two agree to working precision.
    """
    if not (2 <= k <= 6 and 2 <= ell <= 6):
        raise DomainError("C_kl supports 2 <= k, l <= 6")
    a = euler_product(ckl_factor_polynomial(k, ell), [1], digits)
    b = euler_product(ckl_binomial_polynomial(k, ell), [1], digits)
    return SingularConstant(k, ell, a.as_bigreal(), b.as_bigreal())


# --------------------------------------------------------------------------------------
# f_{k,l}(h)
# --------------------------------------------------------------------------------------


def _geom_binom_tail(a, b, x):
    """sum_{r >= 1} binom(r + a, b) x^r for a >= b >= 0, exactly."""
    head = sum((Fraction(math.comb(m, b)) * x**m for m in range(b, a + 1)), Fraction(0))
    return (x**b / (1 - x) ** (b + 1) - head) / x**a


def local_ratio_general(k, ell, p, nu):
    """A_p(1; 0; h) / B_p(1; 0) for p^nu || h, exact, from the Dirichlet-series definition.

    A_p / zeta^l = sum_J binom(J+k-2, k-2) p^-min(J,nu) / phi(p^(J-min(J,nu))) R_J, where
    R_J is the local factor of sum_n tau_l(n p^min(J,nu)) n^-s (coprime to p when J > nu)
    divided by zeta^l, at s = 1.
    """
    x = Fraction(1, p)
    one_x = 1 - x
    A = Fraction(0)
    for J in range(nu + 1):
        partial = sum((Fraction(math.comb(t + ell - 1, ell - 1)) * x**t for t in range(J)), Fraction(0))
        A += math.comb(J + k - 2, k - 2) * (1 - one_x**ell * partial)
    tau_l = math.comb(nu + ell - 1, ell - 1)
    if k >= 2:
        A += x**nu * tau_l * one_x ** (ell - 1) * _geom_binom_tail(nu + k - 2, k - 2, x)
    B = 1 + one_x ** (ell - 1) * sum((Fraction(math.comb(k - 1, j)) * (x / one_x) ** j for j in range(1, k)),
                                     Fraction(0))
    return A / B


def local_ratio_closed(k, ell, p, nu):
    """Closed forms of the local ratio for k = 3, l = 3, 4, 5 (and k = l = 2)."""
    p, n = Fraction(p), nu
    q = p**nu
    if (k, ell) == (2, 2):
        return (p * q - 1) / (q * (p - 1))
    if (k, ell) == (3, 3):
        num = (-n**2 * (p - 1) ** 2 * (p + 1) + q * p**2 + 4 * q * p**3 + q * p**4
               + n * (-4 * p**3 + 6 * p - 2) - 4 * p**3 - 5 * p**2 + 4 * p - 1)
        return num / (q * (p - 1) ** 2 * (p**2 + 2 * p - 1))
    if (k, ell) == (3, 4):
        # re-derived: the printed variant (see f34_printed) is not 1 at nu = 0
        num = (-n**3 * (p + 1) * (p - 1) ** 3 - n**2 * (7 * p**2 + 6 * p - 4) * (p - 1) ** 2
               + n * (-16 * p**4 + 33 * p**2 - 22 * p + 5)
               + 2 * (3 * q * p**3 + 6 * q * p**4 + q * p**5 - 6 * p**4 - 9 * p**3 + 9 * p**2 - 5 * p + 1))
        return num / (2 * q * (p - 1) ** 2 * (p**3 + 2 * p**2 - 3 * p + 1))
    if (k, ell) == (3, 5):
        num = (-n**4 * (p + 1) * (p - 1) ** 4 - n**3 * (11 * p**2 + 8 * p - 7) * (p - 1) ** 3
               - n**2 * (44 * p**3 + 31 * p**2 - 50 * p + 17) * (p - 1) ** 2
               - n * (76 * p**5 + p**4 - 200 * p**3 + 200 * p**2 - 94 * p + 17)
               + 6 * (6 * q * p**4 + 8 * q * p**5 + q * p**6 - 8 * p**5 - 14 * p**4 + 16 * p**3
                      - 14 * p**2 + 6 * p - 1))
        return num / (6 * q * (p - 1) ** 2 * (p**4 + 2 * p**3 - 5 * p**2 + 4 * p - 1))
    raise DomainError(f"no closed form for (k, l) = ({k}, {ell})")


def f34_printed(p, nu):
    """The (3, 4) local factor as printed; kept only to document that it disagrees."""
    p, n = Fraction(p), nu
    q = p**nu
    num = p * (-n**3 * (p + 1) * (p - 1) ** 3 - n**2 * (7 * p**2 + 6 * p - 4) * (p - 1) ** 2
               + n * (-16 * p**4 + 33 * p**2 - 22 * p + 5)
               + 2 * (-q * p**2 + 5 * q * p**3 + 5 * q * p**4 + q * p**5 - 6 * p**4 - 9 * p**3
                      + 9 * p**2 - 5 * p + 1))
    return num / (2 * q * (p - 1) ** 3 * (p**3 + 2 * p**2 - 3 * p + 1))


def f33_prime(h):
    """(h^3 + 6h^2 + 3h - 4) / (h (h^2 + 2h - 1)), the prime-shift value."""
    h = Fraction(h)
    return (h**3 + 6 * h**2 + 3 * h - 4) / (h * (h**2 + 2 * h - 1))


CLOSED_FORMS = {(2, 2), (3, 3), (3, 4), (3, 5)}


@dataclass(frozen=True)
class LocalFactorValue:
    k: int
    ell: int
    h: int
    exact: Fraction
    value: BigReal
    factors: tuple  # (p, nu_p(h), Fraction)

    CSV_HEADER = "p,nu,factor"

    def csv_rows(self, digits=30):
        with mp.workdps(digits + 5):
            return [f"{p},{nu},{mpmath.nstr(_mpq(f), digits)}" for p, nu, f in self.factors]


def f_kl_h(k, ell, h, digits=DEFAULT_DIGITS, method="auto"):
    """f_{k,l}(h) = prod_{p | h} A_p(1; 0; h) / B_p(1; 0), exactly.

    ``method`` is "closed" (the closed forms, k = 3 and l in {3, 4, 5}, or k = l = 2),
    "general" (the Dirichlet-series definition), or "auto" (closed when available).
    """
    if not (2 <= k <= 6 and 2 <= ell <= 6):
        raise DomainError("f_kl_h supports 2 <= k, l <= 6")
    if method == "auto":
        method = "closed" if (k, ell) in CLOSED_FORMS else "general"
    if method == "closed" and (k, ell) not in CLOSED_FORMS:
        raise DomainError(f"no closed form for (k, l) = ({k}, {ell})")
    fn = local_ratio_closed if method == "closed" else local_ratio_general
    factors = tuple((p, nu, fn(k, ell, p, nu)) for p, nu in _nu(h))
    exact = math.prod((f for _, _, f in factors), start=Fraction(1))
    with mp.workdps(work_dps(digits)):
        val = BigReal(+_mpq(exact), digits)
    return LocalFactorValue(k, ell, h, exact, val, factors)


# --------------------------------------------------------------------------------------
# M_{2,2}
# --------------------------------------------------------------------------------------


def singular_series_22(h, digits=DEFAULT_DIGITS):
    """(sigma_{-1}(h) exactly, 6/pi^2 sigma_{-1}(h))."""
    s = sigma_minus_one(h) if h > 1 else Fraction(1)
    with mp.workdps(work_dps(digits)):
        return s, BigReal(6 / mpmath.pi**2 * _mpq(s), digits)


def a22_local_series(p, nu, names=("u", "w"), degree=4):
    """log(A_p(1+u; w; h) / B_p(1+u; w)) for k = l = 2 and p^nu || h.

    A_p / zeta^2 = sum_{j <= nu} p^(-j(s+w)) (1 + j(1 - p^-s))
                   + (nu+1) (1-p^-s)^2/(1-1/p) p^(-nu(s+w)) / (p^(w+1) - 1),
    B_p / zeta^2 = 1 + (1-p^-s)^2/(1-1/p) / (p^(w+1) - 1).
    """
    lp = mpmath.log(p)
    x = mpf(1) / p
    ex = [(-lp) ** j / math.factorial(j) for j in range(degree + 2)]
    ps = taylor_of_linear_form(names, ex, (1, 0), degree).scale(x)      # p^-s
    pw = taylor_of_linear_form(names, ex, (0, 1), degree)               # p^-w
    y = ps * pw
    geo = (pw.scale(x)) / (1 - pw.scale(x))                             # 1/(p^(w+1) - 1)
    one = TruncatedSeries.constant(names, 1, degree)
    A = TruncatedSeries(names, {}, degree)
    yj = one
    for j in range(nu + 1):
        A = A + yj * (1 + (1 - ps).scale(j))
        if j < nu:
            yj = yj * y
    A = A + (1 - ps) ** 2 * yj * geo * ((nu + 1) / (1 - x))
    B = 1 + (1 - ps) ** 2 * geo * (1 / (1 - x))
    return A.log() - B.log()


@lru_cache(maxsize=64)
def f_h_series(h, digits=DEFAULT_DIGITS, degree=4):
    """f_h(1+u; w) as a Taylor series in (u, w)."""
    with mp.workdps(work_dps(digits)):
        logf = bb_log_series(digits, degree)
        for p, nu in _nu(h):
            logf = logf + a22_local_series(p, nu, degree=degree)
        return logf.exp()


def f_h_derivatives(h, digits=DEFAULT_DIGITS):
    """f_h and its derivatives (1,0), (0,1), (1,1) at (s, w) = (1, 0)."""
    F = f_h_series(h, digits)
    return {"f": F.coefficient((0, 0)), "f10": F.coefficient((1, 0)),
            "f01": F.coefficient((0, 1)), "f11": F.coefficient((1, 1))}


def m22_from_derivatives(d, gamma):
    """(c_0, c_1, c_2) from f_h, f^(1,0), f^(0,1), f^(1,1) and Euler's constant."""
    f, f10, f01, f11 = d["f"], d["f10"], d["f01"], d["f11"]
    c2 = f
    c1 = (4 * gamma - 2) * f + 2 * f01 + f10
    c0 = 2 * (-f01 + gamma * (2 * f01 + f10 - f) + f11 + 2 * gamma**2 * f) - f10 - 2 * (gamma - 1) * f
    return c0, c1, c2


@lru_cache(maxsize=64)
def m22_coefficients(h=1, digits=DEFAULT_DIGITS):
    """X (c_2 log^2 X + c_1 log X + c_0): the main term of sum_{n <= X} tau(n) tau(n+h).

    Computed as 2 Res_{s=1, w=0} - Res_{s=1, w=1} of the Perron integrand, with
    the moving pole of the second term written as w = s + v.
    """
    with mp.workdps(work_dps(digits)):
        F = f_h_series(h, digits)
        deg = FACTOR_DEGREE
        n1 = ("u", "w")
        z2 = zeta_laurent(n1, (1, 0), deg, digits=digits) ** 2
        inv_s = reciprocal_shifted(n1, 1, (1, 0), deg)
        t1 = z2 * inv_s * TruncatedSeries.monomial(n1, (0, -1), 1, deg) * zeta_laurent(n1, (0, 1), deg, digits=digits) * F
        r1 = iterated_residue(t1, x_power(1, (1, Fraction(1, 2))), digits)
        # second term: w = s + v, f_h(s; w - s) = F(u, v)
        t2 = z2 * inv_s * reciprocal_shifted(n1, 1, (1, 1), deg) * zeta_laurent(n1, (0, 1), deg, digits=digits) * F
        r2 = iterated_residue(t2, x_power(1, (1, Fraction(1, 2))), digits)
        poly = r1.scale(2) + r2.scale(-1)
        coeffs = tuple(+c for c in poly.coeffs)
    if len(coeffs) != 3:
        raise TruncationError(f"M22 residue produced degree {len(coeffs) - 1}, expected 2")
    return LogPolynomial(coeffs, digits)


def m22_eval(X, h=1, digits=DEFAULT_DIGITS):
    poly = m22_coefficients(h, digits)
    with mp.workdps(work_dps(digits)):
        return BigReal(+poly(mpf(X)), digits)


# --------------------------------------------------------------------------------------
# M_{3,3}
# --------------------------------------------------------------------------------------


@lru_cache(maxsize=8)
def m33_coefficients(digits=DEFAULT_DIGITS):
    """Degree-4 polynomial P with M_{3,3}(X, 1) = X P(log X).

    Three residue terms share the Euler product H(u, y, z) (s = 1 + u):
      3 Res  X^(1+u+v1/3+2v2/3) / ((1+u) v1 v2)          zeta^3(1+u) zeta(1+v1+v2) zeta(1+v2) H(u, v1+v2, v2)
     -3 Res  X^(1+u+v1/3+2v2/3) / ((1+u) v1 (1+u+v2))    (same zeta and H factors)
      + Res  X^(1+u+(v1+v2)/3) / ((1+u)(1+u+v1)(1+u+v2)) zeta^3(1+u) zeta(1+v1) zeta(1+v2) H(u, v1, v2)
    with residues taken innermost first (v2, v1, u).
    """
    with mp.workdps(work_dps(digits)):
        H = h_series(digits)
        names = ("u", "v1", "v2")
        H1 = H.substitute(names, [(1, 0, 0), (0, 1, 1), (0, 0, 1)])
        H3 = H.substitute(names, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
        deg = FACTOR_DEGREE
        caps = (None, None, 6)
        zu = zeta_laurent(names, (1, 0, 0), deg, digits=digits)
        common = zu * zu * zu * reciprocal_shifted(names, 1, (1, 0, 0), deg)
        zv1v2 = zeta_laurent(names, (0, 1, 1), deg, caps=caps, digits=digits)
        zv2 = zeta_laurent(names, (0, 0, 1), deg, digits=digits)
        zv1 = zeta_laurent(names, (0, 1, 0), deg, digits=digits)
        iv1 = TruncatedSeries.monomial(names, (0, -1, 0), 1, deg)
        iv2 = TruncatedSeries.monomial(names, (0, 0, -1), 1, deg)
        shared = common * iv1 * zv1v2 * zv2 * H1
        t1 = shared * iv2
        t2 = shared * reciprocal_shifted(names, 1, (1, 0, 1), deg)
        t3 = (common * reciprocal_shifted(names, 1, (1, 1, 0), deg) * reciprocal_shifted(names, 1, (1, 0, 1), deg)
              * zv1 * zv2 * H3)
        X12 = x_power(1, (1, Fraction(1, 3), Fraction(2, 3)))
        X3 = x_power(1, (1, Fraction(1, 3), Fraction(1, 3)))
        terms = []
        for label, t, xp in (("first", t1, X12), ("second", t2, X12), ("third", t3, X3)):
            try:
                terms.append(iterated_residue(t, xp, digits))
            except TruncationError as exc:
                raise TruncationError(f"{label} residue term: {exc}") from exc
        poly = terms[0].scale(3) + terms[1].scale(-3) + terms[2]
        coeffs = tuple(+c for c in poly.coeffs)
    if len(coeffs) != 5:
        raise TruncationError(f"M33 residue produced degree {len(coeffs) - 1}, expected 4")
    return LogPolynomial(coeffs, digits)


def m33_eval(X, digits=DEFAULT_DIGITS):
    poly = m33_coefficients(digits)
    with mp.workdps(work_dps(digits)):
        return BigReal(+poly(mpf(X)), digits)


# --------------------------------------------------------------------------------------
# delta method
# --------------------------------------------------------------------------------------

# sums over primes of log(p)^m R(1/p), R = num/den in x = 1/p
_DEN = [1, 1, -3, 1]          # (p^3 + p^2 - 3p + 1) / p^3


def _den_power(n):
    out = [Fraction(1)]
    for _ in range(n):
        out = _poly_mul(out, [Fraction(c) for c in _DEN])
    return out


DELTA_SUMS = {
    # name: (numerator in x, power of the denominator, log weight)
    "sump": ([0, 0, 6, -3], 1, 1),
    "S2": ([0, 0, 9], 2, 2),
    "S3": ([0, 0, 6, -9, -3, 3], 2, 2),
    "S4": ([0, 0, 9, -9, 45, -27], 3, 3),
    "S5": ([0, 0, 9, -18, 261, -144, 279, -270, 81], 4, 4),
}


@lru_cache(maxsize=8)
def productp(digits=DEFAULT_DIGITS):
    """prod_p (1 - 4/p^2 + 4/p^3 - 1/p^4)."""
    return euler_product([1, 0, -4, 4, -1], [1], digits).as_bigreal()


@lru_cache(maxsize=32)
def delta_prime_sum(name, digits=DEFAULT_DIGITS):
    num, power, m = DELTA_SUMS[name]
    exp = PrimeExpansion.from_rational([Fraction(c) for c in num], _den_power(power), m, MAX_EXCLUDE)
    return euler_sum(exp, digits).as_bigreal()


@lru_cache(maxsize=8)
def delta_constants(digits=DEFAULT_DIGITS):
    """A(0,0) and the derivatives A^(1,0), A^(1,1), A^(2,0), A^(2,1), A^(2,2) at (0,0).

    With l = log A, the prime sums are the derivatives of l at the origin:
    l_s = sump, l_sw = -S2, l_ss = -S3, l_ssw = S4, l_ssww = -S5.  The derivatives
    of A = A(0,0) exp(l) follow by exponentiating the Taylor polynomial of l.
    """
    A = productp(digits).value
    s1, s2, s3, s4, s5 = (delta_prime_sum(n, digits).value for n in ("sump", "S2", "S3", "S4", "S5"))
    with mp.workdps(work_dps(digits)):
        names = ("s", "w")
        ell = TruncatedSeries(names, {(1, 0): s1, (0, 1): s1, (1, 1): -s2, (2, 0): -s3 / 2, (0, 2): -s3 / 2,
                                      (2, 1): s4 / 2, (1, 2): s4 / 2, (2, 2): -s5 / 4}, 4, caps=(2, 2))
        E = ell.exp()
        vals = {"A00": A}
        for key, (a, b) in (("A10", (1, 0)), ("A11", (1, 1)), ("A20", (2, 0)), ("A21", (2, 1)), ("A22", (2, 2))):
            vals[key] = A * E.coefficient((a, b)) * math.factorial(a) * math.factorial(b)
        return {k: BigReal(+v, digits) for k, v in vals.items()}


def a22_printed_combination(digits=DEFAULT_DIGITS):
    """A^(1,2) sump - 2 A^(1,1) S2 + A^(1,0) (S3 + 2 S4) - A^(0,2) S3 - A(0,0) S5.

    This is the printed expression for A^(2,2)(0,0).  It omits products such as
    l_ss l_ww and is not the mixed derivative; kept to show where -1.67079... comes from.
    """
    c = delta_constants(digits)
    s1, s2, s3, s4, s5 = (delta_prime_sum(n, digits).value for n in ("sump", "S2", "S3", "S4", "S5"))
    with mp.workdps(work_dps(digits)):
        v = (c["A21"].value * s1 - 2 * c["A11"].value * s2 + c["A10"].value * (s3 + 2 * s4)
             - c["A20"].value * s3 - c["A00"].value * s5)
        return BigReal(+v, digits)


def _zeta_cube_taylor(digits):
    """Coefficients of s^3 zeta^3(1+s): 1, 3 gamma, 3 gamma^2 - 3 gamma_1."""
    g, g1 = stieltjes(0, digits), stieltjes(1, digits)
    return [mpf(1), 3 * g, 3 * g**2 - 3 * g1]


def integrate_log_polynomial(poly):
    """Antiderivative of sum_j c_j log^j u as X sum_i d_i log^i X (constant dropped)."""
    n = len(poly.coeffs)
    out = [mpf(0)] * n
    for j, c in enumerate(poly.coeffs):
        for i in range(j + 1):
            out[i] += c * (-1) ** (j - i) * mpf(math.factorial(j)) / math.factorial(i)
    return LogPolynomial(tuple(out), poly.digits, Fraction(1))


@lru_cache(maxsize=8)
def delta_m3prime(digits=DEFAULT_DIGITS):
    """m_3'(u, 1) as a polynomial in log u, assembled from the six A-constants.

    It is the coefficient of s^2 w^2 in Z(s) Z(w) e^((s+w) log u) A(s, w), where
    Z(s) = s^3 zeta^3(1+s) and A^(a,b)/(a! b!) are the Taylor coefficients of A.
    """
    c = delta_constants(digits)
    with mp.workdps(work_dps(digits)):
        z = _zeta_cube_taylor(digits)
        D = {(0, 0): c["A00"].value, (1, 0): c["A10"].value, (0, 1): c["A10"].value,
             (1, 1): c["A11"].value, (2, 0): c["A20"].value / 2, (0, 2): c["A20"].value / 2,
             (2, 1): c["A21"].value / 2, (1, 2): c["A21"].value / 2, (2, 2): c["A22"].value / 4}
        out = [mpf(0)] * 5
        for (a, b), Aab in D.items():
            for i in range(3 - a):
                for j in range(3 - b):
                    # remaining powers of s and w come from e^(s L) e^(w L)
                    rs, rw = 2 - a - i, 2 - b - j
                    out[rs + rw] += Aab * z[i] * z[j] / (math.factorial(rs) * math.factorial(rw))
        return LogPolynomial(tuple(+v for v in out), digits, Fraction(0))


@lru_cache(maxsize=8)
def delta_m3prime_series(digits=DEFAULT_DIGITS):
    """m_3'(u, 1) from the residue of zeta^3(1+s) zeta^3(1+w) u^(s+w) A(s, w) with A as a series."""
    with mp.workdps(work_dps(digits)):
        A = delta_series(digits)
        names = ("s", "w")
        deg = FACTOR_DEGREE
        zs = zeta_laurent(names, (1, 0), deg, digits=digits)
        zw = zeta_laurent(names, (0, 1), deg, digits=digits)
        G = zs * zs * zs * zw * zw * zw * A
        poly = iterated_residue(G, x_power(0, (1, 1)), digits)
        return LogPolynomial(tuple(+c for c in poly.coeffs), digits, Fraction(0))


def delta_m3_coefficients(digits=DEFAULT_DIGITS):
    """m_3(X, 1) = X (d_4 log^4 X + ... + d_0), the antiderivative of m_3'(u, 1)."""
    with mp.workdps(work_dps(digits)):
        return integrate_log_polynomial(delta_m3prime(digits))


def delta_m3_eval(X, digits=DEFAULT_DIGITS):
    poly = delta_m3_coefficients(digits)
    with mp.workdps(work_dps(digits)):
        return BigReal(+poly(mpf(X)), digits)


# --------------------------------------------------------------------------------------
# tau_3 in residue classes coprime to q, and the leading b_1 constant
# --------------------------------------------------------------------------------------


def a_q_coefficients(q, digits=DEFAULT_DIGITS, reading="residue"):
    """(a_1, a_2, a_3) with (1/phi(q)) sum_{n <= X, (n,q)=1} tau_3(n) ~ X(a_1 L^2 + a_2 L + a_3).

    ``reading="residue"`` evaluates Res_{s=1} zeta^3(s) prod_{p|q}(1-p^-s)^3 X^s/s:
    with S = sum_{p|q} log p/(p-1) and T = sum_{p|q} p log^2 p/(p-1)^2,
      a_2 = phi^2/q^3 (3 gamma - 1 + 3 S),
      a_3 = phi^2/q^3 (3 gamma^2 - 3 gamma - 3 gamma_1 + 1 + 3 S (3 gamma - 1) + (9 S^2 - 3 T)/2).
    ``reading="displayed"`` returns the alternative printed coefficients
      a_2 = phi^2/q^3 (3 gamma - 7/6 + 7/3 S),
      a_3 = phi^2/q^3 (3 gamma^2 - 3 gamma + 3 gamma_1 + S (4 gamma - 3 + S)),
    which do not match the brute-force sums (kept for comparison only).
    """
    if q < 1:
        raise DomainError("q must be positive")
    fac = factorize(q) if q > 1 else ()
    with mp.workdps(work_dps(digits)):
        g, g1 = stieltjes(0, digits), stieltjes(1, digits)
        phi = euler_phi(q)
        lead = mpf(phi) ** 2 / mpf(q) ** 3
        S = sum((mpmath.log(p) / (p - 1) for p, _ in fac), mpf(0))
        T = sum((p * mpmath.log(p) ** 2 / mpf(p - 1) ** 2 for p, _ in fac), mpf(0))
        if reading == "residue":
            a2 = 3 * g - 1 + 3 * S
            a3 = 3 * g**2 - 3 * g - 3 * g1 + 1 + 3 * S * (3 * g - 1) + (9 * S**2 - 3 * T) / 2
        elif reading == "displayed":
            a2 = 3 * g - mpf(7) / 6 + mpf(7) / 3 * S
            a3 = 3 * g**2 - 3 * g + 3 * g1 + S * (4 * g - 3 + S)
        else:
            raise DomainError(f"unknown reading {reading!r}")
        return tuple(BigReal(+v, digits) for v in (lead / 2, lead * a2, lead * a3))


def b1_leading(digits=DEFAULT_DIGITS):
    """(1/12) prod_p (1 - 4/p^2 + 4/p^3 - 1/p^4)."""
    with mp.workdps(work_dps(digits)):
        return BigReal(productp(digits).value / 12, digits)


def dirichlet_tau_scaled(k, h, s, digits=DEFAULT_DIGITS):
    """(A_h(s), prod_{p|h} (1 - p^-s)^k) with sum_n tau_k(nh) n^-s = zeta^k(s) A_h(s).

    The local factor (1-x)^k sum_j binom(k+j+nu-1, k-1) x^j, x = p^-s, is summed
    in closed form: x^-nu (1 - (1-x)^k sum_{m < nu} binom(m+k-1, k-1) x^m).
    """
    if k < 1:
        raise DomainError("k must be positive")
    s = mpmath.mpmathify(s)
    if s < 1:
        raise DomainError("s must be at least 1")
    fac = _nu(h)
    # the closed form cancels about nu * s * log10(p) digits
    extra = max([int(nu * float(s) * math.log10(p)) + 5 for p, nu in fac], default=0)
    with mp.workdps(work_dps(digits) + extra):
        A = mpf(1)
        cop = mpf(1)
        for p, nu in fac:
            x = mpf(p) ** (-s)
            part = sum((math.comb(m + k - 1, k - 1) * x**m for m in range(nu)), mpf(0))
            A *= (1 - (1 - x) ** k * part) / x**nu
            cop *= (1 - x) ** k
        return BigReal(+A, digits), BigReal(+cop, digits)


# --------------------------------------------------------------------------------------
# named constants
# --------------------------------------------------------------------------------------


@lru_cache(maxsize=16)
def log_sum_22(digits=DEFAULT_DIGITS):
    """sum_p log p / (p^2 - 1)."""
    return euler_sum(PrimeExpansion.from_rational([0, 0, 1], [1, 0, -1], 1, MAX_EXCLUDE), digits).as_bigreal()


@lru_cache(maxsize=16)
def log2_sum_22(digits=DEFAULT_DIGITS):
    """sum_p p^2 log^2 p / (p^2 - 1)^2."""
    return euler_sum(PrimeExpansion.from_rational([0, 0, 1], [1, 0, -2, 0, 1], 2, MAX_EXCLUDE),
                     digits).as_bigreal()


def named_constant(name, digits=DEFAULT_DIGITS):
    """Look up a constant by name; returns a BigReal."""
    from .bigreal import prime_zeta

    if name in ("gamma", "gamma0", "gamma1"):
        with mp.workdps(work_dps(digits)):
            return BigReal(+stieltjes(int(name == "gamma1"), digits), digits)
    if name.startswith("P(") and name.endswith(")"):
        with mp.workdps(work_dps(digits)):
            return BigReal(prime_zeta(int(name[2:-1]), digits), digits)
    if name in ("productp", "A(0,0)", "A00"):
        return productp(digits)
    if name in ("sump", "A354709"):
        return delta_prime_sum("sump", digits)
    if name in DELTA_SUMS:
        return delta_prime_sum(name, digits)
    if name in ("A10", "A11", "A20", "A21", "A22"):
        return delta_constants(digits)[name]
    if name == "log_sum_22":
        return log_sum_22(digits)
    if name == "log2_sum_22":
        return log2_sum_22(digits)
    if name.startswith("C_"):
        k, ell = (int(t) for t in name[2:].split(","))
        return C_kl(k, ell, digits).value
    raise DomainError(f"unknown constant {name!r}")


CONSTANT_NAMES = ("gamma", "gamma1", "P(2)", "P(3)", "productp", "A354709", "S2", "S3", "S4", "S5",
                  "A00", "A10", "A11", "A20", "A21", "A22", "log_sum_22", "log2_sum_22", "C_2,2", "C_3,3")
