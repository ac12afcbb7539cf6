"""High-precision zeta, Stieltjes constants, prime zeta and sums over primes.

Everything rests on one routine, :func:`zeta_taylor`, which returns Taylor
coefficients of zeta(s0 + t) in t from the Euler-Maclaurin formula applied
termwise (each n**-(s0+t) is expanded as n**-s0 * exp(-t log n)).  The
remainder is bounded on the circle |t| = 1/2 and transferred to the
coefficients with Cauchy's estimate.

Sums over primes use

    P_Q(s) = sum_{p > Q} p**-s = sum_{k >= 1} mu(k)/k * log zeta_Q(k s),
    zeta_Q(u) = zeta(u) * prod_{p <= Q} (1 - p**-u),

differentiated in s, so that

    T_m(N) = sum_{p > Q} log(p)**m p**-N = (-1)**m P_Q^{(m)}(N).

A rational local factor R(1/p) = sum_N a_N p**-N then gives
sum_p log(p)**m R(1/p) = sum_{p <= Q} (direct) + sum_N a_N T_m(N).

mpmath supplies the multiprecision floats, Bernoulli numbers and elementary
functions only; its own zeta/primezeta are used as test oracles.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import mpmath
import numpy as np
from mpmath import mp, mpf

from .arith import factorize, primes_upto
from .errors import DomainError, PoleError, PrecisionError

DEFAULT_DIGITS = 90
GUARD_DIGITS = 20
DEFAULT_EXCLUDE = 2
MAX_EXCLUDE = 50
DEFAULT_NMAX = 1200
# largest bound for the direct rough-number sum used at large arguments
_DIRECT_LIMIT = 20000


@dataclass(frozen=True)
class BigReal:
    """A multiprecision value together with the number of digits it is claimed to."""

    value: object
    digits: int

    def __str__(self):
        return mpmath.nstr(self.value, self.digits, strip_zeros=False, min_fixed=-mpmath.inf,
                           max_fixed=mpmath.inf)

    def __float__(self):
        return float(self.value)

    def to_json(self, name=None):
        out = {"digits": self.digits, "value": str(self)}
        if name is not None:
            out = {"name": name, **out}
        return out


def work_dps(digits):
    return int(digits) + GUARD_DIGITS


def mobius(k):
    mu = 1
    for _, e in factorize(k):
        if e > 1:
            return 0
        mu = -mu
    return mu


# --- series helpers (lists of mp numbers, index = power of t) -------------------


def _series_mul(a, b, J):
    out = [mpf(0)] * (J + 1)
    for i, ai in enumerate(a[: J + 1]):
        if ai == 0:
            continue
        for j in range(min(len(b), J + 1 - i)):
            out[i + j] += ai * b[j]
    return out


def _exp_log_series(lam, scale, J):
    """scale * exp(-lam t) as a coefficient list."""
    out = [scale]
    c = scale
    for j in range(1, J + 1):
        c = c * (-lam) / j
        out.append(c)
    return out


def series_log1p(f, J):
    """Coefficients of log(1 + f(t)) with f a coefficient list (f[0] > -1)."""
    g0 = 1 + f[0]
    g = [fj / g0 for fj in f[: J + 1]]
    g[0] = mpf(1)
    g += [mpf(0)] * (J + 1 - len(g))
    # n L_n = n g_n - sum_{k<n} k L_k g_{n-k}
    kl = [mpf(0)] * (J + 1)
    for n in range(1, J + 1):
        kl[n] = n * g[n] - sum(kl[k] * g[n - k] for k in range(1, n))
    return [mpmath.log1p(f[0])] + [kl[n] / n for n in range(1, J + 1)]


# --- zeta via Euler-Maclaurin -----------------------------------------------------


def _em_remainder_bound(sabs, sigma, N, M):
    """Bound 4 |(s)_{2M}| / (2 pi)^{2M} * N^{1-sigma-2M} / (sigma + 2M - 1)."""
    if sigma + 2 * M - 1 <= 0:
        return mpmath.inf
    poch = mpf(1)
    for i in range(2 * M):
        poch *= sabs + i
    return 4 * poch / (2 * mp.pi) ** (2 * M) * mpf(N) ** (1 - sigma - 2 * M) / (sigma + 2 * M - 1)


def _choose_em(s0, target, J):
    rho = mpf(1) / 2
    sabs = abs(s0) + rho
    sigma = mpmath.re(s0) - rho
    N = max(8, int(mp.dps // 3) + 5)
    while True:
        best = None
        for M in range(1, 4 * N):
            bound = _em_remainder_bound(sabs, sigma, N, M) / rho**J
            if bound < target:
                return N, M
            if best is not None and bound > best * 1e3:
                break
            best = bound if best is None else min(best, bound)
        N *= 2
        if N > 1 << 16:
            raise PrecisionError("Euler-Maclaurin parameters not found", required=N)


@lru_cache(maxsize=4096)
def _zeta_taylor_cached(s0, J, dps, drop_one):
    with mp.workdps(dps):
        s0 = mpmath.mpmathify(s0)
        is_pole = s0 == 1
        sigma = mpmath.re(s0)
        # drop_one: relative accuracy for zeta - 1, whose size is about 2**-sigma
        target = mpf(10) ** (-dps) * (mpf(2) ** (-sigma) if drop_one else 1)
        N, M = _choose_em(s0, target, J)
        coef = [mpf(0)] * (J + 1)
        for n in range(2 if drop_one else 1, N):
            ln = mpmath.log(n)
            term = mpmath.power(n, -s0)
            for j in range(J + 1):
                coef[j] += term
                term = term * (-ln) / (j + 1)
        lnN = mpmath.log(N)
        NS = mpmath.power(N, -s0)
        # N^{1-s}/(s-1)
        if is_pole:
            c = mpf(1)
            for j in range(J + 1):
                c = c * (-lnN) / (j + 1)
                coef[j] += c
        else:
            a = s0 - 1
            inv = [(-1) ** j / a ** (j + 1) for j in range(J + 1)]
            for j, v in enumerate(_series_mul(_exp_log_series(lnN, N * NS, J), inv, J)):
                coef[j] += v
        # N^{-s}/2
        for j, v in enumerate(_exp_log_series(lnN, NS / 2, J)):
            coef[j] += v
        # Bernoulli corrections: B_{2k}/(2k)! (s)_{2k-1} N^{-s-2k+1}
        poch = [s0, mpf(1)]  # polynomial in t for (s)_1 = s0 + t
        fact = mpf(2)
        for k in range(1, M + 1):
            if k > 1:
                for shift in (2 * k - 3, 2 * k - 2):
                    poch = _series_mul(poch, [s0 + shift, mpf(1)], J)
                fact *= (2 * k - 1) * (2 * k)
            w = mpmath.bernoulli(2 * k) / fact
            base = _exp_log_series(lnN, w * NS / mpf(N) ** (2 * k - 1), J)
            for j, v in enumerate(_series_mul(poch, base, J)):
                coef[j] += v
        return tuple(coef)


def _key(s0):
    s0 = mpmath.mpmathify(s0)
    return s0 if isinstance(s0, mpmath.mpc) and s0.imag != 0 else mpmath.re(s0)


def zeta_taylor(s0, J, digits=DEFAULT_DIGITS, drop_one=False):
    """Taylor coefficients c_0..c_J of zeta(s0 + t) (minus 1 if ``drop_one``).

    At s0 = 1 the pole 1/t is omitted and the regular part is returned.
    Valid for Re(s0) > -2; large real s0 are used by the prime-zeta machinery.
    """
    dps = work_dps(digits)
    with mp.workdps(dps):
        s0 = _key(s0)
        if mpmath.re(s0) <= -2:
            raise DomainError("zeta_taylor needs Re(s0) > -2")
        return list(_zeta_taylor_cached(s0, J, dps, drop_one))


def zeta(s, digits=DEFAULT_DIGITS):
    """Riemann zeta at complex s with Re(s) > -2 (s != 1)."""
    s = mpmath.mpmathify(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if mpmath.re(s) <= -2 or abs(s) > 100:
        raise DomainError("zeta supports Re(s) > -2 and |s| <= 100")
    c = zeta_taylor(s, 0, digits)
    return +c[0]


def zeta_derivative(m, s, digits=DEFAULT_DIGITS):
    if not 0 <= m <= 6:
        raise DomainError("derivative order must lie in [0, 6]")
    s = mpmath.mpmathify(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    c = zeta_taylor(s, m, digits)
    return c[m] * math.factorial(m)


def zeta_laurent_at_one(J, digits=DEFAULT_DIGITS):
    """Regular part of zeta(1 + t) = 1/t + sum_j c_j t^j, with c_j = (-1)^j gamma_j / j!."""
    return zeta_taylor(1, J, digits)


def stieltjes(m, digits=DEFAULT_DIGITS):
    if not 0 <= m <= 8:
        raise DomainError("stieltjes supports 0 <= m <= 8")
    c = zeta_laurent_at_one(m, digits)
    return (-1) ** m * math.factorial(m) * c[m]


# --- prime zeta ----------------------------------------------------------------


@lru_cache(maxsize=64)
def _rough_numbers(Q, B):
    """Integers 1 < n <= B with no prime factor <= Q."""
    keep = np.ones(B + 1, dtype=bool)
    keep[:2] = False
    for p in primes_upto(Q):
        keep[p::p] = False
    return tuple(int(n) for n in np.flatnonzero(keep))


def _next_prime(Q):
    n = Q + 1
    while any(n % p == 0 for p in range(2, math.isqrt(n) + 1)):
        n += 1
    return n


@lru_cache(maxsize=8192)
def _log_zeta_rough(u, J, Q, dps):
    """Taylor coefficients of log zeta_Q(u + tau), relative error ~ 10**-dps."""
    with mp.workdps(dps):
        q1 = _next_prime(Q)
        # direct rough-number sum when the needed range is small
        B = q1 * 10 ** ((dps + 5) / u) if u > 2 else math.inf
        if B <= _DIRECT_LIMIT:
            B = int(B) + 1
            f = [mpf(0)] * (J + 1)
            for n in _rough_numbers(Q, B):
                ln = mpmath.log(n)
                term = mpmath.power(n, -u)
                for j in range(J + 1):
                    f[j] += term
                    term = term * (-ln) / (j + 1)
            return tuple(series_log1p(f, J))
        # zeta(u) - 1 is accurate relative to 2**-u, the result is of size q1**-u:
        # carry enough extra digits to absorb the cancellation
        extra = int(math.ceil(float(u) * math.log10(q1 / 2))) + 2
        with mp.workdps(dps + extra):
            zm1 = list(_zeta_taylor_cached(mpf(u), J, dps + extra, True))
            out = series_log1p(zm1, J)
            for p in primes_upto(Q):
                p = int(p)
                y = _exp_log_series(mpmath.log(p), -mpmath.power(p, -u), J)
                for j, v in enumerate(series_log1p(y, J)):
                    out[j] += v
        return tuple(+v for v in out)


def _check_exclude(Q):
    if not 1 <= Q <= MAX_EXCLUDE:
        raise DomainError(f"excluded-prime bound must lie in [1, {MAX_EXCLUDE}]")


@lru_cache(maxsize=4096)
def _prime_zeta_taylor_cached(s, J, Q, dps):
    with mp.workdps(dps):
        q1 = _next_prime(Q)
        lq = math.log(q1)
        # relative to the leading term q1**-s: callers multiply T_m(N) by coefficients
        # that grow geometrically in N, so absolute accuracy is not enough
        target = mpf(10) ** (-dps) * mpf(q1) ** (-s)
        out = [mpf(0)] * (J + 1)
        k = 1
        while True:
            mu = mobius(k)
            if k > 1:
                # crude majorant of the k-th term and beyond (geometric in q1**-s)
                bound = 100 * k**J * (lq * k) ** J * mpf(q1) ** (-k * s)
                if bound < target:
                    break
            if mu:
                c = _log_zeta_rough(k * s, J, Q, dps)
                for j in range(J + 1):
                    out[j] += mu * mpf(k) ** (j - 1) * c[j]
            k += 1
        return tuple(out)


def prime_zeta_taylor(s, J, exclude_upto=MAX_EXCLUDE, digits=DEFAULT_DIGITS):
    """Taylor coefficients of P_Q(s + t) = sum_{p > Q} p**-(s+t), Q = exclude_upto."""
    _check_exclude(exclude_upto)
    if s < 1.5:
        raise DomainError("prime zeta is evaluated only for s >= 1.5")
    dps = work_dps(digits)
    with mp.workdps(dps):
        return list(_prime_zeta_taylor_cached(mpf(s), J, exclude_upto, dps))


def prime_zeta(s, digits=DEFAULT_DIGITS):
    """P(s) = sum_p p**-s for real s >= 1.5."""
    return prime_zeta_deriv(0, s, digits)


def prime_zeta_deriv(m, s, digits=DEFAULT_DIGITS):
    """P^{(m)}(s) = (-1)**m sum_p log(p)**m p**-s."""
    if not 0 <= m <= 8:
        raise DomainError("derivative order must lie in [0, 8]")
    if s < 1.5:
        raise DomainError("prime zeta is evaluated only for s >= 1.5")
    with mp.workdps(work_dps(digits)):
        c = prime_zeta_taylor(s, m, MAX_EXCLUDE, digits)
        head = sum(mpmath.log(p) ** m * mpmath.power(p, -s) for p in primes_upto(MAX_EXCLUDE).tolist())
        return +(c[m] * math.factorial(m) + (-1) ** m * head)


def prime_log_power_sum(m, N, exclude_upto=MAX_EXCLUDE, digits=DEFAULT_DIGITS):
    """T_m(N) = sum_{p > Q} log(p)**m p**-N."""
    # one cached Taylor series of degree >= 6 serves every m at this N
    c = prime_zeta_taylor(N, max(m, 6), exclude_upto, digits)
    return (-1) ** m * math.factorial(m) * c[m]


def prime_log_power_bound(m, N, exclude_upto):
    """Majorant 4 log(q)**m q**-N of T_m(N), q the first prime > Q; valid for N >= 10."""
    q1 = _next_prime(exclude_upto)
    return 4 * mpf(math.log(q1)) ** m * mpf(q1) ** (-N)


# --- sums and products over primes ----------------------------------------------


def _poly_divide(num, den, n_max):
    num = [Fraction(c) for c in num]
    den = [Fraction(c) for c in den]
    if den[0] == 0:
        raise DomainError("denominator must not vanish at x = 0")
    out = []
    for n in range(n_max + 1):
        v = num[n] if n < len(num) else Fraction(0)
        for i in range(1, min(n, len(den) - 1) + 1):
            v -= den[i] * out[n - i]
        out.append(v / den[0])
    return out


def _poly_log(g, n_max):
    """Exact coefficients of log g(x) for a polynomial with g(0) = 1."""
    g = [Fraction(c) for c in g]
    if g[0] != 1:
        raise DomainError("log-expansion needs the local factor to equal 1 at x = 0")
    kl = [Fraction(0)] * (n_max + 1)
    for n in range(1, n_max + 1):
        v = n * g[n] if n < len(g) else Fraction(0)
        for k in range(max(1, n - len(g) + 1), n):
            v -= kl[k] * g[n - k]
        kl[n] = v
    return [Fraction(0)] + [kl[n] / n for n in range(1, n_max + 1)]


def _poly_eval(c, x):
    v = Fraction(0)
    for a in reversed(c):
        v = v * x + a
    return v


def _min_root_radius(poly):
    coeffs = [float(c) for c in poly]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) <= 1:
        return math.inf
    roots = np.roots(coeffs[::-1])
    return float(np.min(np.abs(roots)))


def _fraction_mpf(v):
    return mpf(v.numerator) / v.denominator


@dataclass(frozen=True)
class PrimeExpansion:
    """sum over primes p of log(p)**m * R(1/p), with R(x) = sum_N a_N x**N.

    Primes p <= ``exclude_upto`` are evaluated directly through ``local``
    (p -> R(1/p) as an mpf); the coefficients a_N serve the primes above it.
    ``radius`` is the radius of convergence of R when known (else inf).
    """

    start_power: int
    coeffs: tuple
    log_weight: int = 0
    exclude_upto: int = DEFAULT_EXCLUDE
    local: object = field(default=None, compare=False)
    radius: float = math.inf

    @classmethod
    def from_rational(cls, num, den, log_weight=0, exclude_upto=DEFAULT_EXCLUDE, n_max=DEFAULT_NMAX):
        """R(x) = num(x)/den(x), coefficient lists from the constant term up."""
        _check_exclude(exclude_upto)
        a = _poly_divide(num, den, n_max)

        def local(p):
            x = Fraction(1, p)
            return _fraction_mpf(_poly_eval(num, x) / _poly_eval(den, x))

        return cls._build(a, log_weight, exclude_upto, local, _min_root_radius(den))

    @classmethod
    def log_of_rational(cls, num, den, exclude_upto=DEFAULT_EXCLUDE, n_max=DEFAULT_NMAX):
        """R(x) = log(num(x)/den(x)); num(0) = den(0) = 1 required."""
        _check_exclude(exclude_upto)
        ln, ld = _poly_log(num, n_max), _poly_log(den, n_max)
        a = [x - y for x, y in zip(ln, ld)]

        def local(p):
            x = Fraction(1, p)
            v = _poly_eval(num, x) / _poly_eval(den, x)
            if v <= 0:
                raise DomainError(f"local factor at p={p} is not positive")
            return mpmath.log(_fraction_mpf(v))

        return cls._build(a, 0, exclude_upto, local, min(_min_root_radius(num), _min_root_radius(den)))

    @classmethod
    def _build(cls, a, m, Q, local, radius):
        if a[0] != 0 or a[1] != 0:
            raise DomainError("R(x) must vanish to second order at x = 0 for the prime sum to converge")
        nz = [n for n, v in enumerate(a) if v != 0]
        start = nz[0] if nz else 2
        return cls(start, tuple(a[start:]), m, Q, local, radius)

    @property
    def n_max(self):
        return self.start_power + len(self.coeffs) - 1

    def coefficient(self, N):
        i = N - self.start_power
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def local_value(self, p):
        return self.local(p)

    def growth(self):
        return self._growth

    @cached_property
    def _growth(self):
        """(rho, K) with |a_N| <= K rho**N on the stored range; rho is read off the upper half."""
        tail = [(n, abs(self.coefficient(n))) for n in range(max(self.start_power, self.n_max // 2), self.n_max + 1)]
        tail = [(n, v) for n, v in tail if v != 0]
        if not tail:
            return 0.0, 0.0
        rho = max(math.exp(_flog(v) / n) for n, v in tail)
        if math.isfinite(self.radius) and self.radius > 0:
            # known singularity: a small slack absorbs polynomial factors from repeated roots
            rho = max(rho, 1.01 / self.radius)
        else:
            rho *= 1.05
        full = [(n, abs(self.coefficient(n))) for n in range(self.start_power, self.n_max + 1)]
        K = max(math.exp(_flog(v) - n * math.log(rho)) for n, v in full if v != 0)
        return rho, K

    def tail_bound(self, N_cut):
        """Bound on sum_{N > N_cut} |a_N| T_m(N) from geometric domination."""
        rho, K = self.growth()
        if rho == 0:
            return mpf(0)
        q1 = _next_prime(self.exclude_upto)
        r = rho / q1
        if r >= 1:
            return mpmath.inf
        return 4 * K * mpf(math.log(q1)) ** self.log_weight * mpf(r) ** (N_cut + 1) / (1 - r)

    def linear_combination(self, other, alpha=1, beta=1):
        """alpha * self + beta * other (same log weight and excluded primes)."""
        if (self.log_weight, self.exclude_upto) != (other.log_weight, other.exclude_upto):
            raise DomainError("expansions must share log weight and excluded primes")
        alpha, beta = Fraction(alpha), Fraction(beta)
        lo = min(self.start_power, other.start_power)
        hi = min(self.n_max, other.n_max)
        coeffs = tuple(alpha * self.coefficient(n) + beta * other.coefficient(n) for n in range(lo, hi + 1))
        la, lb = self.local, other.local

        def local(p):
            return _fraction_mpf(alpha) * la(p) + _fraction_mpf(beta) * lb(p)

        return PrimeExpansion(lo, coeffs, self.log_weight, self.exclude_upto, local,
                              min(self.radius, other.radius))

    def __add__(self, other):
        return self.linear_combination(other)


def _flog(fr):
    """Natural log of a positive Fraction, robust for huge numerators/denominators."""
    return _ilog(fr.numerator) - _ilog(fr.denominator)


def _ilog(n):
    b = n.bit_length()
    if b < 1000:
        return math.log(n)
    return math.log(n >> (b - 60)) + (b - 60) * math.log(2)


@dataclass(frozen=True)
class SumResult:
    value: object
    tail_bound: object
    terms: int
    digits: int

    def as_bigreal(self):
        return BigReal(self.value, self.digits)


def euler_sum(expansion, digits=DEFAULT_DIGITS):
    """sum_p log(p)**m R(1/p) with a certified-by-growth tail bound."""
    target = mpf(10) ** (-digits - 2)
    with mp.workdps(work_dps(digits)):
        cut = None
        for N in range(max(expansion.start_power, 10), expansion.n_max + 1):
            if expansion.tail_bound(N) < target:
                cut = N
                break
        if cut is None:
            rho, _ = expansion.growth()
            q1 = _next_prime(expansion.exclude_upto)
            need = None
            if rho < q1:
                need = int(math.ceil((digits + 2) * math.log(10) / math.log(q1 / rho)))
            raise PrecisionError(f"tail bound not met with N_max={expansion.n_max}", required=need)
        m = expansion.log_weight
        total = mpf(0)
        for p in primes_upto(expansion.exclude_upto).tolist():
            total += mpmath.log(p) ** m * expansion.local_value(p)
        for N in range(expansion.start_power, cut + 1):
            a = expansion.coefficient(N)
            if a == 0:
                continue
            if N >= 10 and abs(a) * prime_log_power_bound(m, N, expansion.exclude_upto) < target * 1e-3:
                continue
            total += mpf(a.numerator) / a.denominator * prime_log_power_sum(m, N, expansion.exclude_upto, digits)
        return SumResult(+total, expansion.tail_bound(cut), cut, digits)


def euler_product(num, den, digits=DEFAULT_DIGITS, exclude_upto=MAX_EXCLUDE, n_max=DEFAULT_NMAX, check_upto=1000):
    """prod_p num(1/p)/den(1/p) with num(0) = den(0) = 1.

    Computed as exp(euler_sum of the log-expansion) with the primes <= exclude_upto
    multiplied in directly.  Every prime <= check_upto is checked for a positive factor.
    """
    for p in primes_upto(check_upto).tolist():
        v = _poly_eval(num, Fraction(1, p)) / _poly_eval(den, Fraction(1, p))
        if v <= 0:
            raise DomainError(f"local factor at p={p} is not positive")
    q1 = _next_prime(exclude_upto)
    expansion = PrimeExpansion.log_of_rational(num, den, exclude_upto, n_max)
    if expansion.radius <= 1.0 / q1:
        raise DomainError("log-expansion does not converge for the non-excluded primes")
    res = euler_sum(expansion, digits)
    with mp.workdps(work_dps(digits)):
        return SumResult(+mpmath.exp(res.value), res.tail_bound, res.terms, digits)
