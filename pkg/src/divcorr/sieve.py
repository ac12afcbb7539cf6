"""Exact tau_k tables, shifted correlation sums, Hooley partial sums and
arithmetic-progression remainders.

tau_k is produced segment by segment: every n in [lo, hi) is stripped of its
prime factors p <= sqrt(hi) and the exponent e contributes binom(e+k-1, k-1);
a leftover cofactor > 1 is a single prime and contributes k.  Correlation
sums are accumulated in two int64 words (value = hi * 2**40 + lo) so that
nothing overflows for X + h <= 2**40.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numba as nb
import numpy as np

from .arith import euler_phi, iroot, primes_upto, radical, squarefree_divisors
from .errors import DomainError, ResourceError

DEFAULT_SEGMENT = 1 << 22
MAX_HI = 1 << 40
# entries of a materialised table; 8 bytes each
MEMORY_BUDGET = 1 << 27
# rough throughput used by the AP cost model (table entries touched per second)
AP_OPS_PER_SECOND = 5e7

_SPLIT = 40
_MASK = (1 << _SPLIT) - 1
_TAU_CAP = 1 << 31


def tau_prime_power(k, e):
    """tau_k(p**e) = binom(e + k - 1, k - 1)."""
    if not (1 <= k <= 8) or not (0 <= e <= 120):
        raise DomainError(f"tau_prime_power needs 1<=k<=8, 0<=e<=120; got k={k}, e={e}")
    return math.comb(e + k - 1, k - 1)


def _binom_rows(ks):
    rows = np.zeros((len(ks), 64), dtype=np.int64)
    for j, k in enumerate(ks):
        for e in range(64):
            rows[j, e] = math.comb(e + k - 1, k - 1)
    return rows


@nb.njit(cache=True, nogil=True)
def _factor_segment(lo, hi, primes, binoms):
    n = hi - lo
    nk = binoms.shape[0]
    rem = np.empty(n, dtype=np.int64)
    for i in range(n):
        rem[i] = lo + i
    out = np.ones((nk, n), dtype=np.int64)
    for idx in range(primes.shape[0]):
        p = primes[idx]
        if p * p >= hi:
            break
        start = ((lo + p - 1) // p) * p
        for m in range(start, hi, p):
            i = m - lo
            r = rem[i] // p
            e = 1
            while r % p == 0:
                r //= p
                e += 1
            rem[i] = r
            for j in range(nk):
                out[j, i] *= binoms[j, e]
    for i in range(n):
        if rem[i] > 1:
            for j in range(nk):
                out[j, i] *= binoms[j, 1]
    return out


@nb.njit(cache=True, nogil=True)
def _accumulate_products(a, b, shift, count):
    hi = 0
    lo = 0
    for i in range(count):
        x = a[i]
        y = b[i + shift]
        if x >= 2147483648 or y >= 2147483648:
            raise OverflowError("tau value exceeds 2**31")
        lo += x * y
        if lo >= 4611686018427387904:
            hi += lo >> 40
            lo &= 1099511627775
    return hi, lo


@dataclass(frozen=True)
class TauTable:
    """tau_k(n) for lo <= n < hi; values[i] = tau_k(lo + i)."""

    k: int
    lo: int
    hi: int
    values: np.ndarray

    def __getitem__(self, n):
        if not self.lo <= n < self.hi:
            raise IndexError(n)
        return int(self.values[n - self.lo])

    def to_bytes(self):
        """Binary dump: magic b"TAUK", u16 version, u8 k, u64 lo, u64 hi, u64 values (LE)."""
        header = b"TAUK" + np.array([1], "<u2").tobytes() + bytes([self.k])
        header += np.array([self.lo, self.hi], "<u8").tobytes()
        return header + self.values.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, blob):
        if blob[:4] != b"TAUK":
            raise ValueError("bad magic")
        version = int(np.frombuffer(blob[4:6], "<u2")[0])
        if version != 1:
            raise ValueError(f"unsupported table version {version}")
        k = blob[6]
        lo, hi = (int(v) for v in np.frombuffer(blob[7:23], "<u8"))
        values = np.frombuffer(blob[23:], "<u8").astype(np.uint64)
        if len(values) != hi - lo:
            raise ValueError("truncated table")
        return cls(k, lo, hi, values)


def _check_k(k, lo=2, hi=5):
    if not lo <= k <= hi:
        raise DomainError(f"k must lie in [{lo}, {hi}], got {k}")


def _segments(lo, hi, size):
    return [(a, min(a + size, hi)) for a in range(lo, hi, size)]


def _map(fn, items, threads):
    if threads == 1 or len(items) == 1:
        return [fn(it) for it in items]
    workers = threads or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def tau_table(k, lo, hi, segment_size=DEFAULT_SEGMENT, threads=1, budget=MEMORY_BUDGET):
    _check_k(k)
    if not 1 <= lo < hi:
        raise DomainError(f"need 1 <= lo < hi, got [{lo}, {hi})")
    if hi > MAX_HI:
        raise DomainError(f"hi={hi} exceeds 2**40")
    if hi - lo > budget:
        raise ResourceError(
            f"table of {hi - lo} entries exceeds the memory budget of {budget} entries",
            estimate=hi - lo,
            budget=budget,
        )
    primes = primes_upto(math.isqrt(hi - 1))
    binoms = _binom_rows([k])
    values = np.empty(hi - lo, dtype=np.int64)

    def work(seg):
        a, b = seg
        values[a - lo : b - lo] = _factor_segment(a, b, primes, binoms)[0]

    _map(work, _segments(lo, hi, segment_size), threads)
    return TauTable(k, lo, hi, values.view(np.uint64))


def tau_array(k, n, segment_size=DEFAULT_SEGMENT):
    """int64 array t of length n + 1 with t[m] = tau_k(m) and t[0] = 0."""
    t = np.zeros(n + 1, dtype=np.int64)
    if n >= 1:
        t[1:] = tau_table(k, 1, n + 1, segment_size).values.view(np.int64)
    return t


@dataclass(frozen=True)
class CorrelationRecord:
    k: int
    ell: int
    h: int
    X: int
    value: int

    CSV_HEADER = ("k", "ell", "h", "X", "value")

    def csv_row(self):
        return (self.k, self.ell, self.h, self.X, self.value)


def _check_correlation_args(k, ell, X, h):
    _check_k(k)
    _check_k(ell)
    if X < 1:
        raise DomainError("X must be >= 1")
    if h < 1:
        raise DomainError("h must be >= 1")
    if X + h > MAX_HI:
        raise DomainError("X + h exceeds the sieve range 2**40")


def _segment_tables(lo, hi, h, ks, primes, binoms):
    tables = _factor_segment(lo, hi + h, primes, binoms)
    return tables[ks[0]], tables[ks[1]]


def correlate(k, ell, X, h, segment_size=DEFAULT_SEGMENT, threads=1):
    """Exact D_{k,ell}(X, h) = sum_{n<=X} tau_k(n) tau_ell(n+h)."""
    _check_correlation_args(k, ell, X, h)
    uniq = sorted({k, ell})
    binoms = _binom_rows(uniq)
    ks = (uniq.index(k), uniq.index(ell))
    primes = primes_upto(math.isqrt(X + h))

    def work(seg):
        a, b = seg
        tk, tl = _segment_tables(a, b, h, ks, primes, binoms)
        return _accumulate_products(tk, tl, h, b - a)

    parts = _map(work, _segments(1, X + 1, segment_size), threads)
    total = sum((int(hi) << _SPLIT) + int(lo) for hi, lo in parts)
    return CorrelationRecord(k, ell, h, X, total)


def correlation_checkpoints(k, ell, h, grid, segment_size=DEFAULT_SEGMENT):
    """D_{k,ell}(X, h) at every X of an increasing grid, from one sweep."""
    grid = np.asarray(grid, dtype=np.int64)
    if len(grid) == 0:
        return []
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    X = int(grid[-1])
    _check_correlation_args(k, ell, X, h)
    uniq = sorted({k, ell})
    binoms = _binom_rows(uniq)
    ks = (uniq.index(k), uniq.index(ell))
    primes = primes_upto(math.isqrt(X + h))
    out = []
    base = 0
    for a, b in _segments(1, X + 1, segment_size):
        tk, tl = _segment_tables(a, b, h, ks, primes, binoms)
        prod = tk[: b - a] * tl[h : h + b - a]
        sel = grid[(grid >= a) & (grid < b)] - a
        if len(sel):
            if int(prod.max()) * len(prod) >= 1 << 62:
                raise OverflowError("segment partial sums exceed int64; use a smaller segment")
            csum = np.cumsum(prod)
            out.extend(base + int(v) for v in csum[sel])
        hi, lo = _accumulate_products(tk, tl, h, b - a)
        base += (int(hi) << _SPLIT) + int(lo)
    return out


def correlation_prefix(k, ell, h, X, segment_size=DEFAULT_SEGMENT):
    """int64 array P with P[n] = D_{k,ell}(n, h) for 0 <= n <= X."""
    _check_correlation_args(k, ell, X, h)
    if X + 1 > MEMORY_BUDGET:
        raise ResourceError(f"prefix array of {X + 1} entries exceeds the memory budget",
                            estimate=X + 1, budget=MEMORY_BUDGET)
    tk = tau_array(k, X + h, segment_size)
    tl = tk if ell == k else tau_array(ell, X + h, segment_size)
    prod = tk[1 : X + 1] * tl[1 + h : X + 1 + h]
    out = np.zeros(X + 1, dtype=np.int64)
    np.cumsum(prod, out=out[1:])
    return out


# --- Hooley decomposition -------------------------------------------------------


def _ordered_triples(n):
    divs = [d for d in range(1, n + 1) if n % d == 0]
    for a in divs:
        for b in divs:
            if (n // a) % b == 0:
                yield a, b, n // (a * b)


def hooley_identity_check(n, X):
    """Enumerate ordered factorizations n = l1*l2*l3 and classify them.

    Cutoffs are exact integer comparisons: l <= X^(1/3) iff l**3 <= X and
    l1*l2 <= X^(2/3) iff (l1*l2)**3 <= X**2.  Returns (S1, S2, S3, holds)
    where holds is tau_3(n) == 3*S1 - 3*S2 + S3.
    """
    if not 1 <= n <= X:
        raise DomainError(f"need 1 <= n <= X, got n={n}, X={X}")
    s1 = s2 = s3 = tau3 = 0
    x2 = X * X
    for a, b, c in _ordered_triples(n):
        tau3 += 1
        small_a = a**3 <= X
        if small_a and (a * b) ** 3 <= x2:
            s1 += 1
            if c**3 <= X:
                s2 += 1
        if small_a and b**3 <= X and c**3 <= X:
            s3 += 1
    return s1, s2, s3, tau3 == 3 * s1 - 3 * s2 + s3


@dataclass(frozen=True)
class HooleySums:
    X: int
    h: int
    sigma11: int
    sigma21: int
    sigma31: int

    @property
    def combined(self):
        return 3 * self.sigma11 - 3 * self.sigma21 + self.sigma31


@nb.njit(cache=True)
def _hooley_kernel(tau, X, h, c, c2):
    w1 = np.zeros(c2 + 1, dtype=np.int64)
    for d in range(1, c + 1):
        for m in range(d, c2 + 1, d):
            w1[m] += 1
    short = np.zeros(c2 + 1, dtype=np.int64)
    s11 = 0
    s21 = 0
    for m in range(1, c2 + 1):
        acc = 0
        top = X // m
        for j in range(1, top + 1):
            acc += tau[m * j + h]
            if j == c:
                short[m] = acc
        if top < c:
            short[m] = acc
        s11 += w1[m] * acc
        s21 += w1[m] * short[m]
    s31 = 0
    for a in range(1, c + 1):
        for b in range(1, c + 1):
            s31 += short[a * b]
    return s11, s21, s31


def hooley_sigma_sums(X, h, segment_size=DEFAULT_SEGMENT):
    """Sigma_11, Sigma_21, Sigma_31 as sums of tau_3 over progressions n = h (mod m).

    The inner progressions run over h < n <= m*L + h, i.e. l3 >= 1, so that
    3*S11 - 3*S21 + S31 equals D_{3,3}(X, h) exactly.
    """
    if X < 1 or h < 1:
        raise DomainError("need X >= 1 and h >= 1")
    if X + h > MEMORY_BUDGET:
        raise ResourceError("Hooley sums need a full table of X + h entries",
                            estimate=X + h, budget=MEMORY_BUDGET)
    c = iroot(X, 3)
    c2 = iroot(X * X, 3)
    tau = tau_array(3, X + h, segment_size)
    s11, s21, s31 = _hooley_kernel(tau, X, h, c, c2)
    return HooleySums(X, h, int(s11), int(s21), int(s31))


# --- arithmetic progressions ----------------------------------------------------


@nb.njit(cache=True)
def _progression_sums(tau, X, h, qs):
    out = np.zeros(qs.shape[0], dtype=np.int64)
    for idx in range(qs.shape[0]):
        q = qs[idx]
        r = h % q
        if r == 0:
            r = q
        acc = 0
        for n in range(r, X + 1, q):
            acc += tau[n]
        out[idx] = acc
    return out


@nb.njit(cache=True)
def _multiple_sum(tau, X, d):
    acc = 0
    for n in range(d, X + 1, d):
        acc += tau[n]
    return acc


class ProgressionContext:
    """tau_k on [1, X] with memoised coprime sums; shared by the AP operations."""

    MAX_PRIME_FACTORS = 15

    def __init__(self, k, X, segment_size=DEFAULT_SEGMENT):
        if X < 1:
            raise DomainError("X must be >= 1")
        if X + 1 > MEMORY_BUDGET:
            raise ResourceError(f"table of {X} entries exceeds the memory budget",
                                estimate=X, budget=MEMORY_BUDGET)
        self.k = k
        self.X = X
        self.tau = tau_array(k, X, segment_size)
        self._multiples = {}
        self._coprime = {}

    def multiple_sum(self, d):
        """sum_{n <= X, d | n} tau_k(n) = sum_{m <= X/d} tau_k(d m)."""
        v = self._multiples.get(d)
        if v is None:
            v = int(_multiple_sum(self.tau, self.X, d))
            self._multiples[d] = v
        return v

    def coprime_sum(self, q):
        rad = radical(q)
        v = self._coprime.get(rad)
        if v is None:
            divs = squarefree_divisors(rad)
            if len(divs) > 1 << self.MAX_PRIME_FACTORS:
                raise ResourceError(f"rad({q}) has more than {self.MAX_PRIME_FACTORS} prime factors")
            v = sum(mu * self.multiple_sum(d) for d, mu in divs)
            self._coprime[rad] = v
        return v

    def progression_sums(self, h, qs):
        qs = np.asarray(qs, dtype=np.int64)
        return _progression_sums(self.tau, self.X, h, qs)


def coprime_tau_sum(k, X, q, context=None):
    """sum_{n <= X, (n, q) = 1} tau_k(n), by inclusion-exclusion over d | rad(q)."""
    if q < 1:
        raise DomainError("q must be >= 1")
    ctx = context if context is not None else ProgressionContext(k, X)
    return ctx.coprime_sum(q)


@dataclass(frozen=True)
class APRemainderRecord:
    k: int
    h: int
    X: int
    q_limit: int
    delta_sum: Fraction
    q_sampled: str | None = None

    CSV_HEADER = ("k", "h", "X", "q_limit", "delta_sum_num", "delta_sum_den")

    def csv_row(self):
        return (self.k, self.h, self.X, self.q_limit,
                self.delta_sum.numerator, self.delta_sum.denominator)


def default_q_limit(k, X):
    """floor(X^((k-1)/k))."""
    return iroot(X ** (k - 1), k)


def ap_cost_estimate(X, qs):
    """Table entries touched: progression sums plus (at most) the same again for coprime sums."""
    harmonic = float(np.sum(1.0 / np.asarray(qs, dtype=np.float64))) if len(qs) else 0.0
    return X + 2.0 * X * harmonic


def ap_remainder_sum(k, X, h, q_limit=None, sample=None, seed=0, budget_seconds=None,
                     context=None):
    """Sum over q of |AP sum - coprime sum / phi(q/(h,q))|, exactly.

    ``sample`` = None uses every q <= q_limit; an integer m draws m moduli
    uniformly without replacement with ``numpy.random.default_rng(seed)``.
    """
    if k not in (2, 3):
        raise DomainError("ap_remainder_sum supports k in {2, 3}")
    if h < 1 or X < 1:
        raise DomainError("need X >= 1 and h >= 1")
    top = default_q_limit(k, X)
    if q_limit is None:
        q_limit = top
    if not 1 <= q_limit <= top:
        raise DomainError(f"q_limit must lie in [1, {top}]")
    described = None
    if sample is None:
        qs = np.arange(1, q_limit + 1, dtype=np.int64)
    else:
        if not 1 <= sample <= q_limit:
            raise DomainError("sample size must lie in [1, q_limit]")
        rng = np.random.default_rng(seed)
        qs = np.sort(rng.choice(np.arange(1, q_limit + 1, dtype=np.int64), size=sample, replace=False))
        described = f"random(m={sample}, seed={seed})"
    if budget_seconds is not None:
        cost = ap_cost_estimate(X, qs) / AP_OPS_PER_SECOND
        if cost > budget_seconds:
            raise ResourceError(
                f"estimated {cost:.1f}s exceeds budget {budget_seconds}s "
                f"(model: X + 2*X*sum(1/q) entries at {AP_OPS_PER_SECOND:.0e}/s)",
                estimate=cost, budget=budget_seconds)
    ctx = context if context is not None else ProgressionContext(k, X)
    ap = ctx.progression_sums(h, qs)
    by_phi = {}
    for q, a in zip(qs.tolist(), ap.tolist()):
        q1 = q // math.gcd(h, q)
        phi = euler_phi(q1)
        num = abs(a * phi - ctx.coprime_sum(q1))
        by_phi[phi] = by_phi.get(phi, 0) + num
    delta = sum((Fraction(n, d) for d, n in by_phi.items()), Fraction(0))
    return APRemainderRecord(k, h, X, q_limit, delta, described)
