"""Small exact number-theory helpers (trial division scale, n <= 1e12)."""

import math
from functools import lru_cache

from .errors import DomainError

FACTOR_LIMIT = 10**12


@lru_cache(maxsize=4096)
def factorize(n):
    """Return the prime factorization of n as a tuple of (p, e) pairs."""
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    if n > FACTOR_LIMIT:
        raise DomainError(f"{n} exceeds the trial-division limit {FACTOR_LIMIT}")
    out = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    p = 5
    step = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def valuation(n, p):
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def euler_phi(n):
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def radical(n):
    return math.prod(p for p, _ in factorize(n))


def squarefree_divisors(n):
    """Yield (d, mu(d)) for every squarefree divisor d of n."""
    divs = [(1, 1)]
    for p, _ in factorize(n):
        divs += [(d * p, -mu) for d, mu in divs]
    return divs


def divisors(n):
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def sigma_minus_one(n):
    """Exact sum of 1/d over the divisors d of n, as a Fraction."""
    from fractions import Fraction

    return sum((Fraction(1, d) for d in divisors(n)), Fraction(0))


def iroot(n, k):
    """Largest integer r with r**k <= n."""
    if n < 0:
        raise DomainError("negative radicand")
    if n < 2:
        return n
    r = int(round(n ** (1.0 / k)))
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def primes_upto(n):
    """Sorted list of primes <= n (plain Eratosthenes, n up to ~1e8)."""
    import numpy as np

    if n < 2:
        return np.zeros(0, dtype=np.int64)
    mark = np.ones(n + 1, dtype=bool)
    mark[:2] = False
    mark[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if mark[p]:
            mark[p * p :: 2 * p] = False
    return np.flatnonzero(mark).astype(np.int64)
