"""Slow, obviously-correct reference implementations used by the tests."""

import math
from fractions import Fraction


def tau_k_brute(k, n):
    """Number of ordered k-tuples with product n, by recursion over divisors."""
    if k == 1:
        return 1
    return sum(tau_k_brute(k - 1, n // d) for d in range(1, n + 1) if n % d == 0)


def tau_k_list(k, N):
    """tau_k(n) for 0 <= n <= N by repeated Dirichlet convolution with 1."""
    t = [0] + [1] * N
    for _ in range(k - 1):
        u = [0] * (N + 1)
        for d in range(1, N + 1):
            if t[d]:
                for m in range(d, N + 1, d):
                    u[m] += t[d]
        t = u
    return t


def correlation_brute(k, ell, X, h):
    tk = tau_k_list(k, X + h)
    tl = tk if ell == k else tau_k_list(ell, X + h)
    return sum(tk[n] * tl[n + h] for n in range(1, X + 1))


def phi(n):
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)


def ap_remainder_brute(k, X, h, qs):
    t = tau_k_list(k, X)
    total = Fraction(0)
    for q in qs:
        q1 = q // math.gcd(h, q)
        ap = sum(t[n] for n in range(1, X + 1) if (n - h) % q == 0)
        cop = sum(t[n] for n in range(1, X + 1) if math.gcd(n, q1) == 1)
        total += abs(ap - Fraction(cop, phi(q1)))
    return total


def padic_density_ratio(k, ell, p, nu, terms=400):
    """E[tau_k(n) tau_l(n + h)] restricted to the prime p, for p^nu || h, over the same for nu = 0.

    Sums the p-adic densities of (v_p(n), v_p(n + h)) directly; independent of the
    Dirichlet-series bookkeeping used by the library.  Exact rationals truncated at
    ``terms`` (the neglected tail is below p^-terms).
    """
    x = Fraction(1, p)

    def tk(a):
        return math.comb(a + k - 1, k - 1)

    def tl(a):
        return math.comb(a + ell - 1, ell - 1)

    def E(nu):
        total = Fraction(0)
        # v_p(n) = a < nu: then v_p(n + h) = a
        for a in range(nu):
            total += (1 - x) * x**a * tk(a) * tl(a)
        # v_p(n) = a > nu: v_p(n + h) = nu
        for a in range(nu + 1, nu + terms):
            total += (1 - x) * x**a * tk(a) * tl(nu)
        # v_p(n) = nu: v_p(n + h) = nu with conditional density (1 - 2x)/(1 - x), else nu + c
        inner = tl(nu) * (1 - 2 * x) / (1 - x)
        for c in range(1, terms):
            inner += x**c * tl(nu + c)
        total += (1 - x) * x**nu * tk(nu) * inner
        return total

    return E(nu) / E(0)
