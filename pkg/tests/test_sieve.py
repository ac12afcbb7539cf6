import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from divcorr import arith, sieve
from divcorr.errors import DomainError, ResourceError

from oracles import ap_remainder_brute, correlation_brute, tau_k_brute, tau_k_list


# --- arithmetic helpers ---------------------------------------------------------------

@given(st.integers(1, 10**9))
def test_factorize_reconstructs(n):
    fac = arith.factorize(n)
    assert math.prod(p**e for p, e in fac) == n
    assert all(arith.factorize(p) == ((p, 1),) for p, _ in fac)


@given(st.integers(1, 3000))
def test_phi_and_divisors_brute(n):
    assert arith.euler_phi(n) == sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)
    assert sorted(arith.divisors(n)) == [d for d in range(1, n + 1) if n % d == 0]


@given(st.integers(0, 10**30), st.integers(2, 5))
def test_iroot(n, k):
    r = arith.iroot(n, k)
    assert r**k <= n < (r + 1) ** k


def test_primes_upto():
    ps = arith.primes_upto(100)
    assert list(ps) == [p for p in range(2, 101) if all(p % d for d in range(2, p))]


# --- tau tables -----------------------------------------------------------------------

@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_tau_table_matches_enumeration(k):
    N = 10**5
    ref = tau_k_list(k, N)
    assert np.array_equal(sieve.tau_array(k, N), np.asarray(ref, dtype=np.int64))


@given(st.integers(2, 5), st.integers(1, 400))
def test_tau_matches_recursive_definition(k, n):
    assert int(sieve.tau_array(k, n)[n]) == tau_k_brute(k, n)


@given(st.integers(2, 5), st.integers(1, 10**6), st.integers(1, 2000))
def test_tau_table_window(k, lo, width):
    t = sieve.tau_table(k, lo, lo + width, segment_size=1 << 12)
    full = sieve.tau_array(k, lo + width)
    assert np.array_equal(t.values.astype(np.int64), full[lo:lo + width])


def test_tau_multiplicative_random_pairs():
    rng = random.Random(1)
    tab = {k: sieve.tau_array(k, 10**7) for k in (2, 3, 4, 5)}
    checked = 0
    while checked < 10**4:
        a = rng.randint(1, 3162)
        b = rng.randint(1, 10**7 // a)
        if math.gcd(a, b) != 1:
            continue
        for k, t in tab.items():
            assert t[a * b] == t[a] * t[b]
        checked += 1


def test_table_binary_round_trip(tmp_path):
    t = sieve.tau_table(3, 1000, 1100)
    blob = t.to_bytes()
    assert blob[:4] == b"TAUK"
    assert int.from_bytes(blob[4:6], "little") == 1 and blob[6] == 3
    assert int.from_bytes(blob[7:15], "little") == 1000 and int.from_bytes(blob[15:23], "little") == 1100
    back = sieve.TauTable.from_bytes(blob)
    assert (back.k, back.lo, back.hi) == (3, 1000, 1100)
    assert np.array_equal(back.values, t.values)
    with pytest.raises(ValueError):
        sieve.TauTable.from_bytes(b"XXXX" + blob[4:])


def test_tau_table_errors():
    with pytest.raises(DomainError):
        sieve.tau_table(6, 1, 10)
    with pytest.raises(DomainError):
        sieve.tau_table(2, 10, 10)
    with pytest.raises(ResourceError):
        sieve.tau_table(2, 1, 10**6, budget=1000)


# --- correlations ---------------------------------------------------------------------

@given(st.integers(2, 5), st.integers(2, 5), st.integers(1, 3000), st.integers(1, 50))
def test_correlate_brute(k, ell, X, h):
    assert sieve.correlate(k, ell, X, h).value == correlation_brute(k, ell, X, h)


def test_correlate_small_values():
    assert sieve.correlate(2, 2, 10, 1).value == 74
    assert sieve.correlate(2, 2, 1, 1).value == 2


def test_correlate_segmentation_and_threads_invariant():
    X = 3 * 10**6
    ref = sieve.correlate(3, 3, X, 1, segment_size=1 << 22).value
    assert sieve.correlate(3, 3, X, 1, segment_size=1 << 16).value == ref
    assert sieve.correlate(3, 3, X, 1, segment_size=1 << 16, threads=4).value == ref


def test_prefix_and_checkpoints_agree():
    X = 200_000
    P = sieve.correlation_prefix(3, 2, 6, X, segment_size=1 << 14)
    grid = [1, 17, 1000, 65536, 99999, X]
    assert sieve.correlation_checkpoints(3, 2, 6, grid, segment_size=1 << 14) == [int(P[g]) for g in grid]
    assert int(P[X]) == sieve.correlate(3, 2, X, 6).value
    assert int(P[2000]) == correlation_brute(3, 2, 2000, 6)


def test_correlate_domain_errors():
    with pytest.raises(DomainError):
        sieve.correlate(2, 2, 0, 1)
    with pytest.raises(DomainError):
        sieve.correlate(2, 2, 10, 0)
    with pytest.raises(DomainError):
        sieve.correlate(2, 2, 2**40, 1)


# --- Hooley decomposition -------------------------------------------------------------

@pytest.mark.parametrize("scale", ["n", "10n", "n^2"])
def test_hooley_identity_all_n(scale):
    step = 1 if scale == "n" else 7
    for n in range(1, 10**4 + 1, step):
        X = {"n": n, "10n": 10 * n, "n^2": n * n}[scale]
        assert sieve.hooley_identity_check(n, X)[3], n


def test_hooley_identity_counts_small():
    # n = 12 has tau_3 = 18 ordered factorizations
    s1, s2, s3, ok = sieve.hooley_identity_check(12, 12)
    assert ok and 3 * s1 - 3 * s2 + s3 == 18


@pytest.mark.parametrize("X", [10, 10**3, 10**4, 10**5])
@pytest.mark.parametrize("h", [1, 2, 6, 12])
def test_hooley_decomposition(X, h):
    s = sieve.hooley_sigma_sums(X, h)
    assert s.combined == sieve.correlate(3, 3, X, h).value


# --- arithmetic progressions ----------------------------------------------------------

def test_coprime_tau_sum():
    assert sieve.coprime_tau_sum(3, 10, 1) == 53
    assert sieve.coprime_tau_sum(2, 10, 2) == 1 + 2 + 2 + 2 + 3  # n = 1, 3, 5, 7, 9
    t = tau_k_list(3, 5000)
    for q in (6, 30, 77, 210):
        assert sieve.coprime_tau_sum(3, 5000, q) == sum(t[n] for n in range(1, 5001) if math.gcd(n, q) == 1)


def test_ap_remainder_q1_is_zero():
    for k, X, h in ((2, 100, 1), (3, 10**4, 5), (2, 10**5, 12)):
        assert sieve.ap_remainder_sum(k, X, h, q_limit=1).delta_sum == 0


def test_ap_remainder_brute_k2():
    rec = sieve.ap_remainder_sum(2, 10**4, 1, q_limit=100)
    assert rec.delta_sum == ap_remainder_brute(2, 10**4, 1, range(1, 101))


@given(st.integers(2, 3), st.integers(50, 3000), st.integers(1, 30))
def test_ap_remainder_brute_random(k, X, h):
    ql = sieve.default_q_limit(k, X)
    assert sieve.ap_remainder_sum(k, X, h).delta_sum == ap_remainder_brute(k, X, h, range(1, ql + 1))


def test_ap_remainder_sampling_deterministic():
    a = sieve.ap_remainder_sum(3, 10**5, 1, sample=50, seed=11)
    b = sieve.ap_remainder_sum(3, 10**5, 1, sample=50, seed=11)
    c = sieve.ap_remainder_sum(3, 10**5, 1, sample=50, seed=12)
    assert a == b and a.delta_sum != c.delta_sum
    assert a.q_sampled == "random(m=50, seed=11)"
    assert a.delta_sum > 0


def test_ap_remainder_errors():
    with pytest.raises(DomainError):
        sieve.ap_remainder_sum(4, 100, 1)
    with pytest.raises(DomainError):
        sieve.ap_remainder_sum(2, 100, 1, q_limit=11)
    with pytest.raises(ResourceError) as info:
        sieve.ap_remainder_sum(3, 10**8, 1, budget_seconds=1)
    assert info.value.estimate > 1


def test_default_q_limit():
    assert sieve.default_q_limit(2, 10**6) == 1000
    assert sieve.default_q_limit(3, 10**6) == 10**4
    assert sieve.default_q_limit(3, 10**6 - 1) == 9999
