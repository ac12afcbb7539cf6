from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from divcorr import bigreal
from divcorr.bigreal import BigReal, PrimeExpansion, euler_product, euler_sum
from divcorr.errors import DomainError, PoleError


def digits_of_agreement(a, b):
    with mp.workdps(200):
        d = abs(mpmath.mpmathify(a) - mpmath.mpmathify(b))
        if d == 0:
            return 999
        return int(-mpmath.log10(d / max(abs(mpmath.mpmathify(b)), mpf("1e-300"))))


# --- zeta -----------------------------------------------------------------------------

@given(st.floats(-1.9, 30, allow_nan=False).filter(lambda s: abs(s - 1) > 1e-3))
def test_zeta_real_against_mpmath(s):
    with mp.workdps(80):
        assert digits_of_agreement(bigreal.zeta(s, 60), mpmath.zeta(mpf(s))) >= 58


@given(st.floats(0.1, 3), st.floats(-40, 40))
def test_zeta_complex_against_mpmath(re, im):
    s = mpmath.mpc(re, im)
    if abs(s - 1) < 1e-3:
        return
    with mp.workdps(60):
        assert digits_of_agreement(bigreal.zeta(s, 40), mpmath.zeta(s)) >= 38


def test_zeta_at_two_is_pi_squared_over_six():
    with mp.workdps(130):
        assert digits_of_agreement(bigreal.zeta(2, 120), mpmath.pi**2 / 6) >= 118


def test_zeta_pole_and_domain():
    with pytest.raises(PoleError):
        bigreal.zeta(1)
    with pytest.raises(DomainError):
        bigreal.zeta(-3)


@pytest.mark.parametrize("m", range(1, 6))
def test_zeta_derivatives_at_two(m):
    with mp.workdps(80):
        assert digits_of_agreement(bigreal.zeta_derivative(m, 2, 60), mpmath.zeta(2, derivative=m)) >= 57


@pytest.mark.parametrize("m", range(0, 7))
def test_stieltjes_against_mpmath(m):
    with mp.workdps(120):
        assert digits_of_agreement(bigreal.stieltjes(m, 100), mpmath.stieltjes(m)) >= 95


def test_laurent_at_one():
    c = bigreal.zeta_laurent_at_one(3, 50)
    with mp.workdps(70):
        for j, cj in enumerate(c):
            assert digits_of_agreement(cj, (-1) ** j * mpmath.stieltjes(j) / mpmath.factorial(j)) >= 48


# --- prime zeta -----------------------------------------------------------------------

@pytest.mark.parametrize("s", [2, 3, 4.5, 10, 40])
def test_prime_zeta_against_mpmath(s):
    with mp.workdps(110):
        assert digits_of_agreement(bigreal.prime_zeta(s, 90), mpmath.primezeta(mpf(s))) >= 88


def test_prime_zeta_direct_sum_at_large_s():
    # at s = 60 the sum is dominated by the first few primes
    with mp.workdps(60):
        direct = sum(mpf(p) ** -60 for p in (2, 3, 5, 7, 11, 13))
        assert digits_of_agreement(bigreal.prime_zeta(60, 40), direct) >= 38


@pytest.mark.parametrize("m,s", [(1, 2), (2, 2), (3, 3)])
def test_prime_zeta_derivatives(m, s):
    with mp.workdps(80):
        ref = mpmath.diff(lambda t: mpmath.primezeta(t), mpf(s), m)
        assert digits_of_agreement(bigreal.prime_zeta_deriv(m, s, 50), ref) >= 40


@pytest.mark.parametrize("Q", [2, 13, 50])
def test_prime_log_power_sum_excluded_primes(Q):
    with mp.workdps(60):
        full = bigreal.prime_log_power_sum(2, 3, 2, 40)
        head = sum(mpmath.log(p) ** 2 * mpf(p) ** -3 for p in bigreal.primes_upto(Q).tolist() if p > 2)
        assert digits_of_agreement(bigreal.prime_log_power_sum(2, 3, Q, 40) + head, full) >= 38


def test_prime_zeta_domain():
    with pytest.raises(DomainError):
        bigreal.prime_zeta(1.2)


# --- prime sums and products ----------------------------------------------------------

def test_euler_product_is_one_over_zeta():
    # prod_p (1 - p^-2) = 6 / pi^2
    r = euler_product([1, 0, -1], [1], 90)
    with mp.workdps(110):
        assert digits_of_agreement(r.value, 6 / mpmath.pi**2) >= 88


def test_euler_product_rational():
    # prod_p (1 + p^-2) / (1 - p^-2) = zeta(2)^2 / zeta(4) = 5/2
    r = euler_product([1, 0, 1], [1, 0, -1], 60)
    assert digits_of_agreement(r.value, Fraction(5, 2).numerator / mpf(2)) >= 58


def test_euler_sum_log_weight():
    # sum_p log p / (p^2 - 1) = -zeta'(2)/zeta(2)
    e = PrimeExpansion.from_rational([0, 0, 1], [1, 0, -1], 1, 50)
    with mp.workdps(110):
        ref = -mpmath.zeta(2, derivative=1) / mpmath.zeta(2)
        assert digits_of_agreement(euler_sum(e, 90).value, ref) >= 87


@given(st.integers(2, 6), st.integers(1, 3))
def test_prime_sum_matches_prime_zeta(s, c):
    # sum_p c p^-s with R(x) = c x^s
    e = PrimeExpansion.from_rational([0] * s + [c], [1], 0, 2)
    with mp.workdps(60):
        assert digits_of_agreement(euler_sum(e, 40).value, c * mpmath.primezeta(s)) >= 38


def test_excluded_prime_choice_does_not_matter():
    vals = [euler_product([1, 0, -4, 4, -1], [1], 60, exclude_upto=Q).value for Q in (2, 13, 50)]
    assert digits_of_agreement(vals[0], vals[2]) >= 58 and digits_of_agreement(vals[1], vals[2]) >= 58


def test_nonpositive_local_factor_rejected():
    with pytest.raises(DomainError):
        euler_product([1, -2], [1], 30)


def test_bigreal_json_and_str():
    b = BigReal(mpf(1) / 3, 10)
    assert str(b) == "0.3333333333"
    assert b.to_json("third") == {"name": "third", "digits": 10, "value": "0.3333333333"}
    assert abs(float(b) - 1 / 3) < 1e-15
