import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from divcorr.errors import DomainError, PrecisionError, SingularityError, TruncationError
from divcorr.series import (LogPolynomial, TruncatedSeries, contour_residue_validate, iterated_residue,
                            reciprocal_shifted, taylor_of_linear_form, x_power, zeta_laurent)

N1 = ("u",)
N2 = ("u", "v")

coef = st.integers(-5, 5).map(mpf)


def close(a, b, tol=mpf("1e-40")):
    return abs(a - b) <= tol * max(1, abs(b))


def random_taylor(names, cs, degree):
    n = len(names)
    exps = [e for e in _exps(n, degree)]
    return TruncatedSeries(names, dict(zip(exps, cs)), degree)


def _exps(n, d):
    if n == 1:
        return [(i,) for i in range(d + 1)]
    return [(i,) + e for i in range(d + 1) for e in _exps(n - 1, d - i)]


@given(st.lists(coef, min_size=10, max_size=10))
def test_exp_log_round_trip(cs):
    with mp.workdps(60):
        cs[0] = abs(cs[0]) + 1
        f = random_taylor(N2, cs, 3)
        g = f.log().exp()
        for e in _exps(2, 3):
            assert close(g.coefficient(e), f.coefficient(e))


@given(st.lists(coef, min_size=10, max_size=10))
def test_inverse(cs):
    with mp.workdps(60):
        cs[0] = abs(cs[0]) + 1
        f = random_taylor(N2, cs, 3)
        one = f * f.inverse()
        for e in _exps(2, 3):
            assert close(one.coefficient(e), mpf(e == (0, 0)))


@given(st.lists(coef, min_size=6, max_size=6), st.lists(coef, min_size=6, max_size=6))
def test_product_is_commutative_and_matches_polynomials(a, b):
    with mp.workdps(40):
        f, g = random_taylor(N2, a, 2), random_taylor(N2, b, 2)
        fg, gf = f * g, g * f
        for e in _exps(2, 2):
            assert close(fg.coefficient(e), gf.coefficient(e))
        # evaluate at a small point against the truncated product of polynomials
        expected = sum(f.coefficient(e1) * g.coefficient(e2)
                       for e1 in _exps(2, 2) for e2 in _exps(2, 2)
                       if (e1[0] + e2[0], e1[1] + e2[1]) == (1, 1))
        assert close(fg.coefficient((1, 1)), expected)


def test_zeta_laurent_against_mpmath():
    with mp.workdps(60):
        Z = zeta_laurent(N1, (1,), 6, digits=50)
        assert Z.coefficient((-1,)) == 1
        for j in range(0, 6):
            ref = (-1) ** j * mpmath.stieltjes(j) / mpmath.factorial(j)
            assert close(Z.coefficient((j,)), ref, mpf("1e-45"))


def test_zeta_laurent_evaluates_zeta():
    with mp.workdps(60):
        Z = zeta_laurent(N1, (1,), 30, digits=50)
        u = mpf("0.01")
        val = sum(c * u ** e[0] for e, c in Z.terms.items())
        assert close(val, mpmath.zeta(1 + u), mpf("1e-40"))


def test_reciprocal_and_linear_forms():
    with mp.workdps(40):
        R = reciprocal_shifted(N2, 2, (1, 3), 8)
        # 1/(2 + u + 3v) at small u, v
        u, v = mpf("1e-3"), mpf("2e-3")
        val = sum(c * u ** e[0] * v ** e[1] for e, c in R.terms.items())
        assert close(val, 1 / (2 + u + 3 * v), mpf("1e-20"))
        T = taylor_of_linear_form(N2, [1, 1, Fraction(1, 2)], (1, -1), 2)
        assert close(T.coefficient((1, 1)), mpf(-1))


def test_negative_power_of_two_variable_form_needs_caps():
    with pytest.raises(TruncationError):
        TruncatedSeries.of_linear_form(N2, {-1: 1}, (1, 1), 3)
    S = TruncatedSeries.of_linear_form(N2, {-1: 1}, (1, 1), 3, caps=(None, 3))
    # 1/(u + v) = 1/u - v/u^2 + v^2/u^3 - ...
    assert S.coefficient((-1, 0)) == 1 and S.coefficient((-2, 1)) == -1 and S.coefficient((-3, 2)) == 1


def test_substitute():
    with mp.workdps(40):
        f = random_taylor(N2, [mpf(c) for c in (1, 2, 3, 4, 5, 6)], 2)
        g = f.substitute(N2, [(1, 1), (0, 1)])   # u -> u + v
        u, v = mpf("1e-4"), mpf("3e-4")
        lhs = sum(c * u ** e[0] * v ** e[1] for e, c in g.terms.items())
        rhs = sum(c * (u + v) ** e[0] * v ** e[1] for e, c in f.terms.items())
        assert close(lhs, rhs, mpf("1e-30"))


def test_truncation_errors():
    f = TruncatedSeries.constant(N2, 1, 2, caps=(None, 1))
    with pytest.raises(TruncationError):
        f.coefficient((0, 2))
    with pytest.raises(TruncationError):
        f.coefficient((3, 0))
    with pytest.raises(SingularityError):
        TruncatedSeries.variable(N2, "u", 2).inverse()
    with pytest.raises(SingularityError):
        TruncatedSeries.monomial(N2, (-1, 0), 1, 2).exp()


def test_one_variable_residue_matches_contour():
    # Res_{u=0} zeta(1+u)^2 / (1+u) X^u: coefficients of log X from the series, checked
    # against a numerical contour integral at X = 7
    with mp.workdps(50):
        G = zeta_laurent(N1, (1,), 6, digits=40) ** 2 * reciprocal_shifted(N1, 1, (1,), 6)
        P = iterated_residue(G, x_power(0, (1,)), 40)
        assert P.degree == 1
        X = mpf(7)
        num = contour_residue_validate(lambda u: mpmath.zeta(1 + u) ** 2 / (1 + u) * X**u, [mpf("0.5")],
                                       nodes=32, digits=25)
        assert close(P(X), mpmath.re(num), mpf("1e-22"))


def test_two_variable_residue_matches_contour():
    # G(u, v) = zeta(1+u) zeta(1+v) / (1 + u + v) with nested contours |v| < |u|
    with mp.workdps(40):
        deg = 6
        G = (zeta_laurent(N2, (1, 0), deg, digits=35) * zeta_laurent(N2, (0, 1), deg, digits=35)
             * reciprocal_shifted(N2, 1, (1, 1), deg))
        r = iterated_residue(G).coeffs[0]
        num = contour_residue_validate(lambda u, v: mpmath.zeta(1 + u) * mpmath.zeta(1 + v) / (1 + u + v),
                                       [mpf("0.3"), mpf("0.1")], nodes=16, digits=15, max_nodes=64)
        assert close(r, mpmath.re(num), mpf("1e-14"))


def test_contour_validate_errors():
    with pytest.raises(DomainError):
        contour_residue_validate(lambda u, v: 1, [0.1, 0.2])
    with pytest.raises(PrecisionError):
        contour_residue_validate(lambda u: mpmath.exp(1 / u**3), [mpf("0.05")], nodes=8, digits=30, max_nodes=16)


def test_log_polynomial():
    with mp.workdps(40):
        P = LogPolynomial((mpf(1), mpf(2)), 20)
        X = mpf(100)
        assert close(P(X), X * (1 + 2 * mpmath.log(X)))
        Q = P + P.scale(2)
        assert close(Q.coeffs[1], mpf(6))
        js = P.to_json()
        assert js["degree"] == 1 and js["coefficients"][1].startswith("2.000000")
        with pytest.raises(DomainError):
            P + LogPolynomial((mpf(1),), 20, Fraction(0))
