import csv
import io
import json

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from divcorr import analysis, mainterms, sieve
from divcorr.analysis import ErrorSeries, bound_check, loglog_fit
from divcorr.errors import DegenerateFitError, DomainError


def synthetic(X, E):
    X = np.asarray(X, dtype=np.int64)
    return ErrorSeries(0, 0, 1, X, np.zeros(len(X), dtype=np.int64), np.asarray(E, dtype=np.float64))


@given(st.floats(0.1, 1.5), st.floats(0.01, 100))
def test_fit_recovers_exact_power_law(alpha, C):
    X = analysis.default_grid(10**6, 10)
    s = synthetic(X, C * X.astype(float) ** alpha)
    for method in ("record-points", "least-squares"):
        f = loglog_fit(s, method)
        assert f.alpha == pytest.approx(alpha, rel=1e-10)
        assert f.C == pytest.approx(C, rel=1e-9)


def test_record_points_are_running_maxima():
    A = np.array([1, 3, 2, 3, 5, 4, 6])
    assert analysis.record_points(np.arange(1, 8), A).tolist() == [0, 1, 4, 6]


def test_fit_degenerate():
    X = np.arange(1, 50)
    with pytest.raises(DegenerateFitError):
        loglog_fit(synthetic(X, np.zeros(len(X))))
    with pytest.raises(DegenerateFitError):
        loglog_fit(synthetic(X, [1.0] * 3 + [0.0] * (len(X) - 3)))
    with pytest.raises(DomainError):
        loglog_fit(synthetic(X, np.ones(len(X))), method="two-point")


def test_bound_check_trivial_and_crossing():
    X = np.arange(1, 1000)
    assert bound_check(synthetic(X, np.zeros(len(X))), 1e-9, 0.5).passed
    res = bound_check(synthetic(X, X.astype(float) ** 0.6), 1.0, 0.5)
    assert not res.passed and res.first_violation == 2
    assert res.worst_ratio == pytest.approx(999**0.1)


@given(st.floats(0.2, 1.0), st.floats(0.5, 10), st.integers(0, 2**32 - 1), st.floats(0, 0.1), st.floats(0, 0.5))
def test_fit_and_bound_are_consistent(alpha, C, seed, dalpha, dC):
    # records on C X^alpha, every other point strictly below the running maximum: the fit
    # returns (C, alpha) with one-sided residuals, and any dominating bound passes
    rng = np.random.default_rng(seed)
    X = analysis.default_grid(10**5, 20)
    line = C * X.astype(float) ** alpha
    on = rng.random(len(X)) < 0.4
    on[0] = on[1] = True
    E = np.empty(len(X))
    best = 0.0
    for i in range(len(X)):
        E[i] = line[i] if on[i] else best * rng.uniform(0.1, 0.99)
        best = max(best, E[i])
    f = loglog_fit(synthetic(X, E))
    assert f.alpha == pytest.approx(alpha, rel=1e-8) and f.C == pytest.approx(C, rel=1e-7)
    assert np.all(E <= f.C * X.astype(float) ** f.alpha * (1 + 1e-9))
    assert bound_check(synthetic(X, E), f.C * (1 + 1e-9) + dC, f.alpha + dalpha).passed


def test_error_series_against_direct_evaluation():
    grid = np.array([10, 1000, 54321, 10**6])
    s = analysis.error_series(2, 2, 1, grid)
    P = mainterms.m22_coefficients(1)
    with mp.workdps(50):
        for X, D, E in zip(grid.tolist(), s.D, s.E):
            assert int(D) == sieve.correlate(2, 2, X, 1).value
            assert E == pytest.approx(float(int(D) - P(mpf(X))), rel=1e-14, abs=1e-12)


def test_error_series_segmentation_invariant():
    grid = analysis.default_grid(300_000, 20)
    a = analysis.error_series(3, 3, 1, grid, segment_size=1 << 14)
    b = analysis.error_series(3, 3, 1, grid, segment_size=1 << 20)
    assert np.array_equal(a.D, b.D) and np.array_equal(a.E, b.E)


def test_error_series_checkpoint_path_matches_prefix_path(monkeypatch):
    grid = np.array([100, 5000, 77777])
    a = analysis.error_series(2, 2, 3, grid)
    monkeypatch.setattr(analysis, "PREFIX_LIMIT", 10)
    b = analysis.error_series(2, 2, 3, grid)
    assert [int(v) for v in a.D] == [int(v) for v in b.D]
    assert np.array_equal(a.E, b.E)


def test_error_series_rejects_bad_grids():
    with pytest.raises(DomainError):
        analysis.error_series(2, 2, 1, [5, 3])
    with pytest.raises(DomainError):
        analysis.error_series(2, 2, 1, [])
    with pytest.raises(DomainError):
        analysis.main_term_polynomial(3, 3, 2)


def test_csv_format():
    s = analysis.error_series(2, 2, 1, [100, 1000])
    rows = list(csv.reader(io.StringIO(s.to_csv(7, 0.51))))
    assert rows[0] == ["X", "E", "bound_upper", "bound_lower"]
    assert rows[1][0] == "100" and float(rows[1][2]) == pytest.approx(7 * 100**0.51)
    assert float(rows[2][1]) == s.E[1]  # 25 significant digits round-trip the float


def test_default_grid():
    g = analysis.default_grid(10**6)
    assert g[0] == 10 and g[-1] == 10**6 and np.all(np.diff(g) > 0)
    assert len(g) <= 60 * 5 + 2
    # 60 per decade: consecutive ratios about 10^(1/60) at the top end
    assert g[-1] / g[-2] == pytest.approx(10 ** (1 / 60), rel=1e-3)


def test_e33_bound_on_sampled_grids():
    # every 100th X and the geometric grid stay inside 1050 X^0.501; the every-integer
    # check is an acceptance line (single large tau_3 tau_3 terms cross the line)
    for grid in (np.arange(100, 10**6 + 1, 100), analysis.default_grid(10**6)):
        assert bound_check(analysis.error_series(3, 3, 1, grid), 1050, 0.501).passed


def test_e33_at_one_million_vs_known_spike():
    s = analysis.error_series(3, 3, 1, [203839, 203840])
    # tau_3(203840) tau_3(203841) = 244944 moves E by that much in one step
    assert s.D[1] - s.D[0] == 244944
    assert abs(s.E[1]) > 1050 * 203840**0.501


def test_ap_probe():
    grid = [1000, 3000, 10_000, 30_000, 100_000]
    probe = analysis.ap_exponent_probe(3, 1, grid)
    assert 0.3 < probe.fit.alpha < 1.5
    text = probe.to_csv()
    assert text.splitlines()[0] == "k,h,X,q_limit,delta_sum" and len(text.splitlines()) == 6
    json.loads(probe.fit.to_json())
    with pytest.raises(DegenerateFitError):
        analysis.ap_exponent_probe(2, 1, grid, q_limit=1)
