import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blmab.errors import ConvergenceError, DomainError
from blmab.lambertw import (
    AlphaParams,
    WEvalConfig,
    admitted_arms,
    alpha_subexp,
    alpha_subpareto,
    lambert_w0,
    min_horizon_subexp,
    min_horizon_subpareto,
)


def bisect_w(x, tol=1e-13):
    """Independent oracle: bisection on w*exp(w) - x over [0, max(1, log x + 1)]."""
    lo, hi = 0.0, max(1.0, math.log(x) + 1.0) if x > 1 else 1.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) < x:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_known_values():
    assert lambert_w0(0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, abs=1e-12)
    assert lambert_w0(1.0) == pytest.approx(0.5671432904097838, abs=1e-12)
    assert lambert_w0(5 * math.exp(5)) == pytest.approx(5.0, abs=1e-12)


@pytest.mark.parametrize("x", [1e-8, 0.3, 1.0, 2.0, math.e, 10.0, 1e5, 1e9, 1e15])
def test_matches_bisection(x):
    assert lambert_w0(x) == pytest.approx(bisect_w(x), rel=1e-11, abs=1e-14)


def test_bisection_oracle_frozen_values():
    assert bisect_w(1.0) == pytest.approx(0.5671432904097838, abs=1e-12)
    assert bisect_w(1e5) == pytest.approx(9.28457142862211, abs=1e-10)


@pytest.mark.parametrize("bad", [-1e-9, -1.0, math.inf, math.nan])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        lambert_w0(bad)


def test_convergence_error_reports_residual():
    with pytest.raises(ConvergenceError) as info:
        lambert_w0(1e6, WEvalConfig(tolerance=1e-15, max_iterations=1))
    assert info.value.residual is not None and info.value.residual > 0


def test_config_validation():
    with pytest.raises(DomainError):
        WEvalConfig(tolerance=0)
    with pytest.raises(DomainError):
        WEvalConfig(max_iterations=0)


@given(st.floats(min_value=0, max_value=20, allow_nan=False))
def test_inverse_identity(x):
    assert abs(lambert_w0(x * math.exp(x)) - x) <= 1e-9


@given(st.floats(min_value=math.e, max_value=1e9, allow_nan=False))
def test_sandwich(x):
    w = lambert_w0(x)
    assert math.log(x) / 2 < w <= math.log(x) * (1 + 1e-15)


def test_strictly_increasing_on_grid():
    xs = np.concatenate([[0.0], np.logspace(-6, 9, 2000)])
    ws = np.array([lambert_w0(x) for x in xs])
    assert np.all(np.diff(ws) > 0)


def test_claim2_monotone_in_c():
    for lam, T in [(0.5, 100), (1.0, 10_000), (0.1, 10**6)]:
        assert lam * T >= math.e
        cs = np.linspace(0.01, 0.5, 50)
        vals = [math.exp(-c * lambert_w0(lam * T / c)) for c in cs]
        assert np.all(np.diff(vals) < 0)


def test_alpha_subexp_examples():
    a = alpha_subexp(AlphaParams(100_000, lam=0.5))
    assert a == pytest.approx(bisect_w(1e5) / 1e5, rel=1e-10)
    assert a == pytest.approx(9.2845e-5, rel=1e-4)
    assert admitted_arms(a, 100_000) == 10
    # lam T / c = e
    p = AlphaParams(1, lam=math.e / 2)
    assert alpha_subexp(p) == pytest.approx(1 / math.e, abs=1e-12)
    assert admitted_arms(alpha_subexp(AlphaParams(1000, lam=1e9)), 1000) == 1


def test_alpha_general_c():
    p = AlphaParams(5000, lam=0.3, c=0.7)
    x = 0.3 * 5000 / 0.7
    assert alpha_subexp(p) == pytest.approx(bisect_w(x) / x, rel=1e-10)


def test_alpha_subpareto_examples():
    assert alpha_subpareto(AlphaParams(10_000, beta=0.5)) == pytest.approx(0.01, rel=1e-12)
    assert admitted_arms(0.01, 10_000) == 100
    assert alpha_subpareto(AlphaParams(1, beta=3.0, c=0.2)) == 1.0
    assert alpha_subpareto(AlphaParams(100_000, beta=0.25)) == pytest.approx(0.021544, abs=1e-6)


def test_alpha_in_unit_interval():
    assert 0 < alpha_subexp(AlphaParams(1, lam=1e-6)) <= 1.0
    assert alpha_subpareto(AlphaParams(1, beta=1e-6)) == 1.0


def test_alpha_params_validation():
    with pytest.raises(DomainError):
        AlphaParams(10)
    with pytest.raises(DomainError):
        AlphaParams(10, lam=1.0, beta=1.0)
    with pytest.raises(DomainError):
        AlphaParams(0, lam=1.0)
    with pytest.raises(DomainError):
        AlphaParams(10, lam=1.0, c=0)


def test_min_horizons():
    assert min_horizon_subexp(1, 0.5) == pytest.approx(18 * math.log(36))
    assert min_horizon_subexp(1, 0.5) == pytest.approx(64.503, abs=1e-3)
    assert min_horizon_subexp(1, 1) == pytest.approx(129.006, abs=1e-3)
    assert min_horizon_subexp(2, 0.5) == pytest.approx(min_horizon_subexp(1, 0.5) / 2)
    assert min_horizon_subpareto(0.25, 0.5) == pytest.approx(36**3)
    assert min_horizon_subpareto(0.10, 0.5) == pytest.approx(36**6)
    assert min_horizon_subpareto(1e9, 0.5) == pytest.approx(36, rel=1e-6)


@given(
    st.floats(min_value=1e-3, max_value=10),
    st.floats(min_value=0.05, max_value=1.0),
)
def test_feasibility_equivalence(lam, c):
    thr = min_horizon_subexp(lam, c)
    for T in (math.floor(thr) + 1, math.ceil(thr) - 1):
        if T < 1:
            continue
        below = alpha_subexp(AlphaParams(T, lam=lam, c=c)) < 1 / 36
        assert below == (T > thr)
