import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sp

from lmcheck.special import (
    elementary_power_mean,
    gamma_ratio_term,
    gamma_root_ratio,
    log_gamma,
    log_moment_closed,
    log_moment_quadrature,
    phi_series,
)


@given(st.floats(1e-6, 1e6))
@settings(max_examples=200, deadline=None)
def test_log_gamma_against_lgamma(x):
    assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_log_gamma_domain(bad):
    with pytest.raises(ValueError):
        log_gamma(bad)


def test_log_moment_example():
    assert log_moment_quadrature(1.0, 2.0) == pytest.approx(2.0, abs=1e-6)
    assert log_moment_closed(1.0, 2.0) == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("t,q", [(0.3, 0.5), (2.0, 1.0), (5.0, 3.7), (1.0, 8.0)])
def test_log_moment_quadrature_matches_gamma(t, q):
    assert log_moment_quadrature(t, q) == pytest.approx(t * math.gamma(q + 1), rel=1e-8)


def test_gamma_root_ratio_limits():
    assert abs(gamma_root_ratio(100) / math.exp(-1) - 1) < 0.04
    assert abs(gamma_root_ratio(1000) / math.exp(-1) - 1) < 0.01
    assert gamma_root_ratio(100) == pytest.approx(0.380, abs=5e-4)


def test_phi_one_is_exp_minus_one():
    val, _ = phi_series(1, np.array([1.0]))
    assert val[0] == pytest.approx(math.e - 1, rel=1e-15)


@pytest.mark.parametrize("p", [1, 2, 3, 5])
def test_phi_against_incomplete_gamma(p):
    # sum_{j>=p} x^j/j! = e^x P(p, x), with P the regularized lower incomplete gamma
    x = np.array([0.0, 0.01, 0.5, 1.0, 3.0, 10.0, 30.0])
    val, used = phi_series(p, x)
    np.testing.assert_allclose(val, np.exp(x) * sp.gammainc(p, x), rtol=1e-12, atol=0)
    assert used < 512


@pytest.mark.parametrize("p", [0, 1.5, -2, True])
def test_phi_requires_positive_integer(p):
    with pytest.raises(ValueError, match="positive integer"):
        phi_series(p, np.array([1.0]))


def test_gamma_ratio_tends_to_e():
    assert abs(gamma_ratio_term(10_000) - math.e) < 1e-3
    assert gamma_ratio_term(1) == 2.0


def test_elementary_power_mean():
    lhs, rhs = elementary_power_mean(np.array([1.0]), np.array([1.0]), 2.0)
    assert lhs[0] == pytest.approx(2.0) and rhs[0] == pytest.approx(math.sqrt(2) * math.sqrt(2))
    rng = np.random.default_rng(0)
    a, b = rng.exponential(size=1000), rng.exponential(size=1000)
    for q in (1.0, 1.5, 4.0, 50.0):
        lhs, rhs = elementary_power_mean(a, b, q)
        assert np.all(lhs <= rhs * (1 + 1e-12))
