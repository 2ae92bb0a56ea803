from math import gamma

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sobolev_uniformity.specialfun import (
    chebyshev_sequence,
    chi2_cdf,
    chi2_sf,
    chi2_upper_quantile,
    gegenbauer,
    gegenbauer_sequence,
    legendre,
)

# hand-expanded coefficients, lowest degree first
LEGENDRE = {
    0: [1],
    1: [0, 1],
    2: [-1 / 2, 0, 3 / 2],
    3: [0, -3 / 2, 0, 5 / 2],
    4: [3 / 8, 0, -30 / 8, 0, 35 / 8],
    5: [0, 15 / 8, 0, -70 / 8, 0, 63 / 8],
    6: [-5 / 16, 0, 105 / 16, 0, -315 / 16, 0, 231 / 16],
}
# C^1_k = Chebyshev U_k
GEGENBAUER_1 = {
    0: [1],
    1: [0, 2],
    2: [-1, 0, 4],
    3: [0, -4, 0, 8],
    4: [1, 0, -12, 0, 16],
    5: [0, 6, 0, -32, 0, 32],
    6: [-1, 0, 24, 0, -80, 0, 64],
}


@pytest.mark.parametrize(
    "k, t, expected",
    [(0, 0.3, 1.0), (2, 0.0, -0.5), (3, 0.5, -0.4375)],
)
def test_legendre_examples(k, t, expected):
    assert legendre(k, t) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "k, alpha, t, expected",
    [(2, 1.0, 0.5, 0.0), (2, 1.0, 1.0, 3.0), (2, 0.5, 0.0, -0.5)],
)
def test_gegenbauer_examples(k, alpha, t, expected):
    assert gegenbauer(k, alpha, t) == pytest.approx(expected, abs=1e-15)


def test_recurrences_match_explicit_polynomials():
    t = np.random.default_rng(0).uniform(-1, 1, 100)
    for k in range(7):
        np.testing.assert_allclose(legendre(k, t), np.polynomial.polynomial.polyval(t, LEGENDRE[k]), atol=1e-12)
        np.testing.assert_allclose(gegenbauer(k, 1.0, t), np.polynomial.polynomial.polyval(t, GEGENBAUER_1[k]), atol=1e-12)


def test_gegenbauer_half_is_legendre():
    t = np.linspace(-1, 1, 101)
    for k in range(21):
        np.testing.assert_allclose(gegenbauer(k, 0.5, t), legendre(k, t), atol=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 3.0])
def test_gegenbauer_at_one(alpha):
    # C^a_k(1) = binom(k + 2a - 1, k)
    for k in range(10):
        expected = gamma(k + 2 * alpha) / (gamma(k + 1) * gamma(2 * alpha))
        assert gegenbauer(k, alpha, 1.0) == pytest.approx(expected, rel=1e-12)
    assert gegenbauer(7, 1.0, 1.0) == 8.0


def test_legendre_bounded():
    t = np.linspace(-1, 1, 2001)
    for k in range(21):
        assert np.all(np.abs(legendre(k, t)) <= 1 + 1e-12)
        assert legendre(k, 1.0) == pytest.approx(1.0)


def test_gegenbauer_rejects_nonpositive_alpha():
    with pytest.raises(ValueError):
        gegenbauer(2, 0.0, 0.3)
    with pytest.raises(ValueError):
        gegenbauer_sequence(3, -0.5, 0.3)


def test_chebyshev_is_cosine():
    theta = np.linspace(0, np.pi, 50)
    seq = chebyshev_sequence(8, np.cos(theta))
    for m in range(9):
        np.testing.assert_allclose(seq[m], np.cos(m * theta), atol=1e-12)


def test_chi2_cdf_examples():
    assert chi2_cdf(0.0, 3) == 0.0
    assert chi2_cdf(7.8147, 3) == pytest.approx(0.95, abs=1e-4)
    assert chi2_cdf(21.666, 9) == pytest.approx(0.99, abs=1e-4)


@pytest.mark.parametrize(
    "alpha, df, expected",
    [(0.05, 3, 7.8147), (0.01, 9, 21.666), (0.10, 5, 9.2364)],
)
def test_chi2_upper_quantile_examples(alpha, df, expected):
    assert chi2_upper_quantile(alpha, df) == pytest.approx(expected, abs=1e-3)


def test_chi2_errors():
    with pytest.raises(ValueError):
        chi2_cdf(-1.0, 3)
    with pytest.raises(ValueError):
        chi2_cdf(1.0, 0)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            chi2_upper_quantile(bad, 3)


@pytest.mark.parametrize("df", range(1, 21))
def test_quantile_round_trip(df):
    for a in (0.2, 0.1, 0.05, 0.01):
        q = chi2_upper_quantile(a, df)
        assert abs(chi2_cdf(q, df) - (1 - a)) <= 1e-8


@settings(max_examples=200, deadline=None)
@given(x=st.floats(0.0, 200.0), df=st.integers(1, 40))
def test_chi2_cdf_against_scipy(x, df):
    assert chi2_cdf(x, df) == pytest.approx(stats.chi2.cdf(x, df), abs=1e-12)
    assert chi2_sf(x, df) == pytest.approx(stats.chi2.sf(x, df), rel=1e-9, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(x=st.floats(0.0, 100.0), dx=st.floats(0.0, 10.0), df=st.integers(1, 30))
def test_chi2_cdf_monotone(x, dx, df):
    assert chi2_cdf(x + dx, df) >= chi2_cdf(x, df)


def test_chi2_cdf_limit():
    assert chi2_cdf(1e4, 5) == 1.0
    assert chi2_cdf(float("inf"), 5) == 1.0
