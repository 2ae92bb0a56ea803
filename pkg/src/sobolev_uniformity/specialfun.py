"""Orthogonal polynomial recurrences and the chi-square distribution.

Polynomials accept scalars or arrays and evaluate elementwise. The
chi-square routines are scalar and dependency free.
"""

import math

import numpy as np

__all__ = [
    "legendre",
    "gegenbauer",
    "gegenbauer_sequence",
    "chebyshev_sequence",
    "chi2_cdf",
    "chi2_sf",
    "chi2_upper_quantile",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def legendre(k, t):
    """Legendre polynomial P_k(t) by the three-term recurrence.

    Parameters
    ----------
    k : int
        Degree, k >= 0.
    t : float or array_like
        Argument(s) in [-1, 1].

    Returns
    -------
    float or ndarray
    """
    if k < 0:
        raise ValueError(f"degree must be nonnegative, got {k}")
    t = np.asarray(t, dtype=float)
    p_prev = np.ones_like(t)
    if k == 0:
        return _unwrap(p_prev)
    p = t.copy()
    for m in range(1, k):
        p_prev, p = p, ((2 * m + 1) * t * p - m * p_prev) / (m + 1)
    return _unwrap(p)


def gegenbauer(k, alpha, t):
    """Gegenbauer polynomial C^alpha_k(t), alpha > 0.

    The circle (alpha = 0) is not covered; use the cosine form there.
    """
    return _unwrap(gegenbauer_sequence(k, alpha, t)[k])


def gegenbauer_sequence(k_max, alpha, t):
    """All Gegenbauer polynomials C^alpha_0 .. C^alpha_{k_max} at `t`.

    Returns an array of shape ``(k_max + 1,) + shape(t)``.
    """
    if alpha <= 0:
        raise ValueError(f"Gegenbauer parameter must be positive, got {alpha}")
    if k_max < 0:
        raise ValueError(f"degree must be nonnegative, got {k_max}")
    t = np.asarray(t, dtype=float)
    out = np.empty((k_max + 1,) + t.shape)
    out[0] = 1.0
    if k_max >= 1:
        out[1] = 2.0 * alpha * t
    for m in range(2, k_max + 1):
        out[m] = (2.0 * (m + alpha - 1) * t * out[m - 1] - (m + 2 * alpha - 2) * out[m - 2]) / m
    return out


def chebyshev_sequence(k_max, t):
    """cos(m * theta) for m = 0 .. k_max, where cos(theta) = t."""
    t = np.asarray(t, dtype=float)
    out = np.empty((k_max + 1,) + t.shape)
    out[0] = 1.0
    if k_max >= 1:
        out[1] = t
    for m in range(2, k_max + 1):
        out[m] = 2.0 * t * out[m - 1] - out[m - 2]
    return out


def _unwrap(a):
    return float(a) if np.ndim(a) == 0 else a


def _check_chi2_args(x, df):
    if not (isinstance(df, (int, np.integer)) and df >= 1):
        raise ValueError(f"degrees of freedom must be a positive integer, got {df!r}")
    if not x >= 0:
        raise ValueError(f"chi-square argument must be nonnegative, got {x!r}")


def _gamma_series(a, x):
    # lower regularized P(a, x); converges fast for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_contfrac(a, x):
    # upper regularized Q(a, x) by modified Lentz; for x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi2_cdf(x, df):
    """Chi-square distribution function, P(df/2, x/2)."""
    _check_chi2_args(x, df)
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    a, h = df / 2.0, x / 2.0
    if h == 0:
        return 0.0
    if h < a + 1.0:
        return min(1.0, _gamma_series(a, h))
    return max(0.0, 1.0 - _gamma_contfrac(a, h))


def chi2_sf(x, df):
    """Upper tail probability of chi-square, accurate far into the tail."""
    _check_chi2_args(x, df)
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    a, h = df / 2.0, x / 2.0
    if h == 0:
        return 1.0
    if h < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, h))
    return min(1.0, _gamma_contfrac(a, h))


def chi2_upper_quantile(alpha, df):
    """Critical value x with P(chi2_df >= x) = alpha.

    Bisection on ``[0, df + 40 sqrt(df)]`` down to a bracket width of 1e-10.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    target = 1.0 - alpha
    lo, hi = 0.0, df + 40.0 * math.sqrt(df)
    while chi2_cdf(hi, df) < target:
        hi *= 2.0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if chi2_cdf(mid, df) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
