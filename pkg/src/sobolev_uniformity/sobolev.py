"""Data-driven Sobolev tests of uniformity.

The score statistic of order k is

    S_k = (1/n) sum_i sum_j sum_{m<=k} <t_m(x_i), t_m(x_j)>,

the order is chosen by maximizing the penalized statistic
B_S(k) = S_k - nu_k log n over k = 1..K, and S_khat is referred to a
chi-square law with nu_1 degrees of freedom.

Batch functions accept arrays of shape ``(..., n) + point_shape`` so that
many samples of the same size are processed in one vectorized pass.
"""

from dataclasses import asdict, dataclass, field
import math

import numpy as np

from .manifolds import (
    ManifoldSpec,
    gram_similarity,
    iter_zonal_kernels,
    kernel_cum,
    nu,
    _check_points,
)
from .sampling import RngSpec, as_generator, sample_uniform
from .specialfun import chi2_sf

__all__ = [
    "TooFewPoints",
    "TestReport",
    "DEFAULT_K",
    "score_path",
    "score_statistic",
    "penalized_statistic",
    "select_k",
    "select_from_path",
    "modified_statistic",
    "effective_modified_statistic",
    "correction_default",
    "run_test",
    "gine_fn",
    "hendriks_density",
]

DEFAULT_K = 5
DEFAULT_MC_REPLICATIONS = 9999
_CHUNK = 256

# S* = {1 + (a + b S + c S^2) / n} S
_MODIFICATION = {
    "s2": (1.37, -0.31, 0.0),
    "rp2": (1.91, -0.21, 0.0),
    "so3": (5.496, -0.636, 0.018),
}


class TooFewPoints(ValueError):
    pass


@dataclass
class TestReport:
    """Outcome of one data-driven test.

    ``trace`` holds ``(k, S_k, B_S(k))`` for k = 1..K. ``S_star`` is the
    statistic the asymptotic p-value is computed from when ``correction``
    is on; it equals ``S`` where no modification is published or where the
    modification is outside its increasing range (``correction_clipped``).
    """

    __test__ = False

    manifold: str
    n: int
    K: int
    k_hat: int
    S: float
    S_star: float
    df: int
    correction: bool
    p_asymptotic: float
    p_monte_carlo: float | None = None
    mc_replications: int = 0
    correction_clipped: bool = False
    trace: list = field(default_factory=list)

    @property
    def statistic(self):
        """The statistic actually referred to the null law."""
        return self.S_star if self.correction else self.S

    def to_dict(self):
        d = asdict(self)
        d["trace"] = [{"k": k, "S_k": s, "B_S": b} for k, s, b in self.trace]
        return d


def _single_sample(spec, sample):
    x = _check_points(spec, sample)
    if x.ndim != len(spec.point_shape) + 1:
        raise ValueError(f"expected one sample of shape (n,) + {spec.point_shape}, got {x.shape}")
    if x.shape[0] == 0:
        raise TooFewPoints("empty sample")
    return x


def score_path(spec, samples, K):
    """S_1, ..., S_K for one sample or a batch of equal-size samples.

    Returns an array of shape ``batch_shape + (K,)``. Each order adds the
    nonnegative term (1/n) ||sum_i t_k(x_i)||^2, so the path is
    nondecreasing in k up to rounding.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    x = _check_points(spec, samples)
    n = x.shape[x.ndim - len(spec.point_shape) - 1]
    if n == 0:
        raise TooFewPoints("empty sample")
    c = gram_similarity(spec, x)
    increments = np.empty(c.shape[:-2] + (K,))
    for k, ker in iter_zonal_kernels(spec, c, K):
        increments[..., k - 1] = ker.sum(axis=(-2, -1))
    return np.maximum(np.cumsum(increments, axis=-1) / n, 0.0)


def score_statistic(spec, sample, k):
    """S_k for a single sample (symmetric double sum, diagonal included)."""
    return float(score_path(spec, _single_sample(spec, sample), k)[k - 1])


def penalized_statistic(S_k, nu_k, n):
    """B_S(k) = S_k - nu_k log n."""
    return S_k - nu_k * np.log(n)


def select_from_path(spec, path, n):
    """k_hat (1-based) and B_S values from a score path of shape ``(..., K)``.

    Ties go to the smallest order.
    """
    K = path.shape[-1]
    nus = np.array([nu(spec, k) for k in range(1, K + 1)], dtype=float)
    b = penalized_statistic(path, nus, n)
    return np.argmax(b, axis=-1) + 1, b


def select_k(spec, sample, K=DEFAULT_K):
    """Data-driven order: smallest maximizer of B_S over 1..K.

    Returns ``(k_hat, trace)`` with ``trace`` a list of ``(k, S_k, B_S(k))``.
    """
    x = _single_sample(spec, sample)
    n = x.shape[0]
    path = score_path(spec, x, K)
    k_hat, b = select_from_path(spec, path, n)
    trace = [(k, float(path[k - 1]), float(b[k - 1])) for k in range(1, K + 1)]
    return int(k_hat), trace


def modified_statistic(spec, S, n):
    """Cubic small-sample modification S* of S_khat.

    Published for S^2, RP^2 and SO(3); identity elsewhere. Applied exactly
    as fitted, so for large S at small n the S^2 and RP^2 versions bend
    back down (see `effective_modified_statistic`).
    """
    coef = _MODIFICATION.get(spec.name)
    if coef is None:
        return S
    a, b, c = coef
    S = np.asarray(S, dtype=float)
    out = (1.0 + (a + b * S + c * S * S) / n) * S
    return float(out) if out.ndim == 0 else out


def modification_turning_point(spec, n):
    """Smallest S > 0 where the modification stops increasing (inf if never)."""
    coef = _MODIFICATION.get(spec.name)
    if coef is None:
        return math.inf
    a, b, c = coef
    # d/dS of S + (a S + b S^2 + c S^3)/n vanishes where 3c S^2 + 2b S + (n + a) = 0
    roots = np.roots([3 * c, 2 * b, n + a]) if c else np.array([-(n + a) / (2 * b)])
    real = [r.real for r in np.atleast_1d(roots) if abs(r.imag) < 1e-12 and r.real > 0]
    return min(real) if real else math.inf


def effective_modified_statistic(spec, S, n):
    """S* where the modification is increasing in S, and S itself beyond.

    Returns ``(value, clipped)``. Without the fallback a grossly
    nonuniform sample could get a smaller modified statistic than a mildly
    nonuniform one.
    """
    if S > modification_turning_point(spec, n):
        return float(S), True
    return float(modified_statistic(spec, S, n)), False


def correction_default(n):
    return n < 50


def _p_value(stat, df):
    return chi2_sf(max(float(stat), 0.0), df)


def _null_statistics(spec, n, K, correction, reps, rng):
    """Test statistics of `reps` uniform samples, one RNG stream per replicate."""
    if isinstance(rng, RngSpec):
        base = rng.stream_index if isinstance(rng.stream_index, tuple) else (rng.stream_index,)
        streams = [RngSpec(rng.master_seed, base + (r,)) for r in range(reps)]
    else:
        gen = as_generator(rng)
        streams = [gen.spawn(1)[0] for _ in range(reps)]
    out = np.empty(reps)
    for start in range(0, reps, _CHUNK):
        block = streams[start:start + _CHUNK]
        samples = np.stack([sample_uniform(spec, n, s) for s in block])
        path = score_path(spec, samples, K)
        k_hat, _ = select_from_path(spec, path, n)
        S = np.take_along_axis(path, (k_hat - 1)[:, None], axis=-1)[:, 0]
        if correction:
            S = np.array([effective_modified_statistic(spec, s, n)[0] for s in S])
        out[start:start + len(block)] = S
    return out


def run_test(spec, sample, K=DEFAULT_K, correction=None, mc_replications=0, rng=None):
    """Data-driven Sobolev test of uniformity on `spec`.

    Parameters
    ----------
    spec : ManifoldSpec
    sample : array_like
        Validated points, shape ``(n,) + spec.point_shape`` with n >= 3.
    K : int
        Largest order considered.
    correction : bool or None
        Refer S* rather than S_khat to the chi-square law. ``None`` turns it
        on for n < 50.
    mc_replications : int
        If positive, also compute a Monte Carlo p-value from this many
        uniform samples of the same size, using ``(1 + #{T_b >= T}) / (B + 1)``.
    rng : RngSpec, numpy Generator, int or None
        Source of randomness for the Monte Carlo p-value.

    Returns
    -------
    TestReport
    """
    if not isinstance(spec, ManifoldSpec):
        raise TypeError("spec must be a ManifoldSpec")
    x = _single_sample(spec, sample)
    n = x.shape[0]
    if n < 3:
        raise TooFewPoints(f"the data-driven test needs at least 3 points, got {n}")
    if correction is None:
        correction = correction_default(n)

    k_hat, trace = select_k(spec, x, K)
    S = trace[k_hat - 1][1]
    S_star, clipped = effective_modified_statistic(spec, S, n) if correction else (modified_statistic(spec, S, n), False)
    df = nu(spec, 1)
    stat = S_star if correction else S
    report = TestReport(
        manifold=spec.name,
        n=n,
        K=K,
        k_hat=k_hat,
        S=S,
        S_star=float(S_star),
        df=df,
        correction=bool(correction),
        p_asymptotic=_p_value(stat, df),
        correction_clipped=clipped,
        trace=trace,
    )
    if mc_replications:
        null = _null_statistics(spec, n, K, correction, mc_replications, rng)
        report.p_monte_carlo = (1 + int(np.sum(null >= stat))) / (mc_replications + 1)
        report.mc_replications = int(mc_replications)
    return report


def gine_fn(sample):
    """Giné's F_n statistic for points on S^2.

    F_n = 3n/2 - 4/(n pi) sum_{i<j} (psi_ij + sin psi_ij), psi_ij the angle
    between x_i and x_j. Accepts one sample ``(n, 3)`` or a batch
    ``(..., n, 3)``.
    """
    x = np.asarray(sample, dtype=float)
    if x.shape[-1] != 3 or x.ndim < 2:
        raise ValueError("Giné's F_n is defined here for samples on S^2 (rows of length 3)")
    n = x.shape[-2]
    if n < 2:
        raise TooFewPoints("F_n needs at least 2 points")
    psi = np.arccos(np.clip(x @ np.swapaxes(x, -1, -2), -1.0, 1.0))
    idx = np.arange(n)
    psi[..., idx, idx] = 0.0
    pair_sum = (psi + np.sin(psi)).sum(axis=(-2, -1)) / 2.0
    out = 1.5 * n - 4.0 / (n * np.pi) * pair_sum
    return float(out) if out.ndim == 0 else out


def hendriks_density(spec, sample, k, x):
    """Order-k Fourier density estimate (with respect to the uniform law).

    f_k(x) = 1 + (1/n) sum_i <t_(k)(x_i), t_(k)(x)>; the constant term makes
    it integrate to one. `x` may be one point or an array of points.
    """
    s = _single_sample(spec, sample)
    x = _check_points(spec, x)
    pts = x.reshape((-1,) + spec.point_shape)
    lead = (slice(None), None) + (slice(None),) * len(spec.point_shape)
    vals = kernel_cum(spec, k, pts[lead], s[None])
    out = 1.0 + np.mean(np.reshape(vals, (pts.shape[0], s.shape[0])), axis=1)
    out = out.reshape(x.shape[: x.ndim - len(spec.point_shape)])
    return float(out) if out.ndim == 0 else out
