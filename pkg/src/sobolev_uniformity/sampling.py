"""Seedable samplers: uniform laws and the antipodal Fisher mixture on S^2."""

from dataclasses import dataclass, field

import numpy as np

from .manifolds import canonical_sign

__all__ = [
    "RngSpec",
    "FisherMixtureParams",
    "as_generator",
    "quaternion_to_rotation",
    "sample_uniform",
    "sample_fisher_mixture",
    "random_isometry",
]


@dataclass(frozen=True)
class RngSpec:
    """A reproducible random stream.

    The stream is keyed by ``master_seed`` and a stream index, which may be
    a single integer or a tuple of integers (e.g. table, sample size and
    replicate). Streams with different indices are independent; the same
    key always reproduces the same draws.
    """

    master_seed: int
    stream_index: int | tuple = 0

    def generator(self):
        key = self.stream_index if isinstance(self.stream_index, tuple) else (self.stream_index,)
        ss = np.random.SeedSequence(self.master_seed, spawn_key=tuple(int(i) for i in key))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng):
    """Accept an `RngSpec`, a numpy Generator, an int seed or None."""
    if isinstance(rng, RngSpec):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class FisherMixtureParams:
    """Equal mixture of Fisher(mu, kappa) and Fisher(-mu, kappa) on S^2."""

    kappa: float
    mu: tuple = field(default=(0.0, 0.0, 1.0))

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        mu = np.asarray(self.mu, dtype=float)
        if mu.shape != (3,) or abs(np.linalg.norm(mu) - 1.0) > 1e-8:
            raise ValueError("mu must be a unit vector in R^3")
        object.__setattr__(self, "mu", tuple(float(v) for v in mu))


def quaternion_to_rotation(u):
    """Map unit quaternions ``(..., 4)`` to rotation matrices ``(..., 3, 3)``.

    u and -u give the same rotation.
    """
    u = np.asarray(u, dtype=float)
    u1, u2, u3, u4 = np.moveaxis(u, -1, 0)
    rows = [
        [u1**2 + u2**2 - u3**2 - u4**2, -2 * (u1 * u4 - u2 * u3), 2 * (u1 * u3 + u2 * u4)],
        [2 * (u1 * u4 + u2 * u3), u1**2 + u3**2 - u2**2 - u4**2, -2 * (u1 * u2 - u3 * u4)],
        [-2 * (u1 * u3 - u2 * u4), 2 * (u1 * u2 + u3 * u4), u1**2 + u4**2 - u2**2 - u3**2],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def _unit_vectors(gen, n, p):
    z = gen.standard_normal((n, p))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_uniform(spec, n, rng=None):
    """`n` independent draws from the uniform (Haar / volume) law on `spec`.

    Returns an array of shape ``(n,) + spec.point_shape``.
    """
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    gen = as_generator(rng)
    x = _unit_vectors(gen, n, spec.p)
    if spec.family == "so3":
        return quaternion_to_rotation(x)
    if spec.family == "projective":
        return canonical_sign(x)
    return x


def _frame(mu):
    # orthonormal basis whose last column is mu
    mu = np.asarray(mu, dtype=float)
    helper = np.eye(3)[np.argmin(np.abs(mu))]
    e1 = np.cross(mu, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(mu, e1)
    return np.column_stack([e1, e2, mu])


def sample_fisher_mixture(params, n, rng=None):
    """Draws from the antipodal Fisher mixture with density (wrt uniform)

    ``kappa / (2 sinh kappa) * (exp(kappa mu'x) + exp(-kappa mu'x))``.

    The cosine t = mu'x of a Fisher(mu, kappa) draw is sampled by inverting
    its distribution function, the azimuth uniformly, and the point is then
    reflected through the origin with probability 1/2.
    """
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    gen = as_generator(rng)
    kappa = params.kappa
    u = gen.random(n)
    phi = gen.uniform(0.0, 2.0 * np.pi, n)
    flip = gen.random(n) < 0.5
    t = 1.0 + np.log(u + (1.0 - u) * np.exp(-2.0 * kappa)) / kappa
    t = np.clip(t, -1.0, 1.0)
    r = np.sqrt(1.0 - t * t)
    local = np.column_stack([r * np.cos(phi), r * np.sin(phi), t])
    x = local @ _frame(params.mu).T
    x[flip] *= -1.0
    return x


def random_isometry(spec, rng=None):
    """A random isometry of `spec` as a callable acting on point arrays.

    Spheres and projective spaces get a random orthogonal matrix (possibly
    improper); SO(3) gets left multiplication by a random rotation.
    """
    gen = as_generator(rng)
    if spec.family == "so3":
        r = quaternion_to_rotation(_unit_vectors(gen, 1, 4)[0])
        return lambda x: np.matmul(r, x)
    q, rr = np.linalg.qr(gen.standard_normal((spec.p, spec.p)))
    q = q * np.sign(np.diag(rr))
    return lambda x: np.asarray(x) @ q.T
