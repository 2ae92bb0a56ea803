"""Sample spaces: circle, spheres, real projective spaces and SO(3).

Each manifold is a two-point homogeneous space, so the reproducing kernel
of the k-th Laplacian eigenspace is a polynomial in a single similarity
``c`` between the two points:

============  ==========================  =====================================
manifold      similarity c                order-k kernel
============  ==========================  =====================================
circle        x'y                         2 cos(k theta)
S^{p-1}       x'y                         (1 + k/a) C^a_k(c),    a = p/2 - 1
RP^1          x'y                         2 cos(2k theta)
RP^{p-1}      x'y                         (1 + 2k/a) C^a_{2k}(c)
SO(3)         sqrt((tr(X'Y) + 1) / 4)     (2k + 1) C^1_{2k}(c)
============  ==========================  =====================================

SO(3) is handled as RP^3 through unit quaternions: (tr(X'Y) + 1)/4 equals
(u'v)^2 for quaternions u, v of X, Y, so its square root is |u'v|.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .specialfun import chebyshev_sequence, gegenbauer_sequence

__all__ = [
    "ManifoldError",
    "NotOnManifold",
    "NonFinite",
    "ShapeMismatch",
    "ManifoldSpec",
    "circle",
    "sphere",
    "projective",
    "rotation_group",
    "S2",
    "RP2",
    "SO3",
    "CIRCLE",
    "dim_eigenspace",
    "nu",
    "similarity",
    "gram_similarity",
    "iter_zonal_kernels",
    "zonal_kernels",
    "canonical_sign",
    "kernel",
    "kernel_cum",
    "validate",
    "validate_sample",
]

_REPAIR_TOL = 1e-6
# below this the point is already on the manifold to rounding; leave bits alone
_EXACT_TOL = 1e-12


class ManifoldError(ValueError):
    """Base class for invalid points."""


class NotOnManifold(ManifoldError):
    pass


class NonFinite(ManifoldError):
    pass


class ShapeMismatch(ManifoldError):
    pass


@dataclass(frozen=True)
class ManifoldSpec:
    """Which sample space, with its ambient dimension.

    ``family`` is one of ``"sphere"``, ``"projective"`` or ``"so3"``. The
    circle is ``sphere`` with ``p = 2``. For ``so3``, ``p`` is 4, the
    dimension of the quaternion space it is identified through.
    """

    family: str
    p: int

    def __post_init__(self):
        if self.family not in ("sphere", "projective", "so3"):
            raise ValueError(f"unknown manifold family {self.family!r}")
        if self.family == "so3" and self.p != 4:
            raise ValueError("SO(3) is identified with RP^3; p must be 4")
        if self.p < 2:
            raise ValueError(f"ambient dimension must be >= 2, got {self.p}")

    @classmethod
    def parse(cls, name):
        """Build from a short name: circle, s2, rp2, so3, sphere:p, projective:p."""
        key = name.strip().lower()
        fixed = {"circle": CIRCLE, "s1": CIRCLE, "s2": S2, "rp2": RP2, "so3": SO3}
        if key in fixed:
            return fixed[key]
        family, sep, p = key.partition(":")
        if sep and family in ("sphere", "projective"):
            try:
                return cls(family, int(p))
            except ValueError:
                pass
        raise ValueError(f"unrecognized manifold {name!r}")

    @property
    def name(self):
        if self.family == "so3":
            return "so3"
        if self.family == "sphere":
            return {2: "circle", 3: "s2"}.get(self.p, f"sphere:{self.p}")
        return "rp2" if self.p == 3 else f"projective:{self.p}"

    @property
    def point_shape(self):
        return (3, 3) if self.family == "so3" else (self.p,)

    def dim_eigenspace(self, k):
        return dim_eigenspace(self, k)

    def nu(self, k):
        return nu(self, k)

    def __str__(self):
        return self.name


def circle():
    return ManifoldSpec("sphere", 2)


def sphere(p):
    """The unit sphere S^{p-1} in R^p."""
    return ManifoldSpec("sphere", p)


def projective(p):
    """RP^{p-1}, the lines through the origin of R^p."""
    return ManifoldSpec("projective", p)


def rotation_group():
    return ManifoldSpec("so3", 4)


CIRCLE = circle()
S2 = sphere(3)
RP2 = projective(3)
SO3 = rotation_group()


def _nu_sphere(p, k):
    if k == 0:
        return 0
    num = k * comb(p + k - 2, p - 2) + (k + 1) * comb(p + k - 1, p - 2)
    q, r = divmod(num, p - 1)
    assert r == 0
    return q - 1


def _nu_projective(p, k):
    return sum(comb(p + 2 * i - 3, p - 2) + comb(p + 2 * i - 2, p - 2) for i in range(1, k + 1))


def nu(spec, k):
    """Cumulative eigenspace dimension d_1 + ... + d_k (0 for k = 0)."""
    if k < 0:
        raise ValueError(f"order must be nonnegative, got {k}")
    if spec.family == "sphere":
        return _nu_sphere(spec.p, k)
    # SO(3) shares its spectrum with RP^3
    return _nu_projective(spec.p, k)


def dim_eigenspace(spec, k):
    """Dimension d_k of the k-th nonconstant eigenspace, k >= 1."""
    if k < 1:
        raise ValueError(f"eigenspace index must be >= 1, got {k}")
    if spec.family == "sphere":
        return _nu_sphere(spec.p, k) - _nu_sphere(spec.p, k - 1)
    p = spec.p
    return comb(p + 2 * k - 3, p - 2) + comb(p + 2 * k - 2, p - 2)


def _check_points(spec, x):
    x = np.asarray(x, dtype=float)
    shape = spec.point_shape
    if x.shape[x.ndim - len(shape):] != shape:
        raise ShapeMismatch(f"{spec.name} points must have trailing shape {shape}, got {x.shape}")
    return x


def similarity(spec, x, y):
    """The scalar c on which every zonal kernel of `spec` depends.

    `x` and `y` broadcast against each other over leading axes. For the
    pairwise matrix of one sample use ``similarity(spec, s[:, None], s[None, :])``.
    """
    x = _check_points(spec, x)
    y = _check_points(spec, y)
    if spec.family == "so3":
        tr = np.sum(x * y, axis=(-2, -1))
        return np.sqrt(np.clip((tr + 1.0) / 4.0, 0.0, 1.0))
    return np.clip(np.sum(x * y, axis=-1), -1.0, 1.0)


def gram_similarity(spec, samples):
    """Pairwise similarity matrices for a batch of samples.

    `samples` has shape ``(..., n) + point_shape``; the result has shape
    ``(..., n, n)``.
    """
    s = _check_points(spec, samples)
    if spec.family == "so3":
        flat = s.reshape(s.shape[:-2] + (9,))
        tr = flat @ np.swapaxes(flat, -1, -2)
        return np.sqrt(np.clip((tr + 1.0) / 4.0, 0.0, 1.0))
    return np.clip(s @ np.swapaxes(s, -1, -2), -1.0, 1.0)


def iter_zonal_kernels(spec, c, K):
    """Yield ``(k, kernel_k(c))`` for k = 1..K, holding O(1) arrays at a time."""
    c = np.asarray(c, dtype=float)
    step = 1 if spec.family == "sphere" else 2
    top = step * K
    if spec.p == 2:
        # cos(m theta) = T_m(c)
        t_prev, t_cur = np.ones_like(c), c
        for m in range(1, top + 1):
            if m > 1:
                t_prev, t_cur = t_cur, 2.0 * c * t_cur - t_prev
            if m % step == 0:
                yield m // step, 2.0 * t_cur
        return
    a = spec.p / 2.0 - 1.0
    g_prev, g_cur = np.ones_like(c), 2.0 * a * c
    for m in range(1, top + 1):
        if m > 1:
            g_prev, g_cur = g_cur, (2.0 * (m + a - 1) * c * g_cur - (m + 2 * a - 2) * g_prev) / m
        if m % step == 0:
            yield m // step, (1.0 + m / a) * g_cur


def zonal_kernels(spec, c, K):
    """Order-k kernels for k = 1..K as an array of shape ``(K,) + shape(c)``."""
    c = np.asarray(c, dtype=float)
    out = np.empty((K,) + c.shape)
    for k, val in iter_zonal_kernels(spec, c, K):
        out[k - 1] = val
    return out


def _zonal_single(spec, k, c):
    if spec.p == 2:
        m = k if spec.family == "sphere" else 2 * k
        return 2.0 * chebyshev_sequence(m, c)[m]
    a = spec.p / 2.0 - 1.0
    m = k if spec.family == "sphere" else 2 * k
    return (1.0 + m / a) * gegenbauer_sequence(m, a, c)[m]


def kernel(spec, k, x, y):
    """Inner product <t_k(x), t_k(y)> of the order-k eigenspace embeddings."""
    if k < 1:
        raise ValueError(f"order must be >= 1, got {k}")
    val = _zonal_single(spec, k, similarity(spec, x, y))
    return float(val) if np.ndim(val) == 0 else val


def kernel_cum(spec, k, x, y):
    """Sum of `kernel` over orders 1..k."""
    if k < 1:
        raise ValueError(f"order must be >= 1, got {k}")
    val = zonal_kernels(spec, similarity(spec, x, y), k).sum(axis=0)
    return float(val) if np.ndim(val) == 0 else val


def _polar(m):
    u, _, vt = np.linalg.svd(m)
    return u @ vt


def validate(spec, raw):
    """Check and lightly repair one point.

    Accepts a length-p vector (or, on the circle, a single angle in
    radians), or 9 row-major values / a 3x3 matrix for SO(3). Points off
    the manifold by at most 1e-6 are projected back; anything farther is
    rejected with `NotOnManifold`.
    """
    x = np.array(raw, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFinite("point has NaN or infinite coordinates")
    if spec.family == "so3":
        if x.size != 9:
            raise ShapeMismatch(f"SO(3) points need 9 values, got {x.size}")
        x = x.reshape(3, 3)
        dev = np.max(np.abs(x.T @ x - np.eye(3)))
        if dev > _REPAIR_TOL or np.linalg.det(x) <= 0:
            raise NotOnManifold(f"not a rotation matrix (orthogonality error {dev:.3g})")
        if dev > _EXACT_TOL:
            x = _polar(x)
        return x
    x = x.reshape(-1)
    if spec.p == 2 and spec.family == "sphere" and x.size == 1:
        return np.array([np.cos(x[0]), np.sin(x[0])])
    if x.size != spec.p:
        raise ShapeMismatch(f"{spec.name} points need {spec.p} values, got {x.size}")
    norm = np.linalg.norm(x)
    dev = abs(norm - 1.0)
    if dev > _REPAIR_TOL:
        raise NotOnManifold(f"vector norm {norm:.9g} is not 1")
    if dev > _EXACT_TOL:
        x = x / norm
    if spec.family == "projective":
        x = canonical_sign(x)
    return x


def canonical_sign(x):
    """Flip axes so that the first nonzero coordinate is positive."""
    x = np.asarray(x, dtype=float)
    nz = x != 0
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(x, first[..., None], axis=-1)
    return np.where(lead < 0, -x, x)


def validate_sample(spec, rows):
    """Validate a sequence of raw points; returns an ``(n,) + point_shape`` array."""
    pts = [validate(spec, r) for r in rows]
    if not pts:
        return np.empty((0,) + spec.point_shape)
    return np.stack(pts)
