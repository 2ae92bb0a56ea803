"""
Sampling on the four manifolds
==============================

Uniform samplers for circle, sphere, projective plane and rotation group,
plus the symmetric Fisher mixture used as alternative. Seeds are either
plain integers or an ``RngSpec`` naming a stream under a master seed.
"""

import numpy as np

from sobolev_uniformity import CIRCLE, RP2, S2, SO3, FisherMixtureParams, RngSpec, sample_fisher_mixture, sample_uniform

# %%
for spec in (CIRCLE, S2, RP2, SO3):
    x = sample_uniform(spec, 10_000, RngSpec(1, 0))
    print(spec.name, x.shape)

# %%
# Uniform rotations: the rotation angle has density (1 - cos w) / pi, so
# its mean is pi/2 + 2/pi.
R = sample_uniform(SO3, 50_000, 2)
w = np.arccos(np.clip((np.trace(R, axis1=1, axis2=2) - 1) / 2, -1, 1))
print("mean rotation angle", w.mean().round(4), "expected", round(np.pi / 2 + 2 / np.pi, 4))

# %%
# The Fisher mixture concentrates near +mu and -mu with equal weight.
x = sample_fisher_mixture(FisherMixtureParams(2.0), 50_000, 3)
t = x[:, 2]
print("mean of mu'x", t.mean().round(4), " mean of (mu'x)^2", (t * t).mean().round(4))

# %%
# Same stream, same points; neighbouring streams are independent.
a = sample_uniform(S2, 3, RngSpec(9, 4))
b = sample_uniform(S2, 3, RngSpec(9, 4))
print("reproducible:", np.array_equal(a, b))
