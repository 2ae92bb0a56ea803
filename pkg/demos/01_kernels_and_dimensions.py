"""
Kernels, eigenspace dimensions and the chi-square law
=====================================================

Every statistic in the package is a double sum of zonal kernels. This
script shows the building blocks: the kernels as polynomials in a
similarity, the model dimensions nu_k that set the degrees of freedom, and
the identity kernel_cum(x, x) = nu_k that ties the two together.
"""

import numpy as np

from sobolev_uniformity import CIRCLE, RP2, S2, SO3, chi2_upper_quantile, kernel, kernel_cum, nu, sample_uniform

# %%
# Model dimensions. nu_1 is the degrees of freedom of the asymptotic null law.
for spec in (CIRCLE, S2, RP2, SO3):
    print(f"{spec.name:>7}: nu_1..nu_5 = {[nu(spec, k) for k in range(1, 6)]}")

# %%
# On S^2 the order-k kernel is (2k+1) P_k(cos angle). It peaks at the
# diagonal and averages to zero against the uniform distribution.
north = np.array([0.0, 0.0, 1.0])
angles = np.linspace(0, np.pi, 7)
pts = np.column_stack([np.sin(angles), np.zeros_like(angles), np.cos(angles)])
for k in (1, 2, 3):
    print(f"k={k}:", np.round(kernel(S2, k, north, pts), 3))

# %%
# Summing kernels up to order k on the diagonal gives back nu_k exactly.
x = sample_uniform(SO3, 5, 1)
print("SO(3) diagonal, k = 3:", kernel_cum(SO3, 3, x, x), " nu_3 =", nu(SO3, 3))

# %%
# Upper chi-square quantiles for the usual levels.
for spec in (S2, RP2, SO3):
    df = nu(spec, 1)
    print(spec.name, "df =", df, [round(chi2_upper_quantile(a, df), 4) for a in (0.10, 0.05, 0.01)])
