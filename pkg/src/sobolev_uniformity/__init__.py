"""Data-driven Sobolev tests of uniformity on the circle, spheres, real
projective spaces and the rotation group SO(3)."""

from .manifolds import (
    CIRCLE,
    RP2,
    S2,
    SO3,
    ManifoldSpec,
    NonFinite,
    NotOnManifold,
    circle,
    dim_eigenspace,
    kernel,
    kernel_cum,
    nu,
    projective,
    rotation_group,
    sphere,
    validate,
    validate_sample,
)
from .montecarlo import (
    SimulationPlan,
    SimulationTable,
    published_plan,
    simulate,
    simulate_khat_distribution,
    simulate_power,
    simulate_tail_probabilities,
)
from .sampling import FisherMixtureParams, RngSpec, sample_fisher_mixture, sample_uniform
from .sobolev import (
    TestReport,
    TooFewPoints,
    gine_fn,
    hendriks_density,
    modified_statistic,
    penalized_statistic,
    run_test,
    score_statistic,
    select_k,
)
from .specialfun import chi2_cdf, chi2_upper_quantile, gegenbauer, legendre

__version__ = "0.1.0"
