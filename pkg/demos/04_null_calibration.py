"""
Null calibration by Monte Carlo
===============================

How often does the test reject a truly uniform sample? Compare simulated
frequencies with the published ones, cell by cell. A short run is used
here; ``sobolev-uniformity simulate --table 2`` runs the full 10,000
replications.
"""

from sobolev_uniformity.montecarlo import published_plan, simulate
from sobolev_uniformity.reference import compare, format_comparison

# %%
# Distribution of k_hat on S^2: it piles up at 1 as n grows.
khat = simulate(published_plan(1, replications=2000, master_seed=0))
print(khat.to_csv())

# %%
# Tail probabilities of S_khat and S* at the chi-square(3) critical values.
tails = simulate(published_plan(2, replications=2000, master_seed=0))
print(format_comparison(compare(tails)))
