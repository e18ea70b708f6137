"""
Triangles in random regular graphs
==================================

Counts of triangles across many draws from the swap chain, set against the
predicted mean.  For d small next to sqrt(n) the standardised count should
look roughly N(0, 1).
"""

# %%
import numpy as np

from regsub import Pattern, SamplerConfig
from regsub.estimates import mu_pattern, sigma2_triangle
from regsub.harness import ad_test
from regsub.sampler import make_rng, sample_triangle_counts

n, d = 1000, 10
cfg = SamplerConfig(n, d, seed=7)
z = sample_triangle_counts(cfg, 500).astype(float)

# %%
mu = mu_pattern(Pattern.cycle(3), d, n).value
print(f"predicted mean {mu:.3f}, predicted variance {sigma2_triangle(d, n).value:.3f}")
print(f"sample mean    {z.mean():.3f} +- {z.std(ddof=1) / np.sqrt(z.size):.3f}")
print(f"var / mean     {z.var(ddof=1) / z.mean():.3f}")

# %%
# Anderson-Darling against the standard normal, after centring by mu and
# scaling by sqrt(mu).
stat, p = ad_test((z - mu) / np.sqrt(mu), make_rng(7, 1), 999)
print(f"AD statistic {stat:.3f}, p = {p:.3f}")

# %%
# A crude text histogram of the counts, in bins of width 5.
hist, edges = np.histogram(z, bins=np.arange(z.min() // 5 * 5, z.max() + 6, 5))
for lo, c in zip(edges, hist):
    print(f"{int(lo):4d} {'#' * int(c // 2)}")
