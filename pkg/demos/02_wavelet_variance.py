# Wavelet variance and the log-log regression
#
# The log of the block-averaged squared wavelet coefficients is linear in
# the log scale, with slope 2H+1 for FBM.

# %%
import numpy as np

from wavebreak.segmentation import RegressionDesign, ols_fit
from wavebreak.synth import gen_fbm
from wavebreak.wvar import CoefficientCache, ScaleGrid, log_variance_vector, whole_series_log_variance

# %%
n = 10000
grid = ScaleGrid.for_length(n, "fbm", kappa=0.05)
print("scales:", grid.scales)
design = RegressionDesign.from_grid(grid)

for H in (0.3, 0.5, 0.8):
    x = gen_fbm(H, 1.0, n + 1, seed=int(10 * H)).values
    Y = whole_series_log_variance(x, grid)[0]
    slope, icpt, rss = ols_fit(Y, design)
    print(f"H={H}: slope {slope:.3f} (2H+1={2 * H + 1:.1f}), H estimate {(slope - 1) / 2:.3f}, rss {rss:.2e}")

# %% The cache answers any segment in O(1) per scale through prefix sums
cache = CoefficientCache.build(gen_fbm(0.7, 1.0, n + 1, seed=5).values, grid)
print("blocks per scale on [0, N):", cache.block_counts(0, n))
print("log-variances on [2000, 6000):", log_variance_vector(cache, 2000, 6000).round(3))
