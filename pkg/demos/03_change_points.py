# Detecting changes of the scaling exponent
#
# The contrast is the total residual sum of squares of the per-segment
# log-log fits, minimized by dynamic programming over a grid of candidates.

# %%
from wavebreak.experiment import SCENARIOS
from wavebreak.segmentation import SearchSpace, contrast_profile, detect_changes
from wavebreak.synth import gen_piecewise
from wavebreak.wvar import CoefficientCache, ScaleGrid

# %%
sc = SCENARIOS["fbm-2cp"]
x = gen_piecewise(sc.spec(seed=11))
grid = ScaleGrid.for_length(sc.n, sc.regime, sc.kappa)
cache = CoefficientCache.build(x, grid)
space = SearchSpace.default(sc.n, sc.m, grid)
print("candidates:", space.candidates.size, "min segment:", space.min_seg)

res = detect_changes(cache, space)
print("true tau:", sc.change_fractions, " estimated:", tuple(round(t, 4) for t in res.tau_hat))

# %% Contrast against the number of changes
# With exactly m changes the contrast need not decrease: shorter segments have
# noisier log-variances. The "at most m" profile is nonincreasing by construction.
print("exactly m = 0..4:", contrast_profile(cache, space, 4, exact=True).round(4))
print("at most m = 0..4:", contrast_profile(cache, space, 4).round(4))
