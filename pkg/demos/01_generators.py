# Simulating long memory and self-similar paths
#
# Stationary series come from circulant embedding of the exact
# autocovariance. FBM is the cumulative sum of fractional Gaussian noise.

# %%
import numpy as np

from wavebreak.synth import (FbmSpec, PiecewiseSpec, StationarySpec, farima_autocovariance,
                             fgn_autocovariance, gen_fbm, gen_piecewise, gen_stationary)

# %% Sample autocovariances against the closed forms
paths = gen_stationary(StationarySpec("fgn", 0.8), 4096, seed=1, size=100)
for k in range(4):
    emp = np.mean(paths[:, : 4096 - k] * paths[:, k:])
    print(f"FGN(0.8)     lag {k}: sample {emp:.4f}  exact {fgn_autocovariance(0.8, 1.0, k):.4f}")

paths = gen_stationary(StationarySpec("farima", 0.3), 4096, seed=2, size=100)
for k in range(4):
    emp = np.mean(paths[:, : 4096 - k] * paths[:, k:])
    print(f"FARIMA(0.3)  lag {k}: sample {emp:.4f}  exact {farima_autocovariance(0.3, 1.0, k):.4f}")

# %% FBM variance grows like t^(2H)
t = np.array([10, 100, 1000])
fbm = gen_fbm(0.7, 1.0, 1001, seed=3, size=400)
print("Var(X_t) / t^1.4:", np.round(fbm[:, t].var(axis=0) / t**1.4, 3))

# %% A piecewise FBM with two changes; segments restart at 0 unless level pasting is on
spec = PiecewiseSpec(10000, (0.3, 0.78), (FbmSpec(0.6), FbmSpec(0.8), FbmSpec(0.5)), seed=4)
x = gen_piecewise(spec).values
print("length", x.size, "values at the changes:", x[2999:3002].round(2), x[7799:7802].round(2))
