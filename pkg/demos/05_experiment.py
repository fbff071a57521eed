# Monte Carlo tables for the two reference scenarios
#
# Replicate seeds are spawned from one master seed, so a table is
# reproducible from (scenario, N, replicates, master seed).

# %%
import sys

from wavebreak.experiment import run_experiment

replicates = int(sys.argv[1]) if len(sys.argv) > 1 else 10

# %% FBM with two changes of H (0.6, 0.8, 0.5)
res = run_experiment("fbm-2cp", replicates=replicates, master_seed=0)
print(res.to_text("ols"))
print(res.to_text("fgls"))

# %% FARIMA with one change of D (0.2 to 0.8); slower because Gamma is simulated
res = run_experiment("farima-1cp", replicates=replicates, master_seed=0)
print(res.to_text("ols"))
print(f"elapsed {res.elapsed:.0f}s, failures {len(res.failures)}")
