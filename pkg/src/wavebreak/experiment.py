"""Monte Carlo reproduction harness for the piecewise FARIMA and FBM scenarios."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, WavebreakError
from .pipeline import AnalysisConfig, analyze, make_gamma_table
from .synth import FbmSpec, PiecewiseSpec, StationarySpec, gen_piecewise
from .wvar import ScaleGrid

__all__ = ["SCENARIOS", "Scenario", "get_scenario", "replicate_seeds", "run_experiment", "ExperimentResult"]


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    change_fractions: tuple
    segments: tuple
    regime: str
    kappa: float = 0.05
    multipliers: tuple = (1, 2, 3, 4, 5)

    @property
    def m(self) -> int:
        return len(self.change_fractions)

    @property
    def param_name(self) -> str:
        return "H" if self.regime == "fbm" else "D"

    @property
    def true_params(self) -> tuple:
        out = []
        for s in self.segments:
            if isinstance(s, FbmSpec):
                out.append(s.hurst)
            else:
                out.append(s.memory_exponent)
        return tuple(out)

    def spec(self, seed: int, n: Optional[int] = None) -> PiecewiseSpec:
        return PiecewiseSpec(n or self.n, self.change_fractions, self.segments, seed)

    def config(self, **overrides) -> AnalysisConfig:
        cfg = AnalysisConfig(m=self.m, regime=self.regime, kappa=self.kappa, multipliers=self.multipliers)
        return replace(cfg, **overrides)

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        spec = PiecewiseSpec.from_dict(dict(d, seed=0))
        regime = d.get("regime") or ("fbm" if all(isinstance(s, FbmSpec) for s in spec.segment_specs) else "lrd")
        return cls(d.get("name", "custom"), spec.n_samples, spec.change_fractions, spec.segment_specs, regime,
                   float(d.get("kappa", 0.05)), tuple(d.get("multipliers", (1, 2, 3, 4, 5))))


SCENARIOS = {
    "farima-1cp": Scenario("farima-1cp", 20000, (0.75,),
                           (StationarySpec("farima", 0.1), StationarySpec("farima", 0.4)), "lrd"),
    "fbm-2cp": Scenario("fbm-2cp", 10000, (0.3, 0.78), (FbmSpec(0.6), FbmSpec(0.8), FbmSpec(0.5)), "fbm"),
}


def get_scenario(name: str, custom_path=None) -> Scenario:
    if name == "custom":
        if custom_path is None:
            raise ConfigError("scenario 'custom' needs a JSON spec file")
        return Scenario.from_dict(json.loads(Path(custom_path).read_text()))
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS) + ['custom']}") from None


def replicate_seeds(master_seed: int, replicates: int) -> list:
    """Independent per-replicate integer seeds spawned from one master seed."""
    children = np.random.SeedSequence(master_seed).spawn(replicates)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def _one(args):
    scenario, cfg, seed, n, grid, gamma = args
    x = gen_piecewise(scenario.spec(seed, n))
    try:
        a = analyze(x, cfg, gamma, grid)
    except WavebreakError as exc:
        return {"seed": seed, "error": f"{exc.code}: {exc}"}
    return {
        "seed": seed,
        "tau_hat": list(a.tau_hat),
        "param_ols": a.params("ols").tolist(),
        "param_fgls": a.params("fgls").tolist(),
        "T": [e.T if e.usable else math.nan for e in a.estimates],
        "warnings": len(a.warnings),
    }


@dataclass
class ExperimentResult:
    scenario: Scenario
    n: int
    replicates: int
    master_seed: int
    rows: list
    failures: list
    elapsed: float
    columns: list = field(default_factory=list)
    truth: list = field(default_factory=list)
    seeds: list = field(default_factory=list)

    @property
    def _order(self) -> dict:
        return {s: i for i, s in enumerate(self.seeds)}

    def matrix(self, which: str = "ols") -> np.ndarray:
        key = "param_ols" if which == "ols" else "param_fgls"
        return np.array([r["tau_hat"] + r[key] for r in self.rows], dtype=float).reshape(-1, len(self.columns))

    def summary(self, which: str = "ols") -> dict:
        """Mean, empirical standard deviation and root mean squared error per column."""
        X = self.matrix(which)
        truth = np.asarray(self.truth)
        with np.errstate(invalid="ignore"):
            return {
                "mean": np.nanmean(X, axis=0),
                "sd": np.nanstd(X, axis=0, ddof=1),
                "rmse": np.sqrt(np.nanmean((X - truth) ** 2, axis=0)),
                "missing": np.isnan(X).sum(axis=0),
            }

    def to_csv(self) -> str:
        """Summary in the row layout mean / sd / rmse, one block per estimator."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["estimator", "stat"] + self.columns)
        w.writerow(["", "truth"] + [repr(float(v)) for v in self.truth])
        for which in ("ols", "fgls"):
            s = self.summary(which)
            for key in ("mean", "sd", "rmse"):
                w.writerow([which, key] + [repr(float(v)) for v in s[key]])
            w.writerow([which, "missing"] + [int(v) for v in s["missing"]])
        return buf.getvalue()

    def replicates_csv(self) -> str:
        """One line per replicate; failed replicates carry their error message."""
        p = self.scenario.param_name
        m = self.scenario.m
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed"] + self.columns + [f"{p}{j}_fgls" for j in range(m + 1)] + ["error"])
        for r in sorted(self.rows + self.failures, key=lambda r: self._order[r["seed"]]):
            if "error" in r:
                w.writerow([r["seed"]] + [""] * (3 * m + 2) + [r["error"]])
            else:
                w.writerow([r["seed"]] + [repr(float(v)) for v in r["tau_hat"] + r["param_ols"] + r["param_fgls"]]
                           + [""])
        return buf.getvalue()

    def to_text(self, which: str = "ols") -> str:
        s = self.summary(which)
        width = 10
        head = (f"{self.scenario.name}  N={self.n}  replicates={self.replicates}  "
                f"failures={len(self.failures)}  estimator={which}")
        lines = [head, "".ljust(8) + "".join(c.rjust(width) for c in self.columns)]
        lines.append("truth".ljust(8) + "".join(f"{v:{width}.4f}" for v in self.truth))
        for key, label in (("mean", "mean"), ("sd", "sigma"), ("rmse", "sqrtMSE")):
            lines.append(label.ljust(8) + "".join(f"{v:{width}.4f}" for v in s[key]))
        return "\n".join(lines)


def run_experiment(scenario, replicates: int = 50, master_seed: int = 0, n: Optional[int] = None,
                   config: Optional[AnalysisConfig] = None, jobs: int = 1, min_replicates: int = 10,
                   gamma=None) -> ExperimentResult:
    """Simulate and analyze *replicates* independent series of a scenario.

    Failed replicates are recorded in ``failures`` and excluded from the
    summary statistics.
    """
    if isinstance(scenario, str):
        scenario = get_scenario(scenario)
    if replicates < min_replicates:
        raise ConfigError(f"need at least {min_replicates} replicates")
    n = n or scenario.n
    cfg = config or scenario.config()
    grid = ScaleGrid.for_length(n, cfg.regime, cfg.kappa, cfg.multipliers)
    gamma = gamma or make_gamma_table(cfg, grid)
    seeds = replicate_seeds(master_seed, replicates)
    tasks = [(scenario, cfg, s, n, grid, gamma) for s in seeds]
    t0 = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            out = list(pool.map(_one, tasks))
    else:
        out = [_one(t) for t in tasks]
    rows = [r for r in out if "error" not in r]
    failures = [r for r in out if "error" in r]
    p = scenario.param_name
    columns = [f"tau{j + 1}" for j in range(scenario.m)] + [f"{p}{j}" for j in range(scenario.m + 1)]
    truth = list(scenario.change_fractions) + list(scenario.true_params)
    return ExperimentResult(scenario, n, replicates, master_seed, rows, failures,
                            time.perf_counter() - t0, columns, truth, seeds)
