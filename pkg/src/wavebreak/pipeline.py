"""End-to-end analysis: coefficients, change points, refinement, per-segment inference."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .inference import GammaTable, estimate_segments, exponent_spread, refine_segments
from .segmentation import ChangePointResult, RegressionDesign, SearchSpace, detect_changes
from .wvar import CoefficientCache, ScaleGrid

__all__ = ["AnalysisConfig", "Analysis", "analyze", "make_gamma_table"]


@dataclass
class AnalysisConfig:
    m: int = 0
    regime: str = "lrd"
    kappa: float = 0.05
    multipliers: tuple = (1, 2, 3, 4, 5)
    wavelet: str = "poly4"
    min_seg: Optional[int] = None
    grid_step: Optional[int] = None
    max_trim: Optional[float] = 0.25
    gamma_method: Optional[str] = None
    gamma_R: int = 400
    gamma_seed: int = 0

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["multipliers"] = list(self.multipliers)
        return d


@dataclass
class Analysis:
    config: AnalysisConfig
    grid: ScaleGrid
    detection: ChangePointResult
    refined: object
    estimates: list
    warnings: list = field(default_factory=list)

    @property
    def tau_hat(self):
        return self.detection.tau_hat

    def params(self, which: str = "ols") -> np.ndarray:
        """Per-segment H or D (nan for unusable segments)."""
        attr = "param_ols" if which == "ols" else "param_fgls"
        return np.array([getattr(e, attr) if e.usable else np.nan for e in self.estimates])


def make_gamma_table(config: AnalysisConfig, grid: ScaleGrid) -> GammaTable:
    return GammaTable(config.regime, grid, config.wavelet, config.gamma_method, R=config.gamma_R,
                      seed=config.gamma_seed)


def analyze(x, config: AnalysisConfig, gamma: Optional[GammaTable] = None,
            grid: Optional[ScaleGrid] = None) -> Analysis:
    """Run detection and inference on the samples X_0..X_N in *x*."""
    values = np.asarray(getattr(x, "values", x), dtype=float)
    n = values.size - 1
    grid = grid or ScaleGrid.for_length(n, config.regime, config.kappa, config.multipliers)
    design = RegressionDesign.from_grid(grid)
    space = SearchSpace.default(n, config.m, grid, config.min_seg, config.grid_step)
    cache = CoefficientCache.build(values, grid, config.wavelet)
    det = detect_changes(cache, space, design)
    spread, clamped = exponent_spread(det.alpha, config.regime)
    notes = []
    if clamped:
        notes.append("exponent spread clamped to 0.49")
    refined = refine_segments(det, config.regime, config.kappa, spread, config.max_trim, grid)
    notes.extend(refined.warnings)
    if gamma is None:
        gamma = make_gamma_table(config, grid)
    est = estimate_segments(cache, refined, design, config.regime, gamma)
    for e in est:
        notes.extend(f"segment [{e.start}, {e.end}): {w}" for w in e.warnings)
        if not e.usable:
            notes.append(f"segment [{e.start}, {e.end}) unusable: {e.reason}")
    return Analysis(config, grid, det, refined, est, notes)
