"""Change-point estimation by minimizing the log-log regression contrast.

For a fixed number m of changes, the contrast is the sum over the m + 1
segments of the residual sum of squares of the regression of
``log S_k^k'(s_i)`` on ``log s_i``. Being segment-additive, it is minimized
exactly over a grid of candidate breakpoints by dynamic programming.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DegenerateSegmentError, InfeasibleSearchError
from .wvar import CoefficientCache, ScaleGrid, log_variance_vector

__all__ = [
    "RegressionDesign",
    "SearchSpace",
    "ChangePointResult",
    "ols_fit",
    "segment_cost",
    "cost_matrix",
    "detect_changes",
    "exhaustive_search",
    "contrast_profile",
]


@dataclass(frozen=True)
class RegressionDesign:
    """Design of the log-log regression.

    ``L`` has rows ``(log s_i, 1)`` (absolute scales), ``L1`` has rows
    ``(log(s_i/a_N), 1)``. Slopes agree between the two; intercepts differ by
    ``alpha * log a_N``.
    """

    log_scales: np.ndarray
    log_a: float

    @classmethod
    def from_grid(cls, grid: ScaleGrid) -> "RegressionDesign":
        return cls(grid.log_scales, math.log(grid.a_n))

    @classmethod
    def from_scales(cls, scales, a_n: float = 1.0) -> "RegressionDesign":
        return cls(np.log(np.asarray(scales, dtype=float)), math.log(a_n))

    def __post_init__(self):
        x = np.asarray(self.log_scales, dtype=float)
        object.__setattr__(self, "log_scales", x)
        if x.size < 3:
            raise ConfigError("regression needs at least three scales")
        if np.unique(x).size != x.size:
            raise ConfigError("singular design: duplicate scales")

    @property
    def ell(self) -> int:
        return self.log_scales.size

    @property
    def L(self) -> np.ndarray:
        return np.column_stack([self.log_scales, np.ones(self.ell)])

    @property
    def L1(self) -> np.ndarray:
        return np.column_stack([self.log_scales - self.log_a, np.ones(self.ell)])


def ols_fit(Y, design: RegressionDesign):
    """Least-squares fit of Y on ``log s_i``.

    Returns ``(alpha, log_beta, rss)`` with *log_beta* the intercept against
    the absolute abscissae. Y may be ``(ell,)`` or ``(ell, ...)``.
    """
    Y = np.asarray(Y, dtype=float)
    x = design.log_scales
    ell = x.size
    xbar = x.mean()
    xc = x - xbar
    sxx = float(xc @ xc)
    # explicit accumulation over scales keeps results bitwise identical for any shape of Y
    ysum = Y[0].copy()
    for i in range(1, ell):
        ysum = ysum + Y[i]
    ybar = ysum / ell
    sxy = xc[0] * (Y[0] - ybar)
    for i in range(1, ell):
        sxy = sxy + xc[i] * (Y[i] - ybar)
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    rss = (Y[0] - ybar - xc[0] * slope) ** 2
    for i in range(1, ell):
        rss = rss + (Y[i] - ybar - xc[i] * slope) ** 2
    if Y.ndim == 1:
        return float(slope), float(intercept), float(rss)
    return slope, intercept, rss


@dataclass(frozen=True)
class SearchSpace:
    """Admissible breakpoints: multiples of ``grid_step`` with every segment
    at least ``min_seg`` long."""

    n: int
    m: int
    min_seg: int
    grid_step: int

    @classmethod
    def default(cls, n: int, m: int, grid: ScaleGrid, min_seg: Optional[int] = None,
                grid_step: Optional[int] = None) -> "SearchSpace":
        smax = grid.max_scale
        floor_seg = 2 * smax
        if min_seg is None:
            min_seg = max(2 * smax * grid.ell, math.ceil(0.05 * n))
        if min_seg < floor_seg:
            raise ConfigError(f"min_seg {min_seg} below 2 x largest scale ({floor_seg})")
        return cls(n, m, int(min_seg), int(grid_step or smax))

    def __post_init__(self):
        if self.m < 0:
            raise ConfigError("m must be nonnegative")
        if self.grid_step < 1 or self.min_seg < 1:
            raise ConfigError("grid_step and min_seg must be positive")

    @property
    def candidates(self) -> np.ndarray:
        first = -(-self.min_seg // self.grid_step) * self.grid_step
        return np.arange(first, self.n - self.min_seg + 1, self.grid_step)

    @property
    def positions(self) -> np.ndarray:
        """Candidates framed by 0 and N."""
        return np.concatenate([[0], self.candidates, [self.n]]).astype(int)


@dataclass
class ChangePointResult:
    k_hat: tuple
    n: int
    contrast_value: float
    alpha: np.ndarray
    log_beta: np.ndarray
    rss: np.ndarray
    Y: list
    design: RegressionDesign = field(repr=False)
    space: Optional[SearchSpace] = None
    warnings: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.k_hat)

    @property
    def tau_hat(self) -> tuple:
        return tuple(k / self.n for k in self.k_hat)

    @property
    def bounds(self) -> list:
        k = (0,) + tuple(self.k_hat) + (self.n,)
        return list(zip(k[:-1], k[1:]))

    @property
    def intercept_L1(self) -> np.ndarray:
        return self.log_beta + self.alpha * self.design.log_a

    def to_dict(self) -> dict:
        return {
            "k_hat": [int(k) for k in self.k_hat],
            "tau_hat": list(self.tau_hat),
            "contrast_value": float(self.contrast_value),
            "segments": [
                {
                    "start": int(a),
                    "end": int(b),
                    "alpha": float(self.alpha[j]),
                    "log_beta_eq2": float(self.log_beta[j]),
                    "intercept_L1": float(self.intercept_L1[j]),
                    "rss": float(self.rss[j]),
                }
                for j, (a, b) in enumerate(self.bounds)
            ],
            "search": None if self.space is None else {
                "min_seg": self.space.min_seg,
                "grid_step": self.space.grid_step,
                "n_candidates": int(self.space.candidates.size),
            },
        }


def segment_cost(cache: CoefficientCache, k: int, k2: int, design: Optional[RegressionDesign] = None,
                 memo: Optional[dict] = None, warn: Optional[list] = None) -> float:
    """Residual sum of squares of the log-log fit on ``[k, k')``.

    Degenerate segments cost ``inf`` and append a message to *warn*.
    """
    key = (int(k), int(k2))
    if memo is not None and key in memo:
        return memo[key]
    design = design or RegressionDesign.from_grid(cache.grid)
    try:
        cost = ols_fit(log_variance_vector(cache, k, k2), design)[2]
    except DegenerateSegmentError as exc:
        cost = math.inf
        if warn is not None:
            warn.append(str(exc))
    if memo is not None:
        memo[key] = cost
    return cost


def cost_matrix(cache: CoefficientCache, positions: np.ndarray, min_seg: int,
                design: Optional[RegressionDesign] = None, return_degenerate: bool = False):
    """Costs of every segment ``[positions[a], positions[b])``, inf if inadmissible.

    With ``return_degenerate`` also returns the number of segments that are
    long enough but have a zero or non-finite wavelet variance.
    """
    design = design or RegressionDesign.from_grid(cache.grid)
    pos = np.asarray(positions, dtype=int)
    k, k2 = np.meshgrid(pos, pos, indexing="ij")
    length = k2 - k
    ok = length >= min_seg
    ok &= (cache.block_counts(k, k2) >= 2).all(axis=0)
    sums = cache.sums(k, k2)
    scales = np.asarray(cache.grid.scales, dtype=float).reshape(-1, 1, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        S = scales / np.where(ok, length, 1) * sums
        good = ok & (S > 0).all(axis=0) & np.isfinite(S).all(axis=0)
        Y = np.log(np.where(good, S, 1.0))
    rss = ols_fit(Y, design)[2]
    C = np.where(good, rss, np.inf)
    if return_degenerate:
        return C, int((ok & ~good).sum())
    return C


def _dp(C: np.ndarray, m: int):
    """Exact DP over a cost matrix; returns (value, breakpoint indices).

    Partial sums are accumulated left to right and ties are resolved in favour
    of the lexicographically smallest index path.
    """
    P = C.shape[0]
    last = P - 1
    F = C[0].copy()
    paths = [() for _ in range(P)]
    for _ in range(m):
        vals = F[:, None] + C
        best = vals.min(axis=0)
        newF = best.copy()
        newpaths = [None] * P
        for b in range(P):
            if not np.isfinite(best[b]):
                newpaths[b] = None
                continue
            ties = np.flatnonzero(vals[:, b] == best[b])
            a = ties[0] if ties.size == 1 else min(ties, key=lambda t: paths[t] + (t,))
            newpaths[b] = paths[a] + (int(a),)
        F, paths = newF, newpaths
    return F[last], paths[last]


def contrast_profile(cache: CoefficientCache, space: SearchSpace, max_m: int,
                     design: Optional[RegressionDesign] = None, exact: bool = False) -> np.ndarray:
    """Minimal contrast for m = 0..max_m changes on the same candidate grid.

    By default entry m is the best contrast with at most m changes, which is
    nonincreasing in m. With ``exact=True`` it is the best with exactly m
    changes; splitting a segment changes its variances, so that sequence
    need not be monotone.
    """
    pos = space.positions
    C = cost_matrix(cache, pos, space.min_seg, design)
    out = np.full(max_m + 1, np.inf)
    F = C[0].copy()
    out[0] = F[-1]
    for j in range(1, max_m + 1):
        F = (F[:, None] + C).min(axis=0)
        out[j] = F[-1]
    return out if exact else np.minimum.accumulate(out)


def detect_changes(cache: CoefficientCache, space: SearchSpace,
                   design: Optional[RegressionDesign] = None) -> ChangePointResult:
    """Minimize the contrast over all admissible configurations of m breakpoints."""
    design = design or RegressionDesign.from_grid(cache.grid)
    if space.n != cache.n:
        raise ConfigError(f"search space built for N={space.n}, series has N={cache.n}")
    pos = space.positions
    C, n_degenerate = cost_matrix(cache, pos, space.min_seg, design, return_degenerate=True)
    value, idx = _dp(C, space.m)
    if idx is None or not np.isfinite(value):
        if n_degenerate:
            raise DegenerateSegmentError(
                f"{n_degenerate} candidate segment(s) have zero or non-finite wavelet variance; "
                "is the series constant?")
        raise InfeasibleSearchError(
            f"no admissible configuration of {space.m} change(s) with min_seg={space.min_seg}, "
            f"grid_step={space.grid_step}, N={space.n}")
    k_hat = tuple(int(pos[i]) for i in idx)
    return _assemble(cache, k_hat, design, float(value), space)


def _assemble(cache, k_hat, design, value, space=None) -> ChangePointResult:
    bounds = list(zip((0,) + k_hat, k_hat + (cache.n,)))
    Ys = [log_variance_vector(cache, a, b) for a, b in bounds]
    alpha, log_beta, rss = ols_fit(np.column_stack(Ys), design)
    return ChangePointResult(k_hat, cache.n, value, np.atleast_1d(alpha), np.atleast_1d(log_beta),
                             np.atleast_1d(rss), Ys, design, space)


def exhaustive_search(cache: CoefficientCache, space: SearchSpace,
                      design: Optional[RegressionDesign] = None):
    """Brute-force minimizer over all configurations (small grids only).

    Returns ``(contrast, k_hat)``; ties go to the lexicographically smallest
    configuration.
    """
    from itertools import combinations

    design = design or RegressionDesign.from_grid(cache.grid)
    cands = [int(c) for c in space.candidates]
    best, best_k = math.inf, None
    memo = {}
    for ks in combinations(cands, space.m):
        bounds = list(zip((0,) + ks, ks + (space.n,)))
        if any(b - a < space.min_seg for a, b in bounds):
            continue
        total = 0.0
        for a, b in bounds:
            total += segment_cost(cache, a, b, design, memo)
        if total < best:
            best, best_k = total, ks
    return best, best_k
