"""Wavelet coefficients, piecewise sample variances and log-variance vectors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, DegenerateSegmentError, InvalidCoefficientError, TooFewBlocksError
from .wavelets import WaveletSpec, get_wavelet

__all__ = [
    "ScaleGrid",
    "CoefficientCache",
    "wavelet_coeff",
    "block_coefficients",
    "segment_variance",
    "log_variance_vector",
    "base_scale",
    "whole_series_log_variance",
]

KAPPA_MAX_LRD = 2.0 / 15.0


def base_scale(n: int, regime: str, kappa: float) -> float:
    """Unrounded base scale: ``N^(kappa+1/5)`` (lrd) or ``N^(1/3+kappa)`` (fbm)."""
    if regime == "lrd":
        if not 0 < kappa < KAPPA_MAX_LRD:
            raise ConfigError(f"lrd regime needs 0 < kappa < 2/15, got {kappa}")
        return n ** (kappa + 0.2)
    if regime == "fbm":
        if not 0 < kappa < 2.0 / 3.0:
            raise ConfigError(f"fbm regime needs 0 < kappa < 2/3, got {kappa}")
        return n ** (1.0 / 3.0 + kappa)
    raise ConfigError(f"unknown regime {regime!r}")


@dataclass(frozen=True)
class ScaleGrid:
    """Integer analysis scales ``round(r_i * a_N)`` for a base scale a_N.

    ``a_N`` is rounded to the nearest integer (at least ``a_min``) before the
    multipliers are applied, so integer multipliers give exact multiples.
    """

    a_n: int
    multipliers: tuple
    regime: str = "lrd"
    kappa: float = float("nan")
    a_min: int = 2
    a_n_raw: float = float("nan")

    def __post_init__(self):
        r = tuple(float(v) for v in self.multipliers)
        object.__setattr__(self, "multipliers", r)
        if len(r) < 3:
            raise ConfigError("at least three scales are required")
        if any(v <= 0 for v in r) or any(b <= a for a, b in zip(r, r[1:])):
            raise ConfigError("scale multipliers must be positive and strictly increasing")
        if self.a_n < self.a_min:
            raise ConfigError(f"base scale {self.a_n} below minimum {self.a_min}")
        if len(set(self.scales)) != len(r):
            raise ConfigError("rounded scales collide; use a larger base scale or spread multipliers")

    @classmethod
    def for_length(cls, n: int, regime: str = "lrd", kappa: float = 0.05,
                   multipliers=(1, 2, 3, 4, 5), a_min: int = 2) -> "ScaleGrid":
        raw = base_scale(n, regime, kappa)
        a = max(int(round(raw)), a_min)
        return cls(a, tuple(multipliers), regime, kappa, a_min, raw)

    @property
    def ell(self) -> int:
        return len(self.multipliers)

    @property
    def scales(self) -> tuple:
        return tuple(max(int(round(r * self.a_n)), self.a_min) for r in self.multipliers)

    @property
    def effective_multipliers(self) -> np.ndarray:
        """Ratios of the rounded scales to the base scale."""
        return np.array(self.scales, dtype=float) / self.a_n

    @property
    def log_scales(self) -> np.ndarray:
        return np.log(np.array(self.scales, dtype=float))

    @property
    def max_scale(self) -> int:
        return max(self.scales)

    def to_dict(self) -> dict:
        return {
            "a_n": self.a_n,
            "a_n_raw": self.a_n_raw,
            "multipliers": list(self.multipliers),
            "scales": list(self.scales),
            "regime": self.regime,
            "kappa": self.kappa,
        }


def wavelet_coeff(x, w, a: float, b: float, a_min: float = 2.0) -> float:
    """Discretized coefficient ``a^(-1/2) sum_{p=1}^N psi((p-b)/a) X_p``.

    Only indices with ``(p - b)/a`` in [0, 1] contribute; the window
    ``[b, b + a]`` must lie inside [0, N].
    """
    x = np.asarray(getattr(x, "values", x), dtype=float)
    w = get_wavelet(w)
    n = x.size - 1
    if a < a_min:
        raise InvalidCoefficientError(f"scale {a} below minimum {a_min}")
    if b < 0 or b + a > n:
        raise InvalidCoefficientError(f"window [{b}, {b + a}] not inside [0, {n}]")
    lo = max(1, math.ceil(b))
    hi = math.floor(b + a)
    p = np.arange(lo, hi + 1)
    return float(np.dot(w.sampled((p - b) / a), x[p]) / math.sqrt(a))


def block_coefficients(x: np.ndarray, w, scale: int) -> np.ndarray:
    """Coefficients ``e(scale, scale*p)`` for every block p fully inside [0, N].

    Works along the last axis, so a ``(R, N+1)`` stack of paths yields a
    ``(R, N // scale)`` array.
    """
    w = get_wavelet(w)
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] - 1
    nblocks = n // scale
    if nblocks < 1:
        return np.zeros(x.shape[:-1] + (0,))
    h = w.filter(scale)
    # the defining sum starts at p = 1, so X_0 never contributes
    h0 = np.broadcast_to(h, (nblocks, scale + 1)).copy()
    h0[0, 0] = 0.0
    win = sliding_window_view(x[..., : nblocks * scale + 1], scale + 1, axis=-1)[..., ::scale, :]
    return np.einsum("...pt,pt->...p", win, h0)


@dataclass
class CoefficientCache:
    """Squared block coefficients and their prefix sums for every scale."""

    grid: ScaleGrid
    wavelet: WaveletSpec
    n: int
    sq_coeffs: list = field(repr=False)
    prefix: list = field(repr=False)

    @classmethod
    def build(cls, x, grid: ScaleGrid, wavelet="poly4") -> "CoefficientCache":
        values = np.asarray(getattr(x, "values", x), dtype=float)
        w = get_wavelet(wavelet)
        n = values.size - 1
        if n // grid.max_scale < 2:
            raise TooFewBlocksError(f"series of length {n + 1} too short for scale {grid.max_scale}")
        sq, pre = [], []
        for s in grid.scales:
            e2 = block_coefficients(values, w, s) ** 2
            sq.append(e2)
            pre.append(np.concatenate([[0.0], np.cumsum(e2)]))
        return cls(grid, w, n, sq, pre)

    def block_range(self, k: int, k2: int, i: int):
        s = self.grid.scales[i]
        return k // s, k2 // s

    def sums(self, k, k2) -> np.ndarray:
        """Block sums of squared coefficients per scale, shape ``(ell,) + shape(k)``.

        Vectorized over array-valued *k*, *k2*.
        """
        k = np.asarray(k)
        k2 = np.asarray(k2)
        out = np.empty((self.grid.ell,) + np.broadcast(k, k2).shape)
        for i, s in enumerate(self.grid.scales):
            out[i] = self.prefix[i][k2 // s] - self.prefix[i][k // s]
        return out

    def block_counts(self, k, k2) -> np.ndarray:
        k = np.asarray(k)
        k2 = np.asarray(k2)
        return np.stack([k2 // s - k // s for s in self.grid.scales])


def segment_variance(cache: CoefficientCache, k: int, k2: int, i: int) -> float:
    """Piecewise sample variance S_k^k'(s_i) from prefix sums.

    ``s_i/(k'-k) * sum_{p=[k/s_i]}^{[k'/s_i]-1} e^2(s_i, s_i p)``.
    """
    if not 0 <= k < k2 <= cache.n:
        raise InvalidCoefficientError(f"need 0 <= k < k' <= {cache.n}, got ({k}, {k2})")
    s = cache.grid.scales[i]
    p0, p1 = k // s, k2 // s
    if p1 - p0 < 2:
        raise TooFewBlocksError(f"segment [{k}, {k2}) has {p1 - p0} block(s) at scale {s}")
    return s / (k2 - k) * (cache.prefix[i][p1] - cache.prefix[i][p0])


def log_variance_vector(cache: CoefficientCache, k: int, k2: int) -> np.ndarray:
    """Natural logs of S_k^k' at every scale of the grid."""
    S = np.array([segment_variance(cache, k, k2, i) for i in range(cache.grid.ell)])
    if not np.all(S > 0) or not np.all(np.isfinite(S)):
        raise DegenerateSegmentError(f"non-positive wavelet variance on [{k}, {k2})")
    return np.log(S)


def whole_series_log_variance(paths: np.ndarray, grid: ScaleGrid, wavelet="poly4") -> np.ndarray:
    """Log sample variances over the full range [0, N] for a stack of paths.

    Returns shape ``(R, ell)``; used for Monte Carlo calibration.
    """
    paths = np.atleast_2d(paths)
    n = paths.shape[-1] - 1
    out = np.empty((paths.shape[0], grid.ell))
    for i, s in enumerate(grid.scales):
        e2 = block_coefficients(paths, wavelet, s) ** 2
        out[:, i] = np.log(s / n * e2.sum(axis=-1))
    return out
