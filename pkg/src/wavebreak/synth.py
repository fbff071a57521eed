"""Exact-covariance Gaussian generators.

Stationary processes (fractional Gaussian noise, FARIMA(0,d,0), white noise)
are synthesized by circulant embedding of their autocovariance, FBM by
cumulating FGN increments, and piecewise series by concatenating independent
segments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import linalg, special

from .errors import ConfigError, DataError, NumericalError

__all__ = [
    "StationarySpec",
    "FbmSpec",
    "PiecewiseSpec",
    "TimeSeries",
    "EmbeddingError",
    "make_rng",
    "fgn_autocovariance",
    "farima_autocovariance",
    "autocovariance",
    "circulant_eigenvalues",
    "gen_stationary",
    "gen_fbm",
    "gen_piecewise",
    "segment_bounds",
]

#: bit generator used for every simulation (fixed for cross-machine reproducibility)
BIT_GENERATOR = "PCG64"

_EIG_TOL = 1e-9


class EmbeddingError(NumericalError):
    """Circulant embedding produced significantly negative eigenvalues."""

    code = "embedding-invalid"


def make_rng(seed) -> np.random.Generator:
    """Return the package's generator seeded with *seed*.

    *seed* may be an int, a :class:`numpy.random.SeedSequence` or an
    existing Generator (returned as is).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class StationarySpec:
    """Stationary Gaussian model.

    family is one of ``"fgn"``, ``"farima"`` or ``"white"``; ``param`` holds
    the Hurst index for FGN and the memory parameter d for FARIMA(0,d,0).
    """

    family: str
    param: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self):
        if self.family not in ("fgn", "farima", "white"):
            raise ConfigError(f"unknown stationary family {self.family!r}")
        if not self.sigma2 > 0:
            raise ConfigError("sigma2 must be positive")
        if self.family == "fgn" and not 0 < self.param < 1:
            raise ConfigError("FGN Hurst index must lie in (0, 1)")
        if self.family == "farima" and not 0 < self.param < 0.5:
            raise ConfigError("FARIMA memory parameter d must lie in (0, 1/2)")

    @property
    def memory_exponent(self) -> float:
        """Spectral exponent D of f(l) ~ |l|^-D at the origin."""
        if self.family == "fgn":
            return 2 * self.param - 1
        if self.family == "farima":
            return 2 * self.param
        return 0.0

    def to_dict(self) -> dict:
        return {"kind": self.family, "param": self.param, "sigma2": self.sigma2}


@dataclass(frozen=True)
class FbmSpec:
    hurst: float
    sigma2: float = 1.0

    def __post_init__(self):
        if not 0 < self.hurst < 1:
            raise ConfigError("FBM Hurst index must lie in (0, 1)")
        if not self.sigma2 > 0:
            raise ConfigError("sigma2 must be positive")

    def to_dict(self) -> dict:
        return {"kind": "fbm", "param": self.hurst, "sigma2": self.sigma2}


SegmentSpec = Union[StationarySpec, FbmSpec]


def segment_spec_from_dict(d: dict) -> SegmentSpec:
    kind = d["kind"]
    if kind == "fbm":
        return FbmSpec(float(d["param"]), float(d.get("sigma2", 1.0)))
    return StationarySpec(kind, float(d.get("param", 0.0)), float(d.get("sigma2", 1.0)))


@dataclass(frozen=True)
class PiecewiseSpec:
    """Piecewise model with ``m = len(change_fractions)`` abrupt changes.

    The generated series has ``n_samples + 1`` values X_0..X_N.
    """

    n_samples: int
    change_fractions: tuple
    segment_specs: tuple
    seed: int = 0
    level_pasting: bool = False

    def __post_init__(self):
        object.__setattr__(self, "change_fractions", tuple(float(t) for t in self.change_fractions))
        object.__setattr__(self, "segment_specs", tuple(self.segment_specs))
        if self.n_samples < 2:
            raise ConfigError("n_samples must be at least 2")
        taus = self.change_fractions
        if any(not 0 < t < 1 for t in taus) or any(b <= a for a, b in zip(taus, taus[1:])):
            raise ConfigError("change fractions must be strictly increasing in (0, 1)")
        if len(self.segment_specs) != len(taus) + 1:
            raise ConfigError("need exactly m + 1 segment specs for m change fractions")
        bounds = segment_bounds(self.n_samples, taus)
        if any(hi - lo < 2 for lo, hi in bounds):
            raise ConfigError("a segment has fewer than two samples")

    @property
    def m(self) -> int:
        return len(self.change_fractions)

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "change_fractions": list(self.change_fractions),
            "segments": [s.to_dict() for s in self.segment_specs],
            "seed": self.seed,
            "level_pasting": self.level_pasting,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseSpec":
        return cls(
            n_samples=int(d["n_samples"]),
            change_fractions=tuple(d["change_fractions"]),
            segment_specs=tuple(segment_spec_from_dict(s) for s in d["segments"]),
            seed=int(d.get("seed", 0)),
            level_pasting=bool(d.get("level_pasting", False)),
        )


@dataclass
class TimeSeries:
    values: np.ndarray
    truth: Optional[PiecewiseSpec] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise DataError("a time series needs at least two samples")
        if not np.all(np.isfinite(self.values)):
            raise DataError("time series contains non-finite values")

    @property
    def n(self) -> int:
        """Largest sample index N (the series is X_0..X_N)."""
        return self.values.size - 1

    def __len__(self):
        return self.values.size


def fgn_autocovariance(H, sigma2=1.0, lag=0):
    """Autocovariance of fractional Gaussian noise at integer *lag*.

    ``(sigma2 / 2) (|k+1|^2H - 2|k|^2H + |k-1|^2H)``; vectorized over *lag*.
    """
    if not 0 < H < 1:
        raise ConfigError("H must lie in (0, 1)")
    if not sigma2 > 0:
        raise ConfigError("sigma2 must be positive")
    k = np.abs(np.asarray(lag, dtype=float))
    h2 = 2.0 * H
    out = 0.5 * sigma2 * (np.abs(k + 1) ** h2 - 2 * k**h2 + np.abs(k - 1) ** h2)
    return out if out.ndim else float(out)


def farima_autocovariance(d, sigma2=1.0, lag=0):
    """Autocovariance of FARIMA(0,d,0) with innovation variance *sigma2*.

    gamma(k) = sigma2 G(1-2d) G(k+d) / (G(d) G(1-d) G(k+1-d)), evaluated
    through log-gamma differences for stability at large lags.
    """
    if not -0.5 < d < 0.5:
        raise ConfigError("d must lie in (-1/2, 1/2)")
    k = np.abs(np.asarray(lag, dtype=float))
    if d == 0:
        out = np.where(k == 0, float(sigma2), 0.0)
        return out if out.ndim else float(out)
    g0 = sigma2 * math.exp(special.gammaln(1 - 2 * d) - 2 * special.gammaln(1 - d))
    # gamma(k)/gamma(0) = G(k+d) G(1-d) / (G(d) G(k+1-d))
    ratio = np.exp(
        special.gammaln(k + d) - special.gammaln(d) + special.gammaln(1 - d) - special.gammaln(k + 1 - d)
    )
    if d < 0:
        ratio = ratio * np.sign(special.gamma(k + d) / special.gamma(d))
    out = g0 * ratio
    return out if out.ndim else float(out)


def autocovariance(spec: StationarySpec, lags) -> np.ndarray:
    lags = np.asarray(lags)
    if spec.family == "fgn":
        return np.asarray(fgn_autocovariance(spec.param, spec.sigma2, lags), dtype=float)
    if spec.family == "farima":
        return np.asarray(farima_autocovariance(spec.param, spec.sigma2, lags), dtype=float)
    return np.where(lags == 0, spec.sigma2, 0.0).astype(float)


def circulant_eigenvalues(acov: np.ndarray) -> np.ndarray:
    """Eigenvalues of the minimal circulant embedding of ``acov[0..n]``.

    The first row is ``acov[0], ..., acov[n], acov[n-1], ..., acov[1]`` (size 2n).
    """
    row = np.concatenate([acov, acov[-2:0:-1]])
    return np.fft.rfft(row).real


def _circulant_sample(acov: np.ndarray, n: int, rng: np.random.Generator, size=None) -> np.ndarray:
    eig = circulant_eigenvalues(acov)
    if eig.min() < -_EIG_TOL * eig.max():
        raise EmbeddingError(f"circulant embedding not nonnegative definite (min eigenvalue {eig.min():.3g})")
    eig = np.clip(eig, 0.0, None)
    m = 2 * (acov.size - 1)
    shape = (m // 2 + 1,) if size is None else (size, m // 2 + 1)
    # Hermitian-symmetric Gaussian spectrum: real at DC and Nyquist, complex in between.
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    z[..., 1:-1] /= np.sqrt(2.0)
    z[..., 0] = z[..., 0].real
    z[..., -1] = z[..., -1].real
    x = np.fft.irfft(np.sqrt(eig * m) * z, n=m)
    return x[..., :n]


def _cholesky_sample(acov: np.ndarray, n: int, rng: np.random.Generator, size=None) -> np.ndarray:
    chol = linalg.cholesky(linalg.toeplitz(acov[:n]), lower=True)
    z = rng.standard_normal((n,) if size is None else (size, n))
    return z @ chol.T


def _stationary_values(spec: StationarySpec, n: int, rng, size=None) -> np.ndarray:
    if spec.family == "white":
        shape = (n,) if size is None else (size, n)
        return math.sqrt(spec.sigma2) * rng.standard_normal(shape)
    acov = autocovariance(spec, np.arange(n + 1))
    try:
        return _circulant_sample(acov, n, rng, size)
    except EmbeddingError:
        if n > 2048:
            raise
        return _cholesky_sample(acov, n, rng, size)


def gen_stationary(spec: StationarySpec, n: int, seed=None, size=None):
    """Sample *n* consecutive values of a stationary Gaussian process.

    With ``size`` given, returns a ``(size, n)`` array of independent paths
    instead of a :class:`TimeSeries`.
    """
    if n < 2:
        raise ConfigError("n must be at least 2")
    rng = make_rng(seed)
    x = _stationary_values(spec, n, rng, size)
    if size is not None:
        return x
    return TimeSeries(x, meta={"model": spec.to_dict(), "seed": _seed_repr(seed)})


def gen_fbm(H: float, sigma2: float = 1.0, n: int = 1024, seed=None, size=None):
    """Sample FBM at times 0..n-1 (``X_0 = 0``, ``Var X_t = sigma2 t^2H``)."""
    spec = FbmSpec(H, sigma2)
    if n < 2:
        raise ConfigError("n must be at least 2")
    rng = make_rng(seed)
    incr = _stationary_values(StationarySpec("fgn", spec.hurst, spec.sigma2) if H != 0.5
                              else StationarySpec("white", 0.0, spec.sigma2), n - 1, rng, size)
    x = np.zeros(incr.shape[:-1] + (n,))
    np.cumsum(incr, axis=-1, out=x[..., 1:])
    if size is not None:
        return x
    return TimeSeries(x, meta={"model": spec.to_dict(), "seed": _seed_repr(seed)})


def segment_bounds(n_samples: int, change_fractions: Sequence[float]) -> list:
    """Half-open index ranges ``[lo, hi)`` of the segments of X_0..X_N.

    Segment j starts at ``floor(N tau_j)``; the last one runs through X_N.
    """
    cuts = [0] + [int(math.floor(n_samples * t)) for t in change_fractions] + [n_samples + 1]
    return list(zip(cuts[:-1], cuts[1:]))


def _segment_values(spec: SegmentSpec, n: int, rng) -> np.ndarray:
    if isinstance(spec, FbmSpec):
        return gen_fbm(spec.hurst, spec.sigma2, n, rng).values
    return _stationary_values(spec, n, rng)


def gen_piecewise(spec: PiecewiseSpec, size=None):
    """Sample X_0..X_N from a piecewise model.

    Every segment is an independent path of its own model restarted at its
    first index (FBM segments start from 0). With ``spec.level_pasting`` each
    segment is shifted by the previous segment's last value.
    """
    rng = make_rng(spec.seed)
    if size is not None:
        return np.stack([_piecewise_values(spec, rng) for _ in range(size)])
    x = _piecewise_values(spec, rng)
    return TimeSeries(x, truth=spec, meta={"model": spec.to_dict(), "seed": spec.seed})


def _piecewise_values(spec: PiecewiseSpec, rng) -> np.ndarray:
    x = np.empty(spec.n_samples + 1)
    for (lo, hi), seg in zip(segment_bounds(spec.n_samples, spec.change_fractions), spec.segment_specs):
        x[lo:hi] = _segment_values(seg, hi - lo, rng)
        if spec.level_pasting and lo > 0:
            x[lo:hi] += x[lo - 1]
    return x


def _seed_repr(seed):
    return seed if isinstance(seed, (int, np.integer)) or seed is None else str(seed)
