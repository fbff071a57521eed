"""Per-segment inference: refinement, covariance Gamma, OLS/FGLS and goodness of fit."""
from __future__ import annotations

import json
import math
import os
import threading
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy import linalg, stats

from .errors import ConfigError, NumericalError, UnusableSegmentsError, WavebreakError
from .segmentation import ChangePointResult, RegressionDesign, ols_fit
from .synth import StationarySpec, gen_fbm, gen_stationary, make_rng
from .wavelets import get_wavelet
from .wvar import CoefficientCache, ScaleGrid, log_variance_vector, whole_series_log_variance

__all__ = [
    "rate_v",
    "exponent_spread",
    "RefinedSegment",
    "refine_segments",
    "GammaMatrix",
    "gamma_mc",
    "gamma_fbm_analytic",
    "GammaTable",
    "sigma_matrix",
    "fgls_fit",
    "goodness_test",
    "SegmentEstimate",
    "estimate_segments",
    "GAMMA_TABLE_VERSION",
]

Z975 = 1.96
GAMMA_TABLE_VERSION = 1
ALPHA_RANGE = {"lrd": (0.0, 1.0), "fbm": (1.0, 3.0)}
GAMMA_ENV = "WAVEBREAK_GAMMA_DIR"


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

def rate_v(n: int, regime: str, kappa: float, spread: float = 0.0) -> float:
    """Convergence rate v_N of the change-point estimator.

    ``N^(2/5 - 3 kappa)`` for lrd, ``N^(2/3 (1 - 2A) - kappa (2 + 4A))`` for fbm
    where *spread* is A, the spread of the Hurst indices.
    """
    if regime == "lrd":
        return n ** (0.4 - 3 * kappa)
    if regime == "fbm":
        return n ** (2.0 / 3.0 * (1 - 2 * spread) - kappa * (2 + 4 * spread))
    raise ConfigError(f"unknown regime {regime!r}")


def exponent_spread(alpha, regime: str, cap: float = 0.49):
    """Spread A of Hurst indices implied by scaling exponents, clamped to [0, cap].

    Returns ``(A, clamped)``; only meaningful in the fbm regime (H = (alpha-1)/2).
    """
    alpha = np.asarray(alpha, dtype=float)
    if regime != "fbm" or alpha.size < 2:
        return 0.0, False
    a = float(alpha.max() - alpha.min()) / 2.0
    clamped = a > cap
    return min(max(a, 0.0), cap), clamped


@dataclass
class RefinedSegment:
    start: int
    end: int
    detected: tuple
    usable: bool = True
    reason: str = ""

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass
class RefinedSegments:
    segments: list
    v_n: float
    margin: int
    spread: float = 0.0
    warnings: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)

    def to_dict(self) -> dict:
        return {
            "v_n": self.v_n,
            "margin": self.margin,
            "spread": self.spread,
            "segments": [
                {"start": s.start, "end": s.end, "detected": list(s.detected), "usable": s.usable, "reason": s.reason}
                for s in self.segments
            ],
        }


def refine_segments(result, regime: str, kappa: float, alpha_spread: float = 0.0,
                    max_trim: Optional[float] = 0.25, grid: Optional[ScaleGrid] = None,
                    v_n: Optional[float] = None) -> RefinedSegments:
    """Shrink every detected segment by ``ceil(N / v_N)`` on both sides.

    *result* is a :class:`ChangePointResult` or a pair ``(k_hat, N)``.
    With *max_trim* set, the trim of a segment never exceeds that fraction of
    its detected length. Segments left with fewer than two blocks at the
    largest scale of *grid* are flagged unusable.
    """
    if isinstance(result, ChangePointResult):
        k_hat, n = result.k_hat, result.n
    else:
        k_hat, n = result
    if v_n is None:
        v_n = rate_v(n, regime, kappa, alpha_spread)
    notes = []
    if not v_n >= 1:
        if max_trim is None:
            raise ConfigError(f"rate v_N = {v_n:.3g} < 1; margin would exceed the series")
        notes.append(f"rate v_N = {v_n:.3g} < 1; trims fall back to the {max_trim:g} cap")
    margin = max(1, math.ceil(n / v_n))
    cuts = (0,) + tuple(int(k) for k in k_hat) + (n,)
    segs = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        trim = margin
        if max_trim is not None:
            cap = int(math.floor(max_trim * (hi - lo)))
            if cap < trim:
                trim = max(cap, 1)
        seg = RefinedSegment(lo + trim, hi - trim, (lo, hi))
        if seg.start >= seg.end:
            seg.usable, seg.reason = False, f"margin {trim} leaves no samples in [{lo}, {hi})"
        elif grid is not None and seg.end // grid.max_scale - seg.start // grid.max_scale < 2:
            seg.usable, seg.reason = False, f"refined segment [{seg.start}, {seg.end}) shorter than two blocks at scale {grid.max_scale}"
        if trim < margin:
            notes.append(f"trim of segment [{lo}, {hi}) capped at {trim} (< {margin})")
        segs.append(seg)
    if not any(s.usable for s in segs):
        raise UnusableSegmentsError(f"every refined segment is unusable (margin {margin})")
    return RefinedSegments(segs, float(v_n), margin, alpha_spread, notes)


# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------

@dataclass
class GammaMatrix:
    """Asymptotic covariance of the normalized log-variance vector at one alpha."""

    matrix: np.ndarray
    alpha: float
    provenance: dict
    scales: tuple
    a_n: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        self.matrix = 0.5 * (m + m.T)

    @property
    def ell(self) -> int:
        return self.matrix.shape[0]

    def check(self):
        eig = np.linalg.eigvalsh(self.matrix)
        if eig.min() <= 0:
            raise NumericalError(f"Gamma at alpha={self.alpha} not positive definite (min eig {eig.min():.3g})")
        return eig


def _check_alpha(alpha, regime):
    lo, hi = ALPHA_RANGE[regime]
    ok = (lo <= alpha < hi) if regime == "lrd" else (lo < alpha < hi)
    if not ok:
        raise ConfigError(f"alpha={alpha} outside the {regime} range ({lo}, {hi})")


def _reference_paths(alpha, regime, n, size, rng, lrd_family="farima"):
    if regime == "fbm":
        return gen_fbm((alpha - 1) / 2, 1.0, n, rng, size=size)
    if alpha == 0:
        spec = StationarySpec("white")
    elif lrd_family == "fgn":
        spec = StationarySpec("fgn", (1 + alpha) / 2)
    else:
        spec = StationarySpec("farima", alpha / 2)
    return gen_stationary(spec, n, rng, size=size)


def gamma_mc(alpha: float, regime: str, grid: ScaleGrid, wavelet="poly4", R: int = 400,
             n_ref: Optional[int] = None, seed=0, lrd_family: str = "farima", chunk: int = 50) -> GammaMatrix:
    """Monte Carlo estimate of Gamma(alpha) on the scales of *grid*.

    Simulates *R* homogeneous paths of length ``n_ref + 1`` (FBM with
    H = (alpha-1)/2, or an LRD process with D = alpha; alpha = 0 gives white
    noise) and returns the covariance of ``sqrt(n_ref/a_N) log S_0^N(s_i)``.
    """
    _check_alpha(alpha, regime)
    if R < 200:
        raise ConfigError("gamma_mc needs R >= 200 replicates")
    if n_ref is None:
        n_ref = 200 * grid.max_scale
    if n_ref // grid.max_scale < 100:
        raise ConfigError("n_ref must give at least 100 blocks at the coarsest scale")
    rng = make_rng(seed)
    Ys = []
    for start in range(0, R, chunk):
        size = min(chunk, R - start)
        paths = _reference_paths(alpha, regime, n_ref + 1, size, rng, lrd_family)
        Ys.append(whole_series_log_variance(paths, grid, wavelet))
    Y = np.concatenate(Ys)
    mat = (n_ref / grid.a_n) * np.cov(Y, rowvar=False)
    prov = {"method": "mc", "R": R, "n_ref": n_ref, "seed": _seed_tag(seed), "lrd_family": lrd_family,
            "wavelet": get_wavelet(wavelet).name}
    return GammaMatrix(mat, float(alpha), prov, tuple(grid.scales), grid.a_n)


def _seed_tag(seed):
    return seed if isinstance(seed, (int, np.integer)) else repr(seed)


def _gl_nodes(panels: int = 8, order: int = 16):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0, 1, panels + 1)
    u = np.concatenate([(a + b) / 2 + (b - a) / 2 * x for a, b in zip(edges[:-1], edges[1:])])
    wu = np.concatenate([(b - a) / 2 * w for a, b in zip(edges[:-1], edges[1:])])
    return u, wu


def _fbm_coeff_cov(H, sp, sq, deltas, psi, nodes):
    """Cov(d(sp, b), d(sq, b - delta)) for unit-variance FBM in continuous time."""
    u, wu = nodes
    fu = psi(u) * wu
    out = np.empty(len(deltas))
    base = sp * u[:, None] - sq * u[None, :]
    weight = fu[:, None] * fu[None, :]
    for j, d in enumerate(deltas):
        out[j] = -0.5 * math.sqrt(sp * sq) * np.sum(weight * np.abs(base + d) ** (2 * H))
    return out


def gamma_fbm_analytic(H: float, grid: ScaleGrid, wavelet="poly4", K: int = 50,
                       nodes: Optional[tuple] = None) -> GammaMatrix:
    """Gamma for FBM from the exact covariance of continuous-time coefficients.

    For Gaussian coefficients ``Cov(d^2, d'^2) = 2 Cov(d, d')^2``; summing the
    squared correlations over all block shifts gives
    ``gamma_pq = (2 g / a_N) sum_{delta in gZ} rho_pq(delta)^2`` with
    ``g = gcd(s_p, s_q)``. Shifts are truncated at ``K * max(s_p, s_q)``.
    """
    if not 0 < H < 1:
        raise ConfigError("H must lie in (0, 1)")
    if K < 50:
        raise ConfigError("truncation K must be at least 50")
    w = get_wavelet(wavelet)
    psi = w.evaluate
    nodes = nodes or _gl_nodes()
    scales = [int(s) for s in grid.scales]
    ell = len(scales)
    var = [_fbm_coeff_cov(H, s, s, [0.0], psi, nodes)[0] for s in scales]
    mat = np.empty((ell, ell))
    worst_tail = 0.0
    for p in range(ell):
        for q in range(p, ell):
            sp, sq = scales[p], scales[q]
            g = math.gcd(sp, sq)
            kmax = K * max(sp, sq) // g
            lags = np.arange(-kmax, kmax + 1) * g
            c = _fbm_coeff_cov(H, sp, sq, lags.astype(float), psi, nodes)
            rho2 = c**2 / (var[p] * var[q])
            total = rho2.sum()
            tail = rho2[[0, -1]].sum()
            worst_tail = max(worst_tail, tail / total)
            mat[p, q] = mat[q, p] = 2.0 * g / grid.a_n * total
    if worst_tail > 0.01:
        warnings.warn(f"Gamma truncation tail {worst_tail:.2%} exceeds 1%; increase K", RuntimeWarning)
    prov = {"method": "analytic-fbm", "K": K, "nodes": int(nodes[0].size), "wavelet": w.name,
            "tail_fraction": worst_tail}
    return GammaMatrix(mat, 2 * H + 1, prov, tuple(scales), grid.a_n)


class GammaTable:
    """Gamma on an alpha grid (step 0.05) with linear interpolation between nodes.

    Nodes are computed lazily and may be persisted to a JSON table file.
    ``method`` is ``"mc"`` (any regime) or ``"analytic"`` (fbm only).
    """

    def __init__(self, regime: str, grid: ScaleGrid, wavelet="poly4", method: Optional[str] = None,
                 R: int = 400, n_ref: Optional[int] = None, seed: int = 0, step: float = 0.05,
                 K: int = 50, lrd_family: str = "farima"):
        if regime not in ALPHA_RANGE:
            raise ConfigError(f"unknown regime {regime!r}")
        method = method or ("analytic" if regime == "fbm" else "mc")
        if method == "analytic" and regime != "fbm":
            raise ConfigError("analytic Gamma is only available in the fbm regime")
        self.regime = regime
        self.grid = grid
        self.wavelet = get_wavelet(wavelet)
        self.method = method
        self.R, self.n_ref, self.seed, self.step, self.K = R, n_ref, seed, step, K
        self.lrd_family = lrd_family
        lo, hi = ALPHA_RANGE[regime]
        nmax = int(round((hi - lo) / step))
        first = 0 if regime == "lrd" else 1
        self.nodes = lo + step * np.arange(first, nmax)
        self._cache: dict = {}
        self._lock = threading.Lock()

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    # identity of the table; a loaded file must match it
    def key(self) -> dict:
        return {
            "regime": self.regime,
            "scales": list(self.grid.scales),
            "a_n": self.grid.a_n,
            "ell": self.grid.ell,
            "wavelet": self.wavelet.name,
            "method": self.method,
            "R": self.R if self.method == "mc" else None,
            "n_ref": self.n_ref if self.method == "mc" else None,
            "K": self.K if self.method == "analytic" else None,
            "step": self.step,
            "lrd_family": self.lrd_family if self.regime == "lrd" else None,
        }

    def clamp(self, alpha: float):
        lo, hi = self.nodes[0], self.nodes[-1]
        a = float(np.clip(alpha, lo, hi))
        return a, a != alpha

    def node(self, i: int) -> GammaMatrix:
        with self._lock:
            if i in self._cache:
                return self._cache[i]
        alpha = float(self.nodes[i])
        if self.method == "analytic":
            G = gamma_fbm_analytic((alpha - 1) / 2, self.grid, self.wavelet, self.K)
        else:
            seed = np.random.SeedSequence([self.seed, i])
            G = gamma_mc(alpha, self.regime, self.grid, self.wavelet, self.R, self.n_ref, seed,
                         self.lrd_family)
            G.provenance["seed"] = [self.seed, i]
        with self._lock:
            self._cache.setdefault(i, G)
            return self._cache[i]

    def __call__(self, alpha: float) -> GammaMatrix:
        a, _ = self.clamp(alpha)
        pos = (a - self.nodes[0]) / self.step
        i = min(int(math.floor(pos + 1e-12)), len(self.nodes) - 1)
        t = pos - i
        G0 = self.node(i)
        if t <= 1e-12 or i == len(self.nodes) - 1:
            mat = G0.matrix
        else:
            mat = (1 - t) * G0.matrix + t * self.node(i + 1).matrix
        prov = dict(G0.provenance, interpolated=bool(t > 1e-12), table=self.method)
        return GammaMatrix(mat, a, prov, tuple(self.grid.scales), self.grid.a_n)

    def fill(self, alphas=None):
        idx = range(len(self.nodes)) if alphas is None else sorted(
            {int(math.floor((self.clamp(a)[0] - self.nodes[0]) / self.step + 1e-12)) for a in alphas})
        for i in idx:
            self.node(i)
        return self

    def to_dict(self) -> dict:
        return {
            "version": GAMMA_TABLE_VERSION,
            "key": self.key(),
            "entries": [
                {"alpha": float(self.nodes[i]), "matrix": self._cache[i].matrix.tolist(),
                 "provenance": self._cache[i].provenance}
                for i in sorted(self._cache)
            ],
        }

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(self.to_dict(), indent=1))
        os.replace(tmp, path)
        return path

    def load(self, path, strict: bool = True) -> "GammaTable":
        """Merge nodes from a saved table; mismatching keys raise (or are ignored)."""
        doc = json.loads(Path(path).read_text())
        if doc.get("version") != GAMMA_TABLE_VERSION:
            raise ConfigError(f"unsupported Gamma table version {doc.get('version')}")
        if doc["key"] != json.loads(json.dumps(self.key())):
            if strict:
                raise ConfigError(f"Gamma table {path} was built for a different configuration")
            return self
        for e in doc["entries"]:
            i = int(round((e["alpha"] - self.nodes[0]) / self.step))
            self._cache[i] = GammaMatrix(np.array(e["matrix"]), e["alpha"], e["provenance"],
                                         tuple(self.grid.scales), self.grid.a_n)
        return self

    def default_path(self, directory=None) -> Path:
        directory = Path(directory or os.environ.get(GAMMA_ENV, Path.home() / ".cache" / "wavebreak"))
        k = self.key()
        tag = "-".join(str(v) for v in (k["regime"], k["method"], k["wavelet"], "s" + "_".join(map(str, k["scales"])),
                                        k["R"], k["n_ref"], k["K"], k["lrd_family"]))
        return directory / f"gamma-{tag}.json"


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def _as_matrix(gamma):
    return gamma.matrix if isinstance(gamma, GammaMatrix) else np.asarray(gamma, dtype=float)


def _cho(G):
    try:
        return linalg.cho_factor(G)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"Gamma is not positive definite: {exc}") from None


def sigma_matrix(design: RegressionDesign, gamma) -> np.ndarray:
    """Asymptotic covariance ``(L1'L1)^-1 L1' Gamma L1 (L1'L1)^-1`` of the OLS estimate."""
    L1 = design.L1
    A = np.linalg.solve(L1.T @ L1, L1.T)
    return A @ _as_matrix(gamma) @ A.T


def fgls_fit(Y, design: RegressionDesign, gamma, cond_max: float = 1e8):
    """Generalized least squares fit of Y on ``log s_i`` weighted by Gamma^-1.

    Returns ``(theta, M, info)`` where ``theta = (alpha, log_beta)`` (intercept
    on absolute abscissae) and ``M = (L1' Gamma^-1 L1)^-1``. An ill-conditioned
    Gamma falls back to OLS with ``info["fallback"] = True``.
    """
    Y = np.asarray(Y, dtype=float)
    G = _as_matrix(gamma)
    info = {"fallback": False, "cond": float(np.linalg.cond(G))}
    if not np.isfinite(info["cond"]) or info["cond"] > cond_max:
        info["fallback"] = True
        info["warning"] = f"Gamma condition number {info['cond']:.3g} > {cond_max:g}; OLS used"
        slope, icpt, _ = ols_fit(Y, design)
        return np.array([slope, icpt]), sigma_matrix(design, G), info
    cf = _cho(G)
    L, L1 = design.L, design.L1
    GiL = linalg.cho_solve(cf, L)
    theta = np.linalg.solve(L.T @ GiL, GiL.T @ Y)
    GiL1 = linalg.cho_solve(cf, L1)
    M = np.linalg.inv(L1.T @ GiL1)
    return theta, 0.5 * (M + M.T), info


def goodness_test(Y, design: RegressionDesign, theta, gamma, n_j: int, a_n: float):
    """Weighted residual statistic ``(n_j/a_N) r' Gamma^-1 r`` and its chi2(ell-2) p-value."""
    r = np.asarray(Y, dtype=float) - design.L @ np.asarray(theta, dtype=float)
    G = _as_matrix(gamma)
    T = float(n_j / a_n * r @ linalg.cho_solve(_cho(G), r))
    T = max(T, 0.0)
    return T, float(stats.chi2.sf(T, design.ell - 2))


@dataclass
class SegmentEstimate:
    start: int
    end: int
    usable: bool
    reason: str = ""
    n_j: int = 0
    regime: str = "lrd"
    alpha_ols: float = float("nan")
    log_beta_ols: float = float("nan")
    cov_ols: Optional[np.ndarray] = None
    alpha_fgls: float = float("nan")
    log_beta_fgls: float = float("nan")
    cov_fgls: Optional[np.ndarray] = None
    ci_alpha: tuple = (float("nan"), float("nan"))
    T: float = float("nan")
    p_value: float = float("nan")
    gamma_alpha: float = float("nan")
    sigma: Optional[np.ndarray] = None
    M: Optional[np.ndarray] = None
    Y: Optional[np.ndarray] = None
    log_a: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def param_name(self) -> str:
        return "H" if self.regime == "fbm" else "D"

    def to_param(self, alpha):
        return (alpha - 1) / 2 if self.regime == "fbm" else alpha

    @property
    def param_ols(self) -> float:
        return self.to_param(self.alpha_ols)

    @property
    def param_fgls(self) -> float:
        return self.to_param(self.alpha_fgls)

    @property
    def ci_param(self) -> tuple:
        return tuple(self.to_param(a) for a in self.ci_alpha)

    @property
    def se_alpha_ols(self) -> float:
        return math.sqrt(self.cov_ols[0, 0]) if self.cov_ols is not None else float("nan")

    @property
    def se_alpha_fgls(self) -> float:
        return math.sqrt(self.cov_fgls[0, 0]) if self.cov_fgls is not None else float("nan")

    def to_dict(self) -> dict:
        f = lambda v: None if v is None or (isinstance(v, float) and not math.isfinite(v)) else float(v)
        d = {
            "start": self.start,
            "end": self.end,
            "usable": self.usable,
            "reason": self.reason,
            "n": self.n_j,
            "param_name": self.param_name,
        }
        if not self.usable:
            return d
        d.update({
            "ols": {"alpha": f(self.alpha_ols), "log_beta_eq2": f(self.log_beta_ols),
                    "intercept_L1": f(self.log_beta_ols + self.alpha_ols * self.log_a),
                    "param": f(self.param_ols), "se_alpha": f(self.se_alpha_ols)},
            "fgls": {"alpha": f(self.alpha_fgls), "log_beta_eq2": f(self.log_beta_fgls),
                     "intercept_L1": f(self.log_beta_fgls + self.alpha_fgls * self.log_a),
                     "param": f(self.param_fgls), "se_alpha": f(self.se_alpha_fgls),
                     "ci_alpha": [f(v) for v in self.ci_alpha], "ci_param": [f(v) for v in sorted(self.ci_param)]},
            "T": f(self.T),
            "p_value": f(self.p_value),
            "df": len(self.Y) - 2,
            "gamma_alpha": f(self.gamma_alpha),
            "warnings": list(self.warnings),
        })
        return d


def estimate_segments(cache: CoefficientCache, refined, design: RegressionDesign, regime: str,
                      gamma: Callable[[float], GammaMatrix]) -> list:
    """OLS and FGLS estimates, 95% interval and goodness-of-fit test per refined segment.

    *gamma* maps an exponent to a :class:`GammaMatrix` (typically a
    :class:`GammaTable`); it is evaluated at the OLS exponent of the segment.
    """
    a_n = cache.grid.a_n
    out = []
    for seg in refined:
        est = SegmentEstimate(seg.start, seg.end, seg.usable, seg.reason, seg.length, regime,
                              log_a=design.log_a)
        out.append(est)
        if not seg.usable:
            continue
        try:
            Y = log_variance_vector(cache, seg.start, seg.end)
            est.Y = Y
            alpha, log_beta, _ = ols_fit(Y, design)
            est.alpha_ols, est.log_beta_ols = alpha, log_beta
            scale = a_n / seg.length
            if hasattr(gamma, "clamp"):
                _, clamped = gamma.clamp(alpha)
                if clamped:
                    est.warnings.append(f"alpha={alpha:.4f} outside the Gamma grid; nearest node used")
            G = gamma(alpha)
            est.gamma_alpha = G.alpha
            est.sigma = sigma_matrix(design, G)
            est.cov_ols = scale * est.sigma
            theta, M, info = fgls_fit(Y, design, G)
            if info["fallback"]:
                est.warnings.append(info["warning"])
            est.M = M
            est.alpha_fgls, est.log_beta_fgls = float(theta[0]), float(theta[1])
            est.cov_fgls = scale * M
            half = Z975 * math.sqrt(est.cov_fgls[0, 0])
            est.ci_alpha = (est.alpha_fgls - half, est.alpha_fgls + half)
            est.T, est.p_value = goodness_test(Y, design, theta, G, seg.length, a_n)
        except WavebreakError as exc:
            est.usable, est.reason = False, f"{exc.code}: {exc}"
    return out
