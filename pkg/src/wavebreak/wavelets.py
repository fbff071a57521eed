"""Compactly supported mother wavelets on [0, 1]."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ConfigError

__all__ = ["WaveletSpec", "psi_poly4", "POLY4", "check_moments", "get_wavelet", "register_wavelet"]


def psi_poly4(t):
    """Degree-4 polynomial wavelet ``t(1-t)((t-1/2)^2 - 1/20)`` on [0, 1].

    Vanishes at both ends and has two vanishing moments (orders 0 and 1);
    zero outside [0, 1]. Accepts scalars or arrays.
    """
    t = np.asarray(t, dtype=float)
    out = np.where((t >= 0) & (t <= 1), t * (1 - t) * ((t - 0.5) ** 2 - 0.05), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class WaveletSpec:
    """A [0, 1]-supported mother wavelet and how it is sampled.

    With ``corrected=True`` (default) the sampled values on the open interval
    (0, 1) have their discrete moments of orders 0..vanishing_moments
    projected out, so the filter annihilates discrete polynomials exactly.
    Riemann sums of psi only vanish up to O(1/a), which lets the level of a
    nonstationary path leak into every coefficient. ``corrected=False``
    samples psi as is.
    """

    name: str
    evaluate: Callable
    vanishing_moments: int
    regimes: frozenset = frozenset({"lrd", "fbm"})
    corrected: bool = True

    def __call__(self, t):
        return self.evaluate(t)

    def sampled(self, u) -> np.ndarray:
        """psi evaluated at the sampling points *u* (in units of the scale)."""
        u = np.asarray(u, dtype=float)
        vals = np.asarray(self.evaluate(u), dtype=float)
        if not self.corrected:
            return vals
        inside = (u > 0) & (u < 1)
        q = self.vanishing_moments + 1
        if inside.sum() <= q:
            return vals
        basis = np.vander(u[inside] - 0.5, q, increasing=True)
        coef, *_ = np.linalg.lstsq(basis, vals[inside], rcond=None)
        vals = vals.copy()
        vals[inside] -= basis @ coef
        return vals

    def filter(self, scale: int) -> np.ndarray:
        """Discrete filter ``psi(t/scale)/sqrt(scale)`` for t = 0..scale."""
        t = np.arange(scale + 1) / scale
        return self.sampled(t) / np.sqrt(scale)

    def literal(self) -> "WaveletSpec":
        return replace(self, name=self.name + "-literal", corrected=False)


POLY4 = WaveletSpec("poly4", psi_poly4, vanishing_moments=1)

_REGISTRY = {"poly4": POLY4, "poly4-literal": POLY4.literal()}


def register_wavelet(w: WaveletSpec) -> None:
    _REGISTRY[w.name] = w


def get_wavelet(name) -> WaveletSpec:
    if isinstance(name, WaveletSpec):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown wavelet {name!r}; available: {sorted(_REGISTRY)}") from None


def check_moments(w, p_max: int, tol: float = 1e-10):
    """Moments ``int_0^1 t^p psi(t) dt`` for p = 0..p_max by adaptive quadrature.

    Returns ``(moments, violations)`` where *violations* lists the orders up
    to ``w.vanishing_moments`` whose moment exceeds *tol* in absolute value.
    Nothing is raised; callers decide what a violation means.
    """
    f = w.evaluate if isinstance(w, WaveletSpec) else w
    moments = []
    for p in range(p_max + 1):
        val, _ = integrate.quad(lambda t: t**p * f(t), 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
        moments.append(val)
    declared = w.vanishing_moments if isinstance(w, WaveletSpec) else p_max
    violations = [p for p in range(min(declared, p_max) + 1) if abs(moments[p]) > tol]
    return np.array(moments), violations
