import numpy as np
import pytest
from scipy import integrate

from wavebreak.errors import ConfigError
from wavebreak.wavelets import POLY4, WaveletSpec, check_moments, get_wavelet, psi_poly4, register_wavelet


def test_psi_values():
    assert psi_poly4(0.0) == 0.0
    assert psi_poly4(1.0) == 0.0
    assert psi_poly4(0.5) == pytest.approx(-0.0125, abs=1e-15)
    assert psi_poly4(-0.1) == 0.0 and psi_poly4(1.5) == 0.0
    t = np.linspace(-1, 2, 31)
    assert psi_poly4(t).shape == t.shape


def test_two_vanishing_moments_by_quadrature():
    m0, _ = integrate.quad(psi_poly4, 0, 1, epsabs=1e-15)
    m1, _ = integrate.quad(lambda t: t * psi_poly4(t), 0, 1, epsabs=1e-15)
    assert abs(m0) < 1e-12 and abs(m1) < 1e-12


def test_check_moments():
    mom, bad = check_moments(POLY4, 1, 1e-10)
    assert np.all(np.abs(mom) < 1e-10) and bad == []
    mom2, _ = check_moments(POLY4, 2, 1e-10)
    assert abs(mom2[2]) > 1e-4
    box = WaveletSpec("box", lambda t: np.where((t >= 0) & (t <= 1), 1.0, 0.0), vanishing_moments=0)
    mom, bad = check_moments(box, 0, 1e-10)
    assert mom[0] == pytest.approx(1.0)
    assert bad == [0]


@pytest.mark.parametrize("name", ["poly4", "poly4-literal"])
def test_registered_wavelets_pass_moment_check(name):
    w = get_wavelet(name)
    _, bad = check_moments(w, w.vanishing_moments, 1e-9)
    assert bad == []
    assert w(0.0) == 0.0 and w(1.0) == 0.0


def test_riemann_moments_converge_first_order():
    exact = [integrate.quad(lambda t, p=p: t**p * psi_poly4(t), 0, 1)[0] for p in range(3)]
    errs = []
    for a in (32, 64, 128):
        t = np.arange(a + 1) / a
        errs.append([abs(np.sum(t**p * psi_poly4(t)) / a - exact[p]) for p in range(3)])
    errs = np.array(errs)
    assert np.all(errs[1:] <= errs[:-1] * 0.55 + 1e-15)
    assert np.all(errs * np.array([[32], [64], [128]]) < 0.05)


def test_corrected_sampling_kills_discrete_moments():
    for a in (5, 12, 34, 170):
        t = np.arange(a + 1) / a
        h = POLY4.sampled(t)
        assert abs(h.sum()) < 1e-13
        assert abs((h * np.arange(a + 1)).sum()) < 1e-10 * a
        assert h[0] == 0.0 and h[-1] == 0.0
        # the correction is small compared with psi itself
        assert np.max(np.abs(h - psi_poly4(t))) < 0.2 * np.max(np.abs(psi_poly4(t)))


def test_literal_sampling_is_psi():
    t = np.arange(13) / 12
    assert np.array_equal(POLY4.literal().sampled(t), psi_poly4(t))
    assert np.allclose(POLY4.filter(12), POLY4.sampled(t) / np.sqrt(12))


def test_registry():
    w = WaveletSpec("custom-test", psi_poly4, 1)
    register_wavelet(w)
    assert get_wavelet("custom-test") is w
    assert get_wavelet(w) is w
    with pytest.raises(ConfigError):
        get_wavelet("haar-nope")
