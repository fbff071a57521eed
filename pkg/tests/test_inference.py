import json
import math

import numpy as np
import pytest
from scipy import stats

from wavebreak.errors import ConfigError, UnusableSegmentsError
from wavebreak.inference import (
    GammaMatrix,
    GammaTable,
    estimate_segments,
    exponent_spread,
    fgls_fit,
    gamma_fbm_analytic,
    gamma_mc,
    goodness_test,
    rate_v,
    refine_segments,
    sigma_matrix,
)
from wavebreak.pipeline import AnalysisConfig, analyze
from wavebreak.segmentation import RegressionDesign, ols_fit
from wavebreak.synth import gen_fbm
from wavebreak.wvar import CoefficientCache, ScaleGrid


def random_spd(rng, n):
    A = rng.normal(size=(n, n))
    return A @ A.T + n * np.eye(n)


def gls_oracle(Y, L, G):
    Gi = np.linalg.inv(G)
    return np.linalg.inv(L.T @ Gi @ L) @ (L.T @ Gi @ Y)


# refinement ---------------------------------------------------------------

def test_margin_one_when_rate_is_n():
    ref = refine_segments(((300, 700), 1000), "lrd", 0.05, v_n=1000)
    assert ref.margin == 1
    assert [(s.start, s.end) for s in ref] == [(1, 299), (301, 699), (701, 999)]


def test_lrd_margin_value():
    assert math.ceil(20000 / rate_v(20000, "lrd", 0.05)) == math.ceil(20000**0.75) == 1682
    ref = refine_segments(((), 20000), "lrd", 0.05)
    assert ref.margin == 1682
    assert [(s.start, s.end) for s in ref] == [(1682, 20000 - 1682)]


def test_fbm_rate_and_spread():
    assert rate_v(10000, "fbm", 0.05, 0.2) == pytest.approx(10000 ** (2 / 3 * 0.6 - 0.05 * 2.8))
    assert exponent_spread([2.2, 2.6, 2.0], "fbm") == (pytest.approx(0.3), False)
    assert exponent_spread([1.1, 2.9], "fbm") == (0.49, True)
    assert exponent_spread([0.2, 0.8], "lrd") == (0.0, False)


def test_trim_cap_and_unusable():
    ref = refine_segments(((100, 5000), 10000), "fbm", 0.05, 0.3, max_trim=0.25, grid=ScaleGrid(34, (1, 2, 3, 4, 5)))
    first = ref.segments[0]
    assert not first.usable and "two blocks" in first.reason
    assert all(s.end - s.start >= 0.5 * (s.detected[1] - s.detected[0]) for s in ref)
    assert any("capped" in w for w in ref.warnings)
    with pytest.raises(UnusableSegmentsError):
        refine_segments(((2, 4), 6), "lrd", 0.05, max_trim=None)


def test_rate_below_one():
    with pytest.raises(ConfigError):
        refine_segments(((5000,), 10000), "fbm", 0.05, v_n=0.5, max_trim=None)
    ref = refine_segments(((5000,), 10000), "fbm", 0.05, v_n=0.5)
    assert [(s.start, s.end) for s in ref] == [(1250, 3750), (6250, 8750)]
    assert "< 1" in ref.warnings[0]


# Gamma --------------------------------------------------------------------

def test_gamma_mc_white_noise_diagonal():
    grid = ScaleGrid(16, (1, 2, 3, 4, 5))
    G = gamma_mc(0.0, "lrd", grid, R=1000, seed=1)
    r = np.array(grid.scales) / grid.a_n
    assert np.allclose(np.diag(G.matrix), 2 * r, rtol=0.10)
    assert np.array_equal(G.matrix, G.matrix.T)
    assert G.check().min() > 0
    assert G.provenance["method"] == "mc"


def test_gamma_mc_errors():
    grid = ScaleGrid(16, (1, 2, 3))
    with pytest.raises(ConfigError):
        gamma_mc(0.5, "lrd", grid, R=100)
    with pytest.raises(ConfigError):
        gamma_mc(1.2, "lrd", grid)
    with pytest.raises(ConfigError):
        gamma_mc(3.0, "fbm", grid)
    with pytest.raises(ConfigError):
        gamma_mc(2.0, "fbm", grid, n_ref=16 * 3 * 50)


def test_analytic_white_noise_limit():
    grid = ScaleGrid(16, (1, 2, 3, 4, 5))
    G = gamma_fbm_analytic(0.5, grid)
    r = np.array(grid.scales) / grid.a_n
    assert np.allclose(np.diag(G.matrix), 2 * r, rtol=1e-6)
    assert G.provenance["tail_fraction"] < 1e-12


def test_analytic_lag_zero_self_term():
    # one scale, lags cut at the first: only the self-correlation survives
    grid = ScaleGrid(20, (1, 2, 3))
    G = gamma_fbm_analytic(0.5, grid)
    assert G.matrix[0, 0] * grid.a_n / (2 * grid.scales[0]) == pytest.approx(1.0, abs=1e-8)


def test_analytic_vs_mc_small_grid():
    grid = ScaleGrid(16, (1, 2, 3))
    A = gamma_fbm_analytic(0.7, grid).matrix
    M = gamma_mc(2.4, "fbm", grid, R=1000, seed=4).matrix
    assert np.linalg.norm(M - A) / np.linalg.norm(A) < 0.15


def test_analytic_errors():
    grid = ScaleGrid(16, (1, 2, 3))
    with pytest.raises(ConfigError):
        gamma_fbm_analytic(1.0, grid)
    with pytest.raises(ConfigError):
        gamma_fbm_analytic(0.5, grid, K=10)


def test_gamma_table_interpolation_and_persistence(tmp_path):
    grid = ScaleGrid(16, (1, 2, 3))
    table = GammaTable("fbm", grid)
    assert table.method == "analytic"
    G0, G1 = table(2.40), table(2.45)
    mid = table(2.425)
    assert np.allclose(mid.matrix, 0.5 * (G0.matrix + G1.matrix), atol=1e-14)
    assert mid.provenance["interpolated"]
    assert len(table._cache) == 2
    lo, clamped = table.clamp(0.5)
    assert clamped and lo == pytest.approx(1.05)
    path = table.save(tmp_path / "t.json")
    fresh = GammaTable("fbm", grid).load(path)
    assert np.array_equal(fresh(2.425).matrix, mid.matrix)
    assert json.loads(path.read_text())["version"] == 1
    other = GammaTable("fbm", ScaleGrid(16, (1, 2, 4)))
    with pytest.raises(ConfigError):
        other.load(path)
    assert other.load(path, strict=False)._cache == {}


def test_gamma_table_continuity():
    grid = ScaleGrid(16, (1, 2, 3))
    table = GammaTable("fbm", grid)
    a = np.linspace(2.0, 2.2, 41)
    mats = np.array([table(v).matrix for v in a])
    steps = np.abs(np.diff(mats, axis=0)).max()
    node_jump = np.abs(table.node(table.nodes.searchsorted(2.1)).matrix - table.node(table.nodes.searchsorted(2.05)).matrix).max()
    # interpolation moves by at most one node difference per node spacing
    assert steps <= node_jump * (a[1] - a[0]) / 0.05 * 1.5 + 1e-12


def test_gamma_table_lrd_defaults_to_mc(tmp_path, monkeypatch):
    grid = ScaleGrid(12, (1, 2, 3))
    t = GammaTable("lrd", grid, R=200)
    assert t.method == "mc"
    assert t.default_path().parent == tmp_path / "gamma"
    with pytest.raises(ConfigError):
        GammaTable("lrd", grid, method="analytic")
    G = t(0.3)
    assert G.check().min() > 0
    assert t.node(6).provenance["seed"] == [0, 6]


# estimators ---------------------------------------------------------------

DESIGN = RegressionDesign.from_scales([34, 68, 102, 136, 170], a_n=34)


def test_fgls_identity_is_ols(rng):
    Y = rng.normal(size=5)
    theta, M, info = fgls_fit(Y, DESIGN, np.eye(5))
    a, b, _ = ols_fit(Y, DESIGN)
    assert np.allclose(theta, [a, b], atol=1e-12)
    assert np.allclose(M, np.linalg.inv(DESIGN.L1.T @ DESIGN.L1), atol=1e-12)
    assert not info["fallback"]


def test_fgls_exact_line(rng):
    Y = 2.3 * DESIGN.log_scales - 0.4
    G = random_spd(rng, 5)
    theta, _, _ = fgls_fit(Y, DESIGN, G)
    assert np.allclose(theta, [2.3, -0.4], atol=1e-10)
    T, p = goodness_test(Y, DESIGN, theta, G, 5000, 34)
    assert T == pytest.approx(0.0, abs=1e-16) and p == 1.0


def test_fgls_matches_normal_equations_and_efficiency(rng):
    for _ in range(30):
        Y = rng.normal(size=5)
        G = random_spd(rng, 5)
        theta, M, _ = fgls_fit(Y, DESIGN, G)
        assert np.allclose(theta, gls_oracle(Y, DESIGN.L, G), atol=1e-8, rtol=0)
        assert np.allclose(M, np.linalg.inv(DESIGN.L1.T @ np.linalg.inv(G) @ DESIGN.L1), atol=1e-8)
        Sigma = sigma_matrix(DESIGN, G)
        assert np.linalg.eigvalsh(Sigma - M).min() >= -1e-10


def test_fgls_ill_conditioned_fallback():
    G = np.diag([1.0, 1.0, 1.0, 1.0, 1e-10])
    Y = np.arange(5.0)
    theta, _, info = fgls_fit(Y, DESIGN, G)
    assert info["fallback"] and "OLS" in info["warning"]
    assert np.allclose(theta, ols_fit(Y, DESIGN)[:2])


def test_goodness_statistic_formula(rng):
    Y = rng.normal(size=5)
    G = random_spd(rng, 5)
    theta = gls_oracle(Y, DESIGN.L, G)
    T, p = goodness_test(Y, DESIGN, theta, G, 4000, 34)
    r = Y - DESIGN.L @ theta
    assert T == pytest.approx(4000 / 34 * r @ np.linalg.inv(G) @ r, rel=1e-10)
    assert p == pytest.approx(stats.chi2.sf(T, 3), rel=1e-12)
    assert T >= 0 and 0 <= p <= 1


def test_gamma_matrix_symmetrized():
    G = GammaMatrix(np.array([[2.0, 1.0], [0.0, 2.0]]), 2.0, {}, (1, 2), 1)
    assert np.array_equal(G.matrix, G.matrix.T)


def test_estimate_segments_coverage_fbm(fbm_table_5000):
    # single FBM, m = 0: the 95% interval for H covers the truth often enough
    n = 10000
    grid = ScaleGrid.for_length(n, "fbm", 0.05)
    table = GammaTable("fbm", grid)
    cfg = AnalysisConfig(m=0, regime="fbm")
    paths = gen_fbm(0.7, 1.0, n + 1, seed=13, size=100)
    hits = 0
    for x in paths:
        est = analyze(x, cfg, table, grid).estimates[0]
        lo, hi = est.ci_param
        hits += lo <= 0.7 <= hi
        assert np.linalg.eigvalsh(est.sigma - est.M).min() >= -1e-10
        assert est.T >= 0 and 0 <= est.p_value <= 1
    assert hits / 100 >= 0.90


def test_estimate_segments_records_failures():
    grid = ScaleGrid(20, (1, 2, 3))
    x = np.cumsum(np.random.default_rng(0).standard_normal(3001))
    cache = CoefficientCache.build(x, grid)
    ref = refine_segments(((1500,), 3000), "fbm", 0.05, v_n=3000, grid=grid)
    bad = lambda alpha: GammaMatrix(-np.eye(3), alpha, {}, grid.scales, grid.a_n)
    out = estimate_segments(cache, ref, RegressionDesign.from_grid(grid), "fbm", bad)
    assert all(not e.usable and e.reason for e in out)
    d = out[0].to_dict()
    assert d["usable"] is False and "ols" not in d
