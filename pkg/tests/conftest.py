import numpy as np
import pytest

from wavebreak.inference import GammaTable
from wavebreak.wvar import ScaleGrid


@pytest.fixture(autouse=True)
def _isolated_gamma_dir(tmp_path, monkeypatch):
    # keep persisted Gamma tables out of the user's cache
    monkeypatch.setenv("WAVEBREAK_GAMMA_DIR", str(tmp_path / "gamma"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fbm_grid_5000():
    return ScaleGrid.for_length(5000, "fbm", 0.05)


@pytest.fixture(scope="session")
def fbm_table_5000(fbm_grid_5000):
    return GammaTable("fbm", fbm_grid_5000, method="analytic")
