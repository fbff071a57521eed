"""Detection of abrupt changes in the memory or self-similarity exponent of a Gaussian series."""
from .errors import (
    ConfigError,
    DataError,
    DegenerateSegmentError,
    InfeasibleSearchError,
    NumericalError,
    TooFewBlocksError,
    UnusableSegmentsError,
    WavebreakError,
)
from .inference import (
    GammaMatrix,
    GammaTable,
    SegmentEstimate,
    estimate_segments,
    fgls_fit,
    gamma_fbm_analytic,
    gamma_mc,
    goodness_test,
    refine_segments,
    sigma_matrix,
)
from .pipeline import Analysis, AnalysisConfig, analyze
from .segmentation import (
    ChangePointResult,
    RegressionDesign,
    SearchSpace,
    detect_changes,
    exhaustive_search,
    ols_fit,
    segment_cost,
)
from .synth import (
    FbmSpec,
    PiecewiseSpec,
    StationarySpec,
    TimeSeries,
    gen_fbm,
    gen_piecewise,
    gen_stationary,
)
from .wavelets import POLY4, WaveletSpec, get_wavelet, psi_poly4
from .wvar import CoefficientCache, ScaleGrid, segment_variance, wavelet_coeff

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "DegenerateSegmentError",
    "InfeasibleSearchError",
    "NumericalError",
    "TooFewBlocksError",
    "UnusableSegmentsError",
    "WavebreakError",
    "GammaMatrix",
    "GammaTable",
    "SegmentEstimate",
    "estimate_segments",
    "fgls_fit",
    "gamma_fbm_analytic",
    "gamma_mc",
    "goodness_test",
    "refine_segments",
    "sigma_matrix",
    "Analysis",
    "AnalysisConfig",
    "analyze",
    "ChangePointResult",
    "RegressionDesign",
    "SearchSpace",
    "detect_changes",
    "exhaustive_search",
    "ols_fit",
    "segment_cost",
    "FbmSpec",
    "PiecewiseSpec",
    "StationarySpec",
    "TimeSeries",
    "gen_fbm",
    "gen_piecewise",
    "gen_stationary",
    "POLY4",
    "WaveletSpec",
    "get_wavelet",
    "psi_poly4",
    "CoefficientCache",
    "ScaleGrid",
    "segment_variance",
    "wavelet_coeff",
]
