"""Exception hierarchy; ``category`` drives CLI exit codes."""


class WavebreakError(Exception):
    category = "numerical"
    code = "error"


class ConfigError(WavebreakError, ValueError):
    category = "config"
    code = "invalid-config"


class DataError(WavebreakError, ValueError):
    category = "data"
    code = "invalid-data"


class InvalidCoefficientError(DataError):
    code = "invalid-coefficient"


class TooFewBlocksError(DataError):
    code = "too-few-blocks"


class DegenerateSegmentError(DataError):
    code = "degenerate-segment"


class InfeasibleSearchError(ConfigError):
    code = "infeasible-search-space"


class NumericalError(WavebreakError, ArithmeticError):
    category = "numerical"
    code = "numerical-failure"


class UnusableSegmentsError(ConfigError):
    code = "all-segments-unusable"
