"""Exception types shared across the package."""


class FixedRankError(Exception):
    """Base class for all errors raised by this package."""


class RankDropError(FixedRankError):
    """A factor or iterate lost numerical rank (relative tolerance 1e-12)."""


class SingularCoefficientError(FixedRankError):
    """A linear matrix equation has a numerically singular coefficient."""


class SymmetryViolationError(FixedRankError):
    """An input that must be symmetric is not, beyond tolerance."""


class UnboundedPolynomialError(FixedRankError):
    """A polynomial passed to the line minimizer is unbounded below."""


class RankDeficientDataError(FixedRankError):
    """Observed data does not support the requested rank."""


class UndefinedDirectionError(FixedRankError):
    """A zero direction was passed where a search direction is required."""


class LineSearchError(FixedRankError):
    """Backtracking line search failed to find sufficient decrease."""


class ConfigError(FixedRankError):
    """An experiment or solver configuration is invalid."""
