"""Exception hierarchy for the corrmmse package."""


class CorrMmseError(Exception):
    """Base class for all corrmmse errors."""


class NotPositiveDefinite(CorrMmseError):
    """Cholesky factorization hit a non-positive pivot."""


class SingularChannel(CorrMmseError):
    """Channel Gram matrix is numerically singular; log-det metrics undefined."""


class DomainError(CorrMmseError):
    """Argument outside a special function's domain."""


class RankDeficient(CorrMmseError):
    """Gain matrix fails the smallest-singular-value floor."""


class NotSquare(CorrMmseError):
    """Beam pattern file does not describe a square matrix."""


class ParseError(CorrMmseError):
    """Malformed beam pattern file."""


class DegenerateInstance(CorrMmseError):
    """All Gram eigenvalues coincide; the crossing point is undefined."""


class ExcessiveSkippedTrials(CorrMmseError):
    """More than the allowed fraction of Monte Carlo trials was skipped."""


class ConfigError(CorrMmseError):
    """Bad experiment configuration (unknown key, malformed value)."""
