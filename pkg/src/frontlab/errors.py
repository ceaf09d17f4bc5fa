"""Exception types raised across the package."""


class FrontlabError(Exception):
    """Base class for all frontlab errors."""


class InvalidParameterError(FrontlabError, ValueError):
    """A constructor or operation received an out-of-range parameter."""


class ModelConstructionError(FrontlabError):
    """A reaction model could not be built (e.g. end-state root solve failed)."""


class NoConvergenceError(FrontlabError):
    """Newton iteration failed to reduce the residual.

    Carries the last residual norm in ``last_residual``.
    """

    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class SingularSystemError(FrontlabError):
    """A linear system inside a solver was numerically singular."""


class DegenerateKernelError(FrontlabError):
    """The near-zero eigenspace was not one-dimensional."""


class NormalizationError(FrontlabError):
    """An eigenfunction pairing vanished, so the required scaling is impossible."""


class ContinuationAmbiguityError(FrontlabError):
    """Two eigenvalue branches could not be told apart during continuation."""


class BlowUpError(FrontlabError):
    """Time integration produced NaN or overflow.  Carries ``time``."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class TransformDomainError(FrontlabError):
    """An inverse Cole-Hopf argument left the admissible interval.

    ``index`` points at the first offending sample.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class OutOfMarginError(FrontlabError):
    """A requested z-shift exceeded the sponge margin of the grid."""


class CausalityError(FrontlabError):
    """A forcing evaluation requested an interval integral not yet accumulated."""


class ConstructionInfeasibleError(FrontlabError):
    """The oscillating datum cannot realize enough sign alternations."""


class FitDomainError(FrontlabError, ValueError):
    """Decay fitting received nonpositive values or too few samples."""


class DimensionMismatchError(FrontlabError, ValueError):
    """Field and grid shapes disagree."""


class ConfigError(FrontlabError, ValueError):
    """A JSON configuration failed validation."""


class HorizonExceededWarning(UserWarning):
    """Requested times extend beyond the finite-size validity horizon."""
