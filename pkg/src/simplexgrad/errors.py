"""Exception hierarchy shared by all modules."""


class SimplexGradError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(SimplexGradError, ValueError):
    """Non-finite entries, wrong lengths, nonpositive diameters and the like."""


class RankDeficient(SimplexGradError, ValueError):
    """A matrix lacks full numerical rank where it is required."""


class NotPoised(RankDeficient):
    """The scheme matrix A of a sample set is numerically rank deficient.

    ``sigma_ratio`` holds sigma_min / sigma_max of A for diagnostics.
    """

    def __init__(self, message, sigma_ratio=None):
        super().__init__(message)
        self.sigma_ratio = sigma_ratio


class DegenerateRotation(SimplexGradError, ValueError):
    """A direction and its inexact reflection are antiparallel."""


class StabilityViolation(SimplexGradError, ValueError):
    """C * eps * kappa(A) >= 1, so the floating-point bounds do not apply."""


class MissingRegime(SimplexGradError, ValueError):
    """GACSG step-size selection needs an explicit asymptotic regime."""
