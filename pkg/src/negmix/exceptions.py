"""Exception types raised by the estimation pipeline."""


class NegMixError(Exception):
    """Base class for numerical failures (CLI exit code 1)."""


class RankDeficiencyError(NegMixError):
    pass


class SingularWhiteningError(NegMixError):
    pass


class DegenerateNormalizerError(NegMixError):
    """The bilinear normalizer T(theta)^T T(theta) vanished; restart with a new start vector."""


class ConvergenceError(NegMixError):
    """Raised by :func:`negmix.power.decompose`; ``partial`` holds the pairs found so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = list(partial or [])


class GapAssumptionError(NegMixError):
    pass


class BoundHypothesisError(NegMixError):
    pass


class DivergenceError(NegMixError):
    pass


class NormalizationError(NegMixError):
    pass


class LowAcceptanceError(NegMixError):
    pass


class FitError(NegMixError):
    """All candidate average variances failed; ``failures`` maps candidate index to message."""

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = dict(failures or {})
