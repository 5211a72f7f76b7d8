"""Exception and warning types raised across the package."""


class CertificationError(ValueError):
    """Base class for every failure to build or evaluate a certificate."""


class InvalidHyperparameterError(CertificationError):
    pass


class DomainError(CertificationError):
    """A state lies outside the data support of the model family."""


class FamilyRestrictionError(CertificationError):
    """The moment constants give ``c * h >= 1``, so the quadratic drift fails."""


class DegenerateCenterError(CertificationError):
    """``a * f == c * h``: the drift center is undefined."""


class InvalidRateError(CertificationError):
    pass


class InvalidSmallSetError(CertificationError):
    pass


class GridConstructionError(CertificationError):
    pass


class SmallSetTooSmallError(CertificationError):
    """The small-set radius does not exceed ``2L / (1 - gamma)``."""


class InapplicableBoundError(CertificationError):
    pass


class InapplicableOracleError(CertificationError):
    pass


class NoSolutionError(CertificationError):
    pass


class InfeasibleSearchError(CertificationError):
    pass


class NotGeometricallyCertifiedError(CertificationError):
    pass


class InsufficientPathError(CertificationError):
    pass


class UselessBoundWarning(UserWarning):
    """A Rosenthal curve has a base >= 1 and never decays."""


class VarianceWarning(UserWarning):
    """Too few replicates for a stable empirical estimate."""
