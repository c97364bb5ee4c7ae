"""Exception types shared across the package."""


class AssocKDEError(Exception):
    """Base class for all errors raised by assockde."""


class InadmissibleBandwidthError(AssocKDEError, ValueError):
    """The off-diagonal bandwidth (or Sarmanov rho) would make the kernel negative.

    Attributes
    ----------
    value : float
        The offending h12 (or rho).
    interval : tuple of float
        The admissible closed interval at the failing target.
    target : tuple of float or None
        The target point at which admissibility failed, when known.
    """

    def __init__(self, message, value=None, interval=None, target=None):
        super().__init__(message)
        self.value = value
        self.interval = interval
        self.target = target


class UndefinedModeError(AssocKDEError, ValueError):
    """Mode/dispersion requested for a beta law that is not unimodal."""


class SupportError(AssocKDEError, ValueError):
    """A point lies outside the unit square, or on a corner where a shape vanishes."""


class EmptyCandidateSetError(AssocKDEError, RuntimeError):
    """No admissible bandwidth candidate was found during selection."""


class NumericalError(AssocKDEError, ArithmeticError):
    """A computation produced non-finite values or has no valid result."""


class ZeroMassError(NumericalError):
    """A density grid with zero (or non-finite) mass cannot be normalized."""
