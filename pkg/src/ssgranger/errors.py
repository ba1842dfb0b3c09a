"""Exception hierarchy shared by the solvers and the structure algorithms."""


class SSGrangerError(Exception):
    """Base class for all errors raised by this package."""


class NotStable(SSGrangerError):
    """A transition matrix has spectral radius too close to (or above) one."""


class NoConvergence(SSGrangerError):
    """An iterative solver exhausted its iteration budget."""


class SingularInnovation(SSGrangerError):
    """The innovation covariance ``lam0 - C X C^T`` lost positive definiteness."""


class InsufficientLags(SSGrangerError):
    """Fewer covariance lags were supplied than the Hankel size requires."""


class UnstableRealization(SSGrangerError):
    """The realization recovered from covariances has an unstable ``A``."""


class NotMinimal(SSGrangerError):
    """A state-space model expected to be minimal is not."""


class AlignmentFailure(SSGrangerError):
    """Coordinator subsystems of different agents could not be made to agree."""


class StructureViolation(SSGrangerError):
    """A Granger non-causality condition needed for coordinated form fails.

    Attributes
    ----------
    pair : tuple
        ``(i, j)`` agent indices (0-based, ``j`` is ``None`` for the
        agent-to-coordinator condition).
    residuals : dict
        Residuals of the failing check.
    """

    def __init__(self, message, pair=None, residuals=None):
        super().__init__(message)
        self.pair = pair
        self.residuals = dict(residuals or {})
