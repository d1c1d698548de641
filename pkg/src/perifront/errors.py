"""Exception taxonomy shared across the package."""


class PerifrontError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(PerifrontError):
    """Malformed or incomplete configuration input."""


class SystemValidationError(PerifrontError):
    """A coefficient system violates ellipticity or competition positivity."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MetzlerError(PerifrontError):
    """Centered advection stencil produced a negative off-diagonal entry."""


class SingularOperatorError(PerifrontError):
    """A shifted resolvent solve hit a (numerically) singular matrix."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class NonConvergenceError(PerifrontError):
    """An iteration ran out of budget; carries the last diagnostics."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class PreconditionError(PerifrontError):
    """A documented operation precondition does not hold for the inputs."""


class GapError(PreconditionError):
    """An eigenvalue-ordering hypothesis failed; names the broken inequality."""


class DomainTooSmallError(PerifrontError):
    """The moving interface came within the guard distance of a boundary."""
