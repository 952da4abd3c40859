"""Exception types shared across the toolkit."""


class McmcCertifyError(Exception):
    """Base class for all toolkit errors."""


class BracketError(McmcCertifyError):
    """A root bracket or scan interval does not contain what it should."""


class ConvergenceError(McmcCertifyError):
    """An iterative routine exhausted its budget before converging."""


class IntegrationError(ConvergenceError):
    """Adaptive quadrature ran out of subdivisions.

    Carries the partial estimate accumulated so far in ``estimate``.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class CertificateError(McmcCertifyError):
    """A drift/minorization certificate is internally inconsistent."""


class ConfigError(McmcCertifyError):
    """A run configuration failed validation."""
