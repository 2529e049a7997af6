"""Exception types shared across the package."""


class DqsError(Exception):
    """Base class for package errors."""


class TruncationError(DqsError):
    """Fock-space truncation leakage exceeded the configured tolerance."""

    def __init__(self, message: str, leakage: float | None = None):
        super().__init__(message)
        self.leakage = leakage


class ValidityError(DqsError):
    """A first-order/perturbative channel was requested outside its validity regime."""


class ConfigError(DqsError):
    """Invalid or malformed run configuration."""
