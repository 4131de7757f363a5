"""Exception types shared across the package."""


class SunfactError(Exception):
    """Base class for all package errors."""


class ConfigError(SunfactError, ValueError):
    """Invalid model or run configuration."""


class CapExceededError(SunfactError):
    """Requested Hilbert space exceeds the configured dimension cap."""


class InvariantError(SunfactError, AssertionError):
    """An internal numerical invariant was breached."""


class EmptySectorError(SunfactError, ValueError):
    """A symmetry projection annihilated the state."""


class FactorizationError(SunfactError, ValueError):
    """The factorization conditions cannot be solved for the given inputs."""
