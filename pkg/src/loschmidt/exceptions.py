"""Exception hierarchy shared across the package."""


class LoschmidtError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(LoschmidtError):
    """Invalid experiment configuration (schema or value errors)."""


class NumericsError(LoschmidtError):
    """A numerical step failed at runtime (zero probabilities, blown-up
    mitigation factors, unresolvable interferometry steps, ...)."""
