"""Exception and warning types shared across the package."""


class RefractionError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RefractionError, ValueError):
    """A numerical-domain failure (maps to CLI exit code 3)."""


class EvanescentRegime(DomainError):
    """The requested quantity only exists for propagating waves (n^2 < 0 or k'^2 <= 0)."""


class TotalInternalReflection(DomainError):
    pass


class DegenerateDispersion(DomainError):
    """Group-velocity denominator vanishes; the worldline would be vertical."""


class NonIncidentWave(DomainError):
    """Wave number k <= 0 is not a right-moving incident wave."""


class EmptyRegion(DomainError):
    pass


class IllConditionedFit(DomainError):
    pass


class DegenerateField(DomainError):
    """Heatmap reference density is zero."""


class ConfigError(RefractionError, ValueError):
    """Invalid run configuration (maps to CLI exit code 2)."""


class SchemaError(ConfigError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class UnknownPreset(ConfigError):
    pass


class NormLeakageWarning(UserWarning):
    """The grid window clips part of the initial packet."""
