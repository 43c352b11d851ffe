"""Exception types shared across the package."""


class GCImpulseError(Exception):
    """Base class for all library errors."""


class DomainError(GCImpulseError, ValueError):
    """A query lies outside the domain an object is defined on."""


class PreconditionError(GCImpulseError, ValueError):
    """An operation was called on inputs that violate its contract."""


class InvariantViolation(GCImpulseError, ValueError):
    """Constructed data fails one of its structural invariants."""


class ConfigError(GCImpulseError, ValueError):
    """A run configuration is inconsistent or incomplete."""


class DiagnosticError(GCImpulseError, RuntimeError):
    """A computation left its declared validity region (e.g. state blow-up)."""
