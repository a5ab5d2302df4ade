"""Exception types shared across the package."""


class KottlerError(Exception):
    """Base class for all errors raised by kottler."""


class DomainError(KottlerError, ValueError):
    """An argument lies outside the supported range of an operation."""


class EndpointLimitError(DomainError):
    """A ratio was requested at an endpoint where it degenerates to 0/0."""


class ConstraintViolation(KottlerError, RuntimeError):
    """The constraint of the reduced static system drifted past tolerance."""


class IntegrationError(KottlerError, RuntimeError):
    """The radial integrator failed (step failure, collapse, missing horizon)."""
