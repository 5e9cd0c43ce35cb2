class NetmaintError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NetmaintError, ValueError):
    """Input data violates a schema or invariant."""


class StructuralError(ValidationError):
    """Graph shape is unusable (no source, no sink, bad arc 0, ...)."""


class ParseError(ValidationError):
    """A document could not be turned into a model object."""


class ContractViolation(NetmaintError, RuntimeError):
    """An operation was called outside its precondition or broke a postcondition."""


class InstanceTooLarge(NetmaintError):
    """Exhaustive enumeration refused because the search space exceeds the cap."""


class GenerationError(NetmaintError):
    """Random generation failed after the allowed number of retries."""
