"""Exception hierarchy shared by all starcert modules."""


class StarcertError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(StarcertError, ValueError):
    """Operand dimensions are inconsistent."""


class CapacityError(StarcertError, ValueError):
    """Requested object exceeds the configured size limit."""


class ContractViolation(StarcertError, ValueError):
    """An input breaks a documented precondition (e.g. non-Hermitian matrix)."""


class ConditioningError(StarcertError, ValueError):
    """Conditioning on an (almost) zero-probability outcome."""


class ValidationError(StarcertError, ValueError):
    """A scenario / measurement / state file failed validation.

    The message names the offending path inside the document.
    """
