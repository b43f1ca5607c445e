"""Exception hierarchy shared by all modules.

``ValidationError`` subclasses signal rejected input (CLI exit code 2,
HTTP 400); anything else is a runtime failure (exit code 1, HTTP 500).
"""


class GaussianPeriodsError(Exception):
    pass


class ValidationError(GaussianPeriodsError):
    """Invalid user input; carries a machine-readable ``code``."""

    code = "invalid_input"


class NotCoprime(ValidationError):
    code = "not_coprime"


class NotDivisor(ValidationError):
    code = "not_divisor"


class TooLarge(ValidationError):
    code = "too_large"


class ArityMismatch(ValidationError):
    code = "arity_mismatch"


class PaletteTooSmall(ValidationError):
    code = "palette_too_small"
