class BuresError(Exception):
    """Base class for every error raised by bureskit."""


class ValidationError(BuresError, ValueError):
    """Malformed input: wrong shape, non-Hermitian, not positive, bad files."""

    def __init__(self, message, line=None, field=None):
        if line is not None:
            message = f"line {line}: {message}"
        if field is not None:
            message = f"field '{field}': {message}"
        super().__init__(message)
        self.line = line
        self.field = field


class ConditioningError(BuresError, ArithmeticError):
    """A solve or determinant was numerically singular."""

    def __init__(self, message, condition=None):
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class SingularStateError(ConditioningError):
    pass


class GenericityError(ConditioningError):
    def __init__(self, message="state is not generic", condition=None):
        super().__init__(message, condition)
