from typing import Optional


class SpamError(Exception):
    """Base class for every error raised by the library."""


class InputError(SpamError, ValueError):
    """Invalid input: shapes, domains, flags, degenerate responses."""


class ParseError(InputError):
    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class NumericError(SpamError, ArithmeticError):
    """A numeric step produced non-finite values or failed to factor."""


class PathFitError(SpamError):
    def __init__(self, lambda_: float, cause: Exception):
        self.lambda_ = lambda_
        self.cause = cause
        super().__init__(f"fit failed at lambda={lambda_:.6g}: {cause}")
