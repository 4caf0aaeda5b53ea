class InputError(ValueError):
    """Raised when arguments violate an operation's preconditions."""


class NumericError(ArithmeticError):
    """Raised when a factorization breaks down."""


class ParseError(ValueError):
    """Raised on malformed dataset files; carries the 1-based line number."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
