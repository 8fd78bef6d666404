"""Exception types shared across the package."""


class InvalidParameter(ValueError):
    pass


class InvalidState(ValueError):
    pass


class GenerationFailed(RuntimeError):
    pass


class ParseError(ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class EmptyCore(ValueError):
    pass


class ConvergenceFailure(RuntimeError):
    """Raised when gossip hits its round cap; ``values`` holds the partial result."""

    def __init__(self, message, values=None, rounds=0):
        super().__init__(message)
        self.values = values
        self.rounds = rounds


class InfeasibleLoad(ValueError):
    pass
