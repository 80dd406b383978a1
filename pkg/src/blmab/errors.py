"""Exception hierarchy. Each class maps to one CLI exit status."""


class BLMABError(Exception):
    exit_code = 1


class DomainError(BLMABError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 3


class ConvergenceError(BLMABError, ArithmeticError):
    exit_code = 4

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StateError(BLMABError, RuntimeError):
    exit_code = 3


class ConfigError(BLMABError, ValueError):
    """Invalid simulation or CLI configuration."""

    exit_code = 2

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DataError(BLMABError, ValueError):
    exit_code = 3


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FitError(DataError):
    pass


class EstimationError(DataError):
    pass
