"""Exception types shared across the package."""


class SigkernError(Exception):
    """Base class for errors raised by this package."""


class ParseError(SigkernError, ValueError):
    """Malformed input file. Carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(SigkernError, ValueError):
    """Invalid run configuration. Messages name the offending field path."""


class NumericError(SigkernError, ArithmeticError):
    """Numerically degenerate computation (singular solve, zero denominator)."""


class StratificationError(SigkernError, ValueError):
    """Cross-validation folds cannot be stratified with the given labels."""
