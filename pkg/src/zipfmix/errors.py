"""Exception types shared across the package."""


class ZipfMixError(Exception):
    """Base class for all package errors."""


class DomainError(ZipfMixError, ValueError):
    """An argument lies outside the domain of the function."""


class NonFiniteMoment(ZipfMixError, ArithmeticError):
    """The requested moment diverges for this parameter value."""


class DegenerateSample(ZipfMixError, ValueError):
    """The sample carries no information about the parameter (e.g. all ones)."""


class NonConvergence(ZipfMixError, RuntimeError):
    """A numerical routine failed to meet its tolerance."""


class PatternMismatch(ZipfMixError, ValueError):
    """The chapter-heading pattern matched nothing."""


class EmptyInput(ZipfMixError, ValueError):
    pass


class ParseError(ZipfMixError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvariantViolation(ZipfMixError, ValueError):
    def __init__(self, rule, detail=""):
        self.rule = rule
        super().__init__(f"{rule}: {detail}" if detail else rule)
