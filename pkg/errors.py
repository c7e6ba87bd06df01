"""
Error types raised across the differentiator.
"""

from typing import Optional


class DerivativeError(Exception):
    """Base class for every error the engine reports to the user."""

    form_index: Optional[int] = None


class ParseError(DerivativeError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ArityError(DerivativeError):
    pass


class UnboundVariable(DerivativeError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name}")
        self.name = name


class UnknownFunction(DerivativeError):
    def __init__(self, name: str, detail: str = ""):
        super().__init__(f"unknown function {name}" + (f" ({detail})" if detail else ""))
        self.name = name


class UnknownPredicate(DerivativeError):
    def __init__(self, name: str):
        super().__init__(f"unknown predicate {name}")
        self.name = name


class DomainViolation(DerivativeError):
    """The point lies outside the domain of the expression being evaluated."""


class Overflow(DomainViolation):
    """The value exists mathematically but is too large for double precision."""


class DuplicateRegistration(DerivativeError):
    pass


class MalformedTemplate(DerivativeError):
    pass


class RecursionDetected(DerivativeError):
    def __init__(self, cycle):
        super().__init__("recursive definition: " + " -> ".join(cycle))
        self.cycle = list(cycle)


class VaryingHeldArgument(DerivativeError):
    pass


class UnsupportedArity(DerivativeError):
    pass


class InsufficientSamples(DerivativeError):
    def __init__(self, accepted: int, tried: int, needed: int):
        super().__init__(
            f"only {accepted} of {tried} candidate points were in the domain (need {needed})"
        )
        self.accepted = accepted
        self.tried = tried
        self.needed = needed


class EvaluationError(DerivativeError):
    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point
