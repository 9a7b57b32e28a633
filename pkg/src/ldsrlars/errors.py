"""Exception hierarchy shared by every subpackage."""

from __future__ import annotations


class LdsrLarsError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LdsrLarsError):
    """A value violates a structural precondition (arity, kinds, ranges)."""


class ParseError(LdsrLarsError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")


class SafetyError(ValidationError):
    """A rule has a variable that is not bound by a positive body literal."""


class StratificationError(LdsrLarsError):
    def __init__(self, message: str, cycle: list[str] | None = None):
        self.cycle = list(cycle or [])
        super().__init__(message)


class UnsupportedProgramError(LdsrLarsError):
    """The program lies outside what the evaluator or translator handles."""


class FragmentViolation(LdsrLarsError):
    def __init__(self, message: str, violations: list | None = None):
        self.violations = list(violations or [])
        super().__init__(message)


class InstanceTooLarge(LdsrLarsError):
    """Raised by the brute-force oracles when the search space is too big."""


class GenerationBudgetExhausted(LdsrLarsError):
    def __init__(self, message: str, acceptance_rate: float):
        self.acceptance_rate = acceptance_rate
        super().__init__(message)
