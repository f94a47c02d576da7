"""Exception hierarchy shared by every layer of the kernel."""

from __future__ import annotations


class ComplfError(Exception):
    """Base class for all kernel errors."""


class ScopeError(ComplfError):
    """A raw expression is not a member of the family it was checked against."""


class FuelExhausted(ComplfError):
    def __init__(self, steps: int):
        super().__init__(f"fuel exhausted after {steps} rewrite steps")
        self.steps = steps


class PatternError(ComplfError):
    def __init__(self, message: str, path: tuple[int, ...] = ()):
        super().__init__(message if not path else f"{message} (at position {list(path)})")
        self.path = path


class MatchFail(ComplfError):
    def __init__(self, message: str, path: tuple[int, ...] = ()):
        super().__init__(f"{message} at position {list(path)}")
        self.path = path


class TypeCheckError(ComplfError):
    """The bidirectional algorithm rejected a judgment."""


class NoInferRule(TypeCheckError):
    pass


class ConversionFail(TypeCheckError):
    def __init__(self, message: str, expected=None, got=None):
        super().__init__(message)
        self.expected = expected
        self.got = got


class SpineError(TypeCheckError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"argument {index}: {message}")
        self.index = index


class OracleError(ComplfError):
    """The declarative oracle rejected a judgment."""

    def __init__(self, rule: str, message: str):
        super().__init__(f"[{rule}] {message}")
        self.rule = rule


class ParseError(ComplfError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.args[0]}"
