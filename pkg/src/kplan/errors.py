"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class KError(Exception):
    """Base class for all errors raised by kplan."""


class KSyntaxError(KError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class KValidationError(KError):
    """A well-formed input that violates a typing or structural rule."""


class StratificationError(KError):
    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("program is not stratified; cycle through negation: "
                         + " -> ".join(cycle))


class ResourceLimitError(KError):
    """A configured search or enumeration cap was exceeded."""
