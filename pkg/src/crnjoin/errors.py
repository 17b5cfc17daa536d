"""Exception hierarchy with stable error codes for the command line."""

from __future__ import annotations


class CrnError(Exception):
    """Base class for all package errors."""

    code = "error"


class ParseError(CrnError, ValueError):
    """Malformed network or polynomial text."""

    code = "parse_error"

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        self.line = line
        self.column = column
        loc = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{message}{loc}")


class NetworkError(CrnError, ValueError):
    """A network or model violates a structural requirement."""

    code = "network_error"


class HypothesisError(CrnError):
    """A theorem or operation hypothesis does not hold (not applicable)."""

    code = "not_applicable"


class BudgetExceeded(CrnError):
    """A Groebner computation exceeded its step or degree cap."""

    code = "budget_exceeded"


class InternalCheckError(CrnError, AssertionError):
    """A claim that should always hold failed; indicates a bug."""

    code = "internal_check"
