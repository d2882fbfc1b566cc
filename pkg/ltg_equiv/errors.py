"""Exception hierarchy shared by all ltg_equiv modules."""
from typing import Optional


class LtgError(Exception):
    """Base class for every error raised by ltg_equiv."""


class InvalidInputError(LtgError, ValueError):
    """A literal or value lies outside the declared alphabet or syntax."""


class GroupDomainError(LtgError, ValueError):
    """A group operation was applied outside its domain (e.g. root of ε)."""


class ExpansionLimitError(LtgError):
    """Expanding a straight-line program exceeded the configured size limit."""

    def __init__(self, node: int, size: int, limit: int):
        self.node = node
        self.size = size
        self.limit = limit
        super().__init__(
            f"Expansion of SLP node {node} reached {size} letters (limit {limit})"
        )


class OversizedTestSetError(LtgError):
    """The bounded-derivation test set grew beyond its cap."""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(
            f"Test set exceeded {cap} derivations ({size} built); "
            f"lower the bound or use the brute-force oracle instead"
        )


class UsageError(LtgError):
    """An API was called with arguments that violate its contract."""


class OffDomainError(LtgError):
    """Evaluation reached a Bottom rule; carries the offending subtree."""

    def __init__(self, state: str, subtree):
        self.state = state
        self.subtree = subtree
        super().__init__(f"State {state} has no defined rule for input {subtree}")


class EvaluationDepthError(LtgError):
    """Evaluation recursed deeper than the configured guard."""


class InvariantViolation(LtgError, AssertionError):
    """An internal identity check failed. Always a bug."""


class ParseError(LtgError, ValueError):
    """A text input could not be parsed; reports source, line and token."""

    def __init__(self, message: str, source: str = "<input>", line: int = 0,
                 token: Optional[str] = None):
        self.source = source
        self.line = line
        self.token = token
        location = f"{source}:{line}" if line else source
        detail = f" (token '{token}')" if token is not None else ""
        super().__init__(f"{location}: {message}{detail}")
