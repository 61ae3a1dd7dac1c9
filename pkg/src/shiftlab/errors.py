"""Error types that map onto the CLI exit-code contract."""

from __future__ import annotations


class BudgetError(RuntimeError):
    """A requested configuration exceeds an explicit resource budget (exit 3)."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class TrialOverflowError(RuntimeError):
    """A simulation trial hit the hard step cap; partial diagnostics attached (exit 4)."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details
