"""
Error types raised by the workbench
"""

from __future__ import annotations

from typing import Any


class WorkbenchError(ValueError):
    """Base class for every validation or computation failure.

    Args:
        message: Human readable description.
        label: The offending object (a triple of basis indices, a module name, a degree...).
    """

    def __init__(self, message: str, label: Any = None):
        super().__init__(message)
        self.label = label

    def __str__(self) -> str:
        base = super().__str__()
        if self.label is None:
            return base
        return f"{base} [{self.label}]"


class ParseError(WorkbenchError):
    """Malformed TOML document or linear-combination string"""


class AlgebraValidationError(WorkbenchError):
    """Structure constants violate associativity, unit, idempotent or bidegree axioms"""


class QuiverError(WorkbenchError):
    """Non-admissible relations or a quotient that is not finite within the path bound"""


class ModuleValidationError(WorkbenchError):
    """Action matrices do not define a left module"""


class ComplexValidationError(WorkbenchError):
    """Differentials are not Λ-linear, have the wrong shape, or do not square to zero"""


class CompositionError(WorkbenchError):
    """Two consecutive maps do not compose to zero"""


class NoSolution(WorkbenchError):
    """A linear system has no solution"""


class ShapeMismatch(WorkbenchError):
    """Matrix or element shapes are incompatible"""


class NotSelfInjectiveError(WorkbenchError):
    """An operation that needs a self-injective algebra was given another one"""


class CapInsufficientError(WorkbenchError):
    """A truncation cap or maximal stage is too small for the requested window"""


class NonStabilizationWarning(UserWarning):
    """A colimit did not stabilize within the configured maximum stage"""
