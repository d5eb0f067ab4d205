"""Exception types shared across the package.

Two families matter to callers: validation errors (bad shapes, broken input
contracts) and numerical errors (conditions the data can trigger at run time,
such as off-manifold points or ill-conditioned frames). The CLI maps the
first family to exit code 2 and the second to exit code 4.
"""

from __future__ import annotations


class LapbelError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LapbelError, ValueError):
    """Input violates a documented contract (shape, type, or value)."""


class NumericalError(LapbelError, ArithmeticError):
    """A numerically meaningful failure state reached with valid inputs."""


class DimensionError(ValidationError):
    """Shapes or sizes are inconsistent with the operation's contract."""


class ContractError(ValidationError):
    """A semantic precondition failed (asymmetry, wrong provenance, ...)."""


class DomainError(NumericalError):
    """A point lies outside the manifold the operation is defined on."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class SingularityError(NumericalError):
    """A matrix that must be well conditioned is not.

    Carries the condition estimate that triggered the rejection.
    """

    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


class FactorizationError(NumericalError):
    """A Cholesky factorization failed on a matrix required to be SPD."""


class RegularityError(NumericalError):
    """Constraint gradients are linearly dependent where independence is required."""


class ChartError(NumericalError):
    """The requested coordinate chart is invalid at the given point.

    ``suggested_index`` names a usable excluded index when one exists.
    """

    def __init__(self, message: str, suggested_index: int | None = None):
        super().__init__(message)
        self.suggested_index = suggested_index
