"""Exception hierarchy shared by the library and the CLI exit-code mapping."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ContractError(ValueError):
    """An input violates a structural precondition (e.g. symmetry)."""


class ModelError(ValueError):
    """A covariance model cannot be realized (e.g. not positive semi-definite)."""


class CapabilityError(NotImplementedError):
    """The request is valid in principle but not supported by this implementation."""


class NumericalError(ArithmeticError):
    """An iterative routine failed to converge."""

    def __init__(self, message: str, residual: float = float("nan")) -> None:
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual
