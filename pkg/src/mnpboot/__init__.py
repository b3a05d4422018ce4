"""Tractable (m, mp/n)-out-of-(n, p) bootstrap for sample covariance spectra."""

from mnpboot.errors import (
    CapabilityError,
    ContractError,
    DomainError,
    ModelError,
    NumericalError,
)

__version__ = "0.1.0"

__all__ = [
    "CapabilityError",
    "ContractError",
    "DomainError",
    "ModelError",
    "NumericalError",
]
