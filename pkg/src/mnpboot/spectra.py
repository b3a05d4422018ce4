"""Sample covariances, eigenvalues, spectral measures and distances."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from mnpboot.errors import ContractError, DomainError

__all__ = [
    "DiscreteMeasure",
    "SpectralFunction",
    "LEDOIT_WOLF",
    "sample_covariance",
    "eigenvalues_sym",
    "empirical_spectral_measure",
    "stieltjes_transform",
    "lss",
    "kolmogorov_distance",
]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point masses on the real line.

    Duplicate points are merged on construction, so ``points`` is strictly
    increasing.
    """

    points: NDArray[np.float64]
    weights: NDArray[np.float64]
    total_mass: float = field(init=False)

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64).ravel()
        wts = np.asarray(self.weights, dtype=np.float64).ravel()
        if pts.shape != wts.shape:
            raise ValueError("points and weights must have equal length")
        if pts.size == 0:
            raise ValueError("a discrete measure needs at least one point")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(wts))):
            raise ValueError("points and weights must be finite")
        if np.any(wts < 0):
            raise ValueError("weights must be non-negative")
        uniq, inverse = np.unique(pts, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, wts)
        uniq.setflags(write=False)
        merged.setflags(write=False)
        object.__setattr__(self, "points", uniq)
        object.__setattr__(self, "weights", merged)
        object.__setattr__(self, "total_mass", float(merged.sum()))

    @classmethod
    def from_dict(cls, masses: dict[float, float]) -> "DiscreteMeasure":
        return cls(np.array(list(masses.keys()), float), np.array(list(masses.values()), float))

    @classmethod
    def dirac(cls, x: float = 1.0) -> "DiscreteMeasure":
        return cls(np.array([x]), np.array([1.0]))

    def as_dict(self) -> dict[float, float]:
        return {float(x): float(w) for x, w in zip(self.points, self.weights)}

    def moment(self, k: int) -> float:
        return float(np.sum(self.weights * self.points**k))

    def mass_at(self, x: float) -> float:
        hit = self.points == x
        return float(self.weights[hit].sum())

    def support(self) -> tuple[float, float]:
        pos = self.weights > 0
        return float(self.points[pos].min()), float(self.points[pos].max())


@dataclass(frozen=True)
class SpectralFunction:
    """Polynomial test function ``f(x) = sum_k coeffs[k] * x**k``."""

    coeffs: tuple[float, ...]
    name: str = ""

    def __post_init__(self) -> None:
        c = tuple(float(v) for v in self.coeffs)
        if not c:
            raise ValueError("a polynomial needs at least one coefficient")
        if not all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)
        if not self.name:
            object.__setattr__(self, "name", _poly_name(c))

    @property
    def degree(self) -> int:
        nz = [k for k, v in enumerate(self.coeffs) if v != 0.0]
        return nz[-1] if nz else 0

    def __call__(self, x):
        # Horner, highest coefficient first
        x = np.asarray(x)
        acc = np.zeros_like(x, dtype=np.result_type(x, np.float64))
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


def _poly_name(coeffs: Sequence[float]) -> str:
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        mag = f"{c:g}"
        if k == 0:
            terms.append(mag)
        elif k == 1:
            terms.append(f"{mag}*x")
        else:
            terms.append(f"{mag}*x^{k}")
    return "+".join(terms).replace("+-", "-") if terms else "0"


#: f(x) = x^2 - 2x + 1, the Ledoit-Wolf identity-test functional.
LEDOIT_WOLF = SpectralFunction((1.0, -2.0, 1.0), name="ledoit_wolf")


def sample_covariance(Y: ArrayLike) -> NDArray[np.float64]:
    """Return ``(1/n) * Y.T @ Y``; rows are observations and are not centred."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[0] < 1:
        raise DomainError("Y must be a non-empty 2-d array")
    S = Y.T @ Y / Y.shape[0]
    return 0.5 * (S + S.T)


def eigenvalues_sym(M: ArrayLike, check: bool = True) -> NDArray[np.float64]:
    """Ascending eigenvalues of a real symmetric matrix (LAPACK ``syevd``)."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractError("matrix must be square")
    if check and M.size:
        scale = max(np.max(np.abs(M)), np.finfo(float).tiny)
        if np.max(np.abs(M - M.T)) > 1e-12 * scale:
            raise ContractError("matrix is not symmetric")
    return np.linalg.eigvalsh(M)


def empirical_spectral_measure(eigs: Iterable[float]) -> DiscreteMeasure:
    """Uniform probability measure on the given eigenvalues (ties merged)."""
    e = np.asarray(list(eigs) if not isinstance(eigs, np.ndarray) else eigs, dtype=np.float64).ravel()
    if e.size == 0:
        raise DomainError("need at least one eigenvalue")
    return DiscreteMeasure(e, np.full(e.size, 1.0 / e.size))


def stieltjes_transform(mu: DiscreteMeasure, z):
    """``sum_k w_k / (x_k - z)`` for ``Im z > 0``; vectorised over ``z``."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.imag <= 0):
        raise DomainError("Stieltjes transform needs Im z > 0")
    vals = np.sum(mu.weights / (mu.points - z[..., None]), axis=-1)
    return vals if vals.ndim else complex(vals)


def lss(eigs: ArrayLike, f: SpectralFunction) -> float:
    """Linear spectral statistic ``sum_j f(lambda_j)``."""
    e = np.asarray(eigs, dtype=np.float64)
    if e.size == 0:
        raise DomainError("need at least one eigenvalue")
    return float(np.sum(f(e)))


def kolmogorov_distance(s1: ArrayLike, s2: ArrayLike) -> float:
    """Sup-distance between the right-continuous ECDFs of two samples."""
    a = np.sort(np.asarray(s1, dtype=np.float64).ravel())
    b = np.sort(np.asarray(s2, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError("both samples must be non-empty")
    # ECDF jumps only at sample values, so the sup is attained on the union.
    grid = np.union1d(a, b)
    Fa = np.searchsorted(a, grid, side="right") / a.size
    Fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(Fa - Fb)))
