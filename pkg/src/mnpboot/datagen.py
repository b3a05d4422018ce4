"""Synthetic data from structured population covariance models.

Observations are rows of an ``n x p`` array. Each model knows its realized
covariance matrix and its population spectral measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from mnpboot import rng as rngmod
from mnpboot.errors import DomainError, ModelError
from mnpboot.spectra import DiscreteMeasure, eigenvalues_sym

__all__ = [
    "CovarianceSpec",
    "InnovationDist",
    "ma1_coefficients",
    "generate_sample",
    "population_spectral_measure",
    "parse_model",
]

Kind = Literal["identity", "two_point", "three_block", "toeplitz", "tridiagonal_ma", "dense"]
DistKind = Literal["normal", "chisq20", "rademacher"]


def ma1_coefficients(rho: float) -> tuple[float, float]:
    """Weights ``(a, b)`` with ``a^2 + b^2 = 1`` and ``a*b = rho``, ``a >= b >= 0``."""
    if not 0.0 <= rho <= 0.5:
        raise DomainError(f"rho must lie in [0, 0.5], got {rho}")
    disc = math.sqrt(max(1.0 - 4.0 * rho * rho, 0.0))
    a2 = 0.5 * (1.0 + disc)
    a = math.sqrt(a2)
    # rho / a instead of sqrt((1 - disc)/2): avoids cancellation for small rho
    b = rho / a
    return a, b


@dataclass(frozen=True)
class CovarianceSpec:
    """Declarative population covariance model of dimension ``p``.

    ``param`` meaning by kind: ``two_point`` fraction of coordinates with
    variance 2; ``toeplitz`` the base ``t`` of ``t**|i-j|``; ``tridiagonal_ma``
    the off-diagonal value rho (with ``r`` nonzero off-diagonal entries).
    ``dense`` carries an explicit matrix.
    """

    kind: Kind
    p: int
    param: float = 0.0
    r: int = 0
    matrix: NDArray[np.float64] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ModelError("p must be positive")
        if self.kind == "two_point" and not 0.0 <= self.param <= 1.0:
            raise ModelError("two_point fraction must lie in [0, 1]")
        if self.kind == "tridiagonal_ma":
            if not 0.0 <= self.param <= 0.5:
                raise ModelError("tridiagonal_ma rho must lie in [0, 0.5]")
            if not 0 <= self.r <= self.p - 1:
                raise ModelError("tridiagonal_ma needs 0 <= r <= p-1")
        if self.kind == "dense":
            if self.matrix is None:
                raise ModelError("dense spec needs a matrix")
            M = np.asarray(self.matrix, dtype=np.float64)
            if M.shape != (self.p, self.p):
                raise ModelError("dense matrix shape does not match p")
            object.__setattr__(self, "matrix", M)
        if self.kind not in ("identity", "two_point", "three_block", "toeplitz", "tridiagonal_ma", "dense"):
            raise ModelError(f"unknown covariance kind {self.kind!r}")

    # constructors mirroring the model names used in the CLI
    @classmethod
    def identity(cls, p: int) -> "CovarianceSpec":
        return cls("identity", p)

    @classmethod
    def two_point(cls, p: int, fraction_at_2: float = 0.5) -> "CovarianceSpec":
        return cls("two_point", p, fraction_at_2)

    @classmethod
    def three_block(cls, p: int) -> "CovarianceSpec":
        return cls("three_block", p)

    @classmethod
    def toeplitz(cls, p: int, base: float = 0.25) -> "CovarianceSpec":
        return cls("toeplitz", p, base)

    @classmethod
    def tridiagonal_ma(cls, p: int, rho: float, r: int) -> "CovarianceSpec":
        return cls("tridiagonal_ma", p, rho, r)

    @classmethod
    def dense(cls, matrix) -> "CovarianceSpec":
        M = np.asarray(matrix, dtype=np.float64)
        return cls("dense", M.shape[0], matrix=M)

    def diagonal(self) -> NDArray[np.float64] | None:
        """Diagonal of Sigma for the diagonal kinds, else ``None``."""
        p = self.p
        if self.kind == "identity":
            return np.ones(p)
        if self.kind == "two_point":
            # leading block at 2, as in the paper's case (a)
            k = int(round(self.param * p))
            return np.r_[np.full(k, 2.0), np.ones(p - k)]
        if self.kind == "three_block":
            k4 = int(round(p / 4))
            k2 = int(round(p / 4))
            return np.r_[np.full(k4, 4.0), np.ones(p - k4 - k2), np.full(k2, 2.0)]
        return None

    def matrix_realized(self) -> NDArray[np.float64]:
        """The ``p x p`` population covariance matrix."""
        d = self.diagonal()
        if d is not None:
            return np.diag(d)
        p = self.p
        if self.kind == "toeplitz":
            idx = np.arange(p)
            return self.param ** np.abs(idx[:, None] - idx[None, :]).astype(float)
        if self.kind == "tridiagonal_ma":
            S = np.eye(p)
            k = np.arange(self.r)
            S[k, k + 1] = self.param
            S[k + 1, k] = self.param
            return S
        return np.array(self.matrix, copy=True)

    def describe(self) -> str:
        if self.kind == "tridiagonal_ma":
            return f"tridiagonal_ma(p={self.p}, rho={self.param:g}, r={self.r})"
        if self.kind in ("two_point", "toeplitz"):
            return f"{self.kind}(p={self.p}, {self.param:g})"
        return f"{self.kind}(p={self.p})"


@dataclass(frozen=True)
class InnovationDist:
    """Mean-zero, unit-variance innovation law."""

    kind: DistKind = "normal"

    def __post_init__(self) -> None:
        if self.kind not in ("normal", "chisq20", "rademacher"):
            raise ModelError(f"unknown innovation distribution {self.kind!r}")

    def draw(self, gen: np.random.Generator, shape) -> NDArray[np.float64]:
        if self.kind == "normal":
            return gen.standard_normal(shape)
        if self.kind == "chisq20":
            return (gen.chisquare(20.0, shape) - 20.0) / math.sqrt(40.0)
        return gen.integers(0, 2, size=shape).astype(np.float64) * 2.0 - 1.0

    @property
    def fourth_moment(self) -> float:
        return {"normal": 3.0, "chisq20": 3.6, "rademacher": 1.0}[self.kind]


def _sym_sqrt(S: NDArray[np.float64]) -> NDArray[np.float64]:
    vals, vecs = np.linalg.eigh(S)
    tol = 1e-10 * max(1.0, float(np.max(np.abs(vals))))
    if vals.min() < -tol:
        raise ModelError(f"covariance is not positive semi-definite (min eigenvalue {vals.min():.3e})")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def generate_sample(
    spec: CovarianceSpec,
    dist: InnovationDist | str = "normal",
    n: int = 100,
    seed: int = 0,
) -> NDArray[np.float64]:
    """Draw ``n`` iid rows with population covariance ``spec.matrix_realized()``."""
    if n < 1:
        raise DomainError("n must be positive")
    if isinstance(dist, str):
        dist = InnovationDist(dist)
    gen = rngmod.stream(seed, "innovations")
    p = spec.p

    d = spec.diagonal()
    if d is not None:
        return dist.draw(gen, (n, p)) * np.sqrt(d)

    if spec.kind == "tridiagonal_ma":
        # p+1 innovations per row; the first r+1 coordinates are MA(1) so that
        # exactly r adjacent pairs are correlated.
        X = dist.draw(gen, (n, p + 1))
        Y = X[:, 1:].copy()
        if spec.r > 0:
            a, b = ma1_coefficients(spec.param)
            k = spec.r + 1
            Y[:, :k] = a * X[:, 1 : k + 1] + b * X[:, :k]
        return Y

    root = _sym_sqrt(spec.matrix_realized())
    return dist.draw(gen, (n, p)) @ root


def population_spectral_measure(spec: CovarianceSpec) -> DiscreteMeasure:
    """Spectral measure of the realized population covariance."""
    d = spec.diagonal()
    if d is not None:
        return DiscreteMeasure(d, np.full(d.size, 1.0 / d.size))
    S = spec.matrix_realized()
    if spec.kind == "dense":
        _sym_sqrt(S)  # PSD check
    eigs = eigenvalues_sym(S)
    return DiscreteMeasure(eigs, np.full(eigs.size, 1.0 / eigs.size))


def parse_model(text: str, p: int) -> CovarianceSpec:
    """Parse a CLI model string.

    Accepted forms: ``identity``, ``two-point[:fraction]``, ``three-block``,
    ``toeplitz[:base]``, ``ma:rho:r`` (``r`` may be ``NN%`` of p),
    ``dense:<csv path>``.
    """
    name, _, rest = text.strip().partition(":")
    name = name.lower().replace("_", "-")
    try:
        if name == "identity":
            return CovarianceSpec.identity(p)
        if name == "two-point":
            return CovarianceSpec.two_point(p, float(rest) if rest else 0.5)
        if name == "three-block":
            return CovarianceSpec.three_block(p)
        if name == "toeplitz":
            return CovarianceSpec.toeplitz(p, float(rest) if rest else 0.25)
        if name == "ma":
            rho_s, _, r_s = rest.partition(":")
            if r_s.endswith("%"):
                r = int(round(float(r_s[:-1]) / 100.0 * p))
            else:
                r = int(r_s)
            return CovarianceSpec.tridiagonal_ma(p, float(rho_s), r)
        if name == "dense":
            M = np.loadtxt(rest, delimiter=",", ndmin=2)
            return CovarianceSpec.dense(M)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"cannot parse model {text!r}: {exc}") from exc
    raise ModelError(f"unknown model {text!r}")
