"""Data-driven choice of the bootstrap subsample size m.

Both rules work on a geometric ladder ``m_j = ceil(psi^j n)`` and compare the
bootstrap laws of the centred statistic ``T*_{m_j,n} - (m_j/n) T_n`` across
candidates:

* Bickel-Sakov: first j minimizing ``d(L_j, L_{j+1})``;
* Dette-Kroll: first j minimizing ``sum_k d(L_j, L_k)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Sequence

import numpy as np
from numpy.typing import NDArray

from mnpboot import rng as rngmod
from mnpboot.bootstrap import ProjectionStrategy, projected_dimension, run_bootstrap
from mnpboot.errors import DomainError
from mnpboot.spectra import SpectralFunction, kolmogorov_distance

__all__ = [
    "MLadder",
    "candidate_ms",
    "build_ladder",
    "distance_matrix",
    "bickel_sakov_index",
    "dette_kroll_index",
    "choose_m_bickel_sakov",
    "choose_m_dette_kroll",
    "choose_m",
    "ladder_diagnostics",
]

Distance = Callable[[NDArray[np.float64], NDArray[np.float64]], float]
RuleName = Literal["bs", "dk"]


def candidate_ms(n: int, psi: float = 0.75, K: int = 30, j_start: int = 10) -> list[int]:
    """``ceil(psi^j n)`` for ``j = j_start, ..., j_start + K`` (exact rational ceiling)."""
    if not 0.0 < psi < 1.0:
        raise DomainError("psi must lie in (0, 1)")
    if K < 1:
        raise DomainError("K must be at least 1")
    fpsi = Fraction(psi)
    return [math.ceil(fpsi**j * n) for j in range(j_start, j_start + K + 1)]


@dataclass
class MLadder:
    """Feasible candidates and their cached bootstrap samples."""

    n: int
    p: int
    psi: float
    K: int
    j_start: int
    js: list[int] = field(default_factory=list)
    ms: list[int] = field(default_factory=list)
    qs: list[int] = field(default_factory=list)
    samples: list[NDArray[np.float64]] = field(default_factory=list)
    dropped: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ms)


def build_ladder(
    Y: NDArray[np.float64],
    f: SpectralFunction,
    full_stat: float,
    B: int,
    psi: float = 0.75,
    K: int = 30,
    j_start: int = 10,
    strategy: ProjectionStrategy | None = None,
    projection_resample: str = "per_replicate",
    seed: int = 0,
    workers: int = 1,
) -> MLadder:
    """Bootstrap every feasible candidate once and cache ``T* - (m/n) T_n``.

    ``full_stat`` is ``T_n(f)`` on the full data. Candidates with ``m < 2``
    or ``floor(m p / n) < 1`` are dropped with a warning.
    """
    n, p = Y.shape
    ladder = MLadder(n, p, psi, K, j_start)
    for j, m in zip(range(j_start, j_start + K + 1), candidate_ms(n, psi, K, j_start)):
        q = projected_dimension(m, n, p)
        if m < 2 or q < 1:
            ladder.dropped.append((j, m))
            continue
        ladder.js.append(j)
        ladder.ms.append(m)
        ladder.qs.append(q)
    if ladder.dropped:
        warnings.warn(f"dropped {len(ladder.dropped)} infeasible ladder candidates "
                      f"(j >= {ladder.dropped[0][0]}, m < 2 or q < 1)", RuntimeWarning, stacklevel=2)

    def one(k: int) -> NDArray[np.float64]:
        j, m = ladder.js[k], ladder.ms[k]
        run = run_bootstrap(Y, m, B, strategy, projection_resample, [f],
                            rngmod.child_seed(seed, "ladder", j), workers=1)
        return run.lss_samples(f.name) - (m / n) * full_stat

    ladder.samples = rngmod.parallel_map(one, range(len(ladder.ms)), workers)
    return ladder


def distance_matrix(samples: Sequence[NDArray[np.float64]],
                    distance: Distance = kolmogorov_distance) -> NDArray[np.float64]:
    """Symmetric pairwise distances with an exactly zero diagonal."""
    k = len(samples)
    D = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            D[i, j] = D[j, i] = distance(samples[i], samples[j])
    return D


def bickel_sakov_index(consecutive: Sequence[float]) -> int:
    """First index attaining the minimum of ``d(L_j, L_{j+1})``."""
    d = np.asarray(consecutive, dtype=float)
    if d.size < 1:
        raise DomainError("need at least two candidates")
    return int(np.argmin(d))  # argmin returns the first minimizer


def dette_kroll_index(D: NDArray[np.float64]) -> int:
    """First index attaining the minimal row sum of the distance matrix."""
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] < 2 or D.shape[0] != D.shape[1]:
        raise DomainError("need a square distance matrix over at least two candidates")
    return int(np.argmin(D.sum(axis=1)))


def _consecutive(samples, distance):
    return [distance(samples[i], samples[i + 1]) for i in range(len(samples) - 1)]


def choose_m_bickel_sakov(ladder: MLadder, distance: Distance = kolmogorov_distance) -> tuple[int, int]:
    """Index into the feasible candidates and the chosen m."""
    if len(ladder) < 2:
        raise DomainError("need at least two feasible candidates")
    J = bickel_sakov_index(_consecutive(ladder.samples, distance))
    return J, ladder.ms[J]


def choose_m_dette_kroll(ladder: MLadder, distance: Distance = kolmogorov_distance) -> tuple[int, int]:
    if len(ladder) < 2:
        raise DomainError("need at least two feasible candidates")
    J = dette_kroll_index(distance_matrix(ladder.samples, distance))
    return J, ladder.ms[J]


def choose_m(ladder: MLadder, rule: RuleName, distance: Distance = kolmogorov_distance) -> tuple[int, int]:
    if rule == "bs":
        return choose_m_bickel_sakov(ladder, distance)
    if rule == "dk":
        return choose_m_dette_kroll(ladder, distance)
    raise DomainError(f"unknown m rule {rule!r}")


def ladder_diagnostics(ladder: MLadder, distance: Distance = kolmogorov_distance) -> list[dict]:
    """Rows ``(j, m_j, q_j, d_consecutive, d_rowsum)``; the last row has no successor."""
    D = distance_matrix(ladder.samples, distance)
    rows = []
    for k in range(len(ladder)):
        rows.append({
            "j": ladder.js[k],
            "m_j": ladder.ms[k],
            "q_j": ladder.qs[k],
            "d_consecutive": float(D[k, k + 1]) if k + 1 < len(ladder) else float("nan"),
            "d_rowsum": float(D[k].sum()),
        })
    return rows
