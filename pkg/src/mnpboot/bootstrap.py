"""The (m, mp/n)-out-of-(n, p) bootstrap and the classical n-out-of-n baseline.

A replicate projects every observation onto ``q = floor(m p / n)`` coordinates,
resamples ``m`` rows with replacement, and keeps only the ascending eigenvalues
of the ``q x q`` sample covariance plus any requested linear spectral
statistics. Coordinate indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from numpy.typing import NDArray

from mnpboot import rng as rngmod
from mnpboot.errors import DomainError
from mnpboot.spectra import SpectralFunction, eigenvalues_sym, lss

__all__ = [
    "ProjectionStrategy",
    "Replicate",
    "BootstrapRun",
    "projected_dimension",
    "select_coordinates",
    "bootstrap_replicate",
    "run_bootstrap",
    "classical_bootstrap_run",
    "projection_stream",
    "rows_stream",
]

StrategyKind = Literal["uniform", "consecutive", "block", "first"]
ResamplePolicy = Literal["per_replicate", "per_run"]


@dataclass(frozen=True)
class ProjectionStrategy:
    """How the ``q`` retained coordinates are chosen.

    ``uniform``: a uniformly random q-subset. ``consecutive``: a window of q
    adjacent coordinates with uniform start. ``block``: a run of whole,
    consecutive blocks (``block_sizes`` partitions p) whose sizes add up to
    q, starting at a uniformly chosen block. ``first``: coordinates 0..q-1.
    """

    kind: StrategyKind = "uniform"
    block_sizes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "consecutive", "block", "first"):
            raise DomainError(f"unknown projection strategy {self.kind!r}")
        if self.kind == "block" and not self.block_sizes:
            raise DomainError("block strategy needs block_sizes")
        object.__setattr__(self, "block_sizes", tuple(int(b) for b in self.block_sizes))

    @classmethod
    def parse(cls, text: str) -> "ProjectionStrategy":
        name, _, rest = text.partition(":")
        name = name.strip().lower().replace("_", "-")
        aliases = {"uniform": "uniform", "uniform-coordinates": "uniform",
                   "consecutive": "consecutive", "consecutive-block": "consecutive",
                   "first": "first", "first-q": "first", "block": "block"}
        if name not in aliases:
            raise DomainError(f"unknown projection strategy {text!r}")
        sizes = tuple(int(s) for s in rest.split(",") if s) if rest else ()
        return cls(aliases[name], sizes)

    def __str__(self) -> str:
        if self.kind == "block":
            return "block:" + ",".join(map(str, self.block_sizes))
        return self.kind


def projected_dimension(m: int, n: int, p: int) -> int:
    """``q = floor(m p / n)`` in exact integer arithmetic."""
    return (m * p) // n


def select_coordinates(strategy: ProjectionStrategy, p: int, q: int,
                       gen: np.random.Generator) -> NDArray[np.intp]:
    """Sorted, distinct 0-based coordinate indices of length ``q``."""
    if not 1 <= q <= p:
        raise DomainError(f"need 1 <= q <= p, got q={q}, p={p}")
    kind = strategy.kind
    if kind == "first":
        return np.arange(q)
    if kind == "consecutive":
        s = int(gen.integers(0, p - q + 1))
        return np.arange(s, s + q)
    if kind == "uniform":
        return np.sort(gen.choice(p, size=q, replace=False))
    sizes = np.asarray(strategy.block_sizes)
    if sizes.sum() != p:
        raise DomainError("block sizes must add up to p")
    starts = np.r_[0, np.cumsum(sizes)]
    # block runs [i, j) whose total size is exactly q
    valid = []
    for i in range(sizes.size):
        j = np.searchsorted(starts, starts[i] + q)
        if j < starts.size and starts[j] == starts[i] + q:
            valid.append(i)
    if not valid:
        raise DomainError(f"no run of whole blocks has total size q={q}")
    i = valid[int(gen.integers(0, len(valid)))]
    return np.arange(starts[i], starts[i] + q)


@dataclass
class Replicate:
    """One bootstrap draw: ascending eigenvalues and LSS values keyed by name."""

    index: int
    eigenvalues: NDArray[np.float64]
    lss_values: dict[str, float] = field(default_factory=dict)


def bootstrap_replicate(
    Y: NDArray[np.float64],
    m: int,
    coords: Sequence[int],
    gen: np.random.Generator,
    f_list: Sequence[SpectralFunction] = (),
    index: int = 0,
) -> Replicate:
    """Resample ``m`` projected rows with replacement and summarize the spectrum."""
    if m < 2:
        raise DomainError("m must be at least 2")
    return _replicate(Y, m, coords, gen, f_list, index)


def _replicate(Y, m, coords, gen, f_list, index) -> Replicate:
    n = Y.shape[0]
    rows = gen.integers(0, n, size=m)
    Z = Y[np.ix_(rows, np.asarray(coords))]
    S = Z.T @ Z / m
    eigs = eigenvalues_sym(0.5 * (S + S.T), check=False)
    return Replicate(index, eigs, {f.name: lss(eigs, f) for f in f_list})


def projection_stream(seed: int, b: int) -> np.random.Generator:
    return rngmod.stream(seed, "projection", b)


def rows_stream(seed: int, b: int) -> np.random.Generator:
    return rngmod.stream(seed, "rows", b)


@dataclass
class BootstrapRun:
    """Configuration echo plus replicate records of one bootstrap run."""

    n: int
    p: int
    m: int
    q: int
    B: int
    strategy: str
    projection_resample: str
    seed: int
    f_names: list[str]
    replicates: list[Replicate]

    def lss_samples(self, name: str) -> NDArray[np.float64]:
        return np.array([r.lss_values[name] for r in self.replicates])

    def pooled_eigenvalues(self) -> NDArray[np.float64]:
        return np.concatenate([r.eigenvalues for r in self.replicates])

    def header(self) -> dict:
        return {
            "n": self.n, "p": self.p, "m": self.m, "q": self.q, "B": self.B,
            "strategy": self.strategy, "projection_resample": self.projection_resample,
            "seed": self.seed, "functions": list(self.f_names),
        }


def run_bootstrap(
    Y: NDArray[np.float64],
    m: int,
    B: int,
    strategy: ProjectionStrategy | None = None,
    projection_resample: ResamplePolicy = "per_replicate",
    f_list: Sequence[SpectralFunction] = (),
    seed: int = 0,
    workers: int = 1,
) -> BootstrapRun:
    """Run ``B`` replicates; replicate ``b`` (1-based) owns streams ``(seed, b)``.

    With ``projection_resample="per_run"`` every replicate shares the
    projection drawn from stream ``(seed, 0)``. Output does not depend on
    ``workers``.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise DomainError("Y must be a 2-d array")
    strategy = strategy or ProjectionStrategy()
    n, p = Y.shape
    if B < 1:
        raise DomainError("B must be at least 1")
    if m < 2:
        raise DomainError("m must be at least 2")
    if projection_resample not in ("per_replicate", "per_run"):
        raise DomainError(f"unknown projection_resample {projection_resample!r}")
    q = projected_dimension(m, n, p)
    if q < 1:
        raise DomainError(f"m too small for this p/n (m={m}, n={n}, p={p} gives q=0)")

    return _run(Y, m, q, B, strategy, projection_resample, f_list, seed, workers)


def _run(Y, m, q, B, strategy, projection_resample, f_list, seed, workers) -> BootstrapRun:
    n, p = Y.shape
    fixed = None
    if projection_resample == "per_run":
        fixed = select_coordinates(strategy, p, q, projection_stream(seed, 0))

    def one(b: int) -> Replicate:
        coords = fixed if fixed is not None else select_coordinates(strategy, p, q, projection_stream(seed, b))
        return _replicate(Y, m, coords, rows_stream(seed, b), f_list, b)

    reps = rngmod.parallel_map(one, range(1, B + 1), workers)
    return BootstrapRun(n, p, m, q, B, str(strategy), projection_resample, seed,
                        [f.name for f in f_list], reps)


def classical_bootstrap_run(
    Y: NDArray[np.float64],
    B: int,
    f_list: Sequence[SpectralFunction] = (),
    seed: int = 0,
    workers: int = 1,
) -> BootstrapRun:
    """n-out-of-n bootstrap: ``m = n``, all ``p`` coordinates kept."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise DomainError("Y must be a 2-d array")
    if B < 1:
        raise DomainError("B must be at least 1")
    n, p = Y.shape
    return _run(Y, n, p, B, ProjectionStrategy("first"), "per_replicate", f_list, seed, workers)
