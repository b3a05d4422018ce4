"""Wall-clock comparison of the (m, mp/n) bootstrap with the classical one.

Three phases are timed at a common ``(n, p)``:

a. one-off ``S`` and ``T_n``;
b. ``B`` (m, mp/n)-replicates;
c. ``B`` classical n-out-of-n replicates, skipped when the ``p x p`` work
   arrays would exceed ``mem_limit_bytes``.

Per-replicate times are medians. Timings are not reproducible and are never
part of the determinism contract.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from mnpboot.bootstrap import ProjectionStrategy, _replicate, projected_dimension, select_coordinates
from mnpboot import rng as rngmod
from mnpboot.errors import DomainError
from mnpboot.spectra import LEDOIT_WOLF
from mnpboot.testing import ledoit_wolf_stat

__all__ = ["BenchReport", "run_bench", "time_replicates", "scaling_slope"]

DEFAULT_MEM_LIMIT = 2 * 1024**3


@dataclass
class BenchReport:
    n: int
    p: int
    m: int
    q: int
    B: int
    stat_s: float
    boot_median_s: float | None = None
    classical_median_s: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def ratio(self) -> float | None:
        if self.boot_median_s is None or self.classical_median_s is None:
            return None
        return self.classical_median_s / self.boot_median_s

    def rows(self) -> list[dict]:
        out = [{"phase": "statistic", "seconds": self.stat_s}]
        if self.boot_median_s is not None:
            out.append({"phase": "mnp_replicate_median", "seconds": self.boot_median_s})
        if self.classical_median_s is not None:
            out.append({"phase": "classical_replicate_median", "seconds": self.classical_median_s})
            out.append({"phase": "ratio_classical_over_mnp", "seconds": self.ratio})
        return out


def time_replicates(Y: NDArray[np.float64], m: int, q: int, B: int, seed: int,
                    strategy: ProjectionStrategy | None = None) -> NDArray[np.float64]:
    """Per-replicate wall-clock seconds for ``B`` serial replicates."""
    strategy = strategy or ProjectionStrategy()
    p = Y.shape[1]
    times = np.empty(B)
    for b in range(1, B + 1):
        t = time.perf_counter()
        coords = (np.arange(p) if q == p
                  else select_coordinates(strategy, p, q, rngmod.stream(seed, "projection", b)))
        _replicate(Y, m, coords, rngmod.stream(seed, "rows", b), [LEDOIT_WOLF], b)
        times[b - 1] = time.perf_counter() - t
    return times


def run_bench(Y: NDArray[np.float64], m: int, B: int, seed: int = 0,
              strategy: ProjectionStrategy | None = None,
              mem_limit_bytes: int = DEFAULT_MEM_LIMIT) -> BenchReport:
    Y = np.asarray(Y, dtype=np.float64)
    n, p = Y.shape
    if B < 0:
        raise DomainError("B must be nonnegative")
    q = projected_dimension(m, n, p)
    t = time.perf_counter()
    S = Y.T @ Y / n
    ledoit_wolf_stat(Y)
    del S
    rep = BenchReport(n, p, m, q, B, time.perf_counter() - t)
    if B == 0:
        return rep
    if m < 2 or q < 1:
        raise DomainError(f"m too small for this p/n (m={m}, n={n}, p={p} gives q={q})")
    rep.boot_median_s = float(np.median(time_replicates(Y, m, q, B, seed, strategy)))
    # resampled n x p copy plus a couple of p x p arrays
    need = 8 * (n * p + 3 * p * p)
    if need > mem_limit_bytes:
        rep.notes.append(f"classical leg skipped: needs ~{need / 1024**2:.0f} MiB "
                         f"> limit {mem_limit_bytes / 1024**2:.0f} MiB")
    else:
        rep.classical_median_s = float(np.median(time_replicates(Y, n, p, B, seed)))
    return rep


def scaling_slope(Y: NDArray[np.float64], qs: list[int], B: int, seed: int = 0) -> float:
    """Log-log slope of median replicate time against q at ``m = q n / p``."""
    n, p = Y.shape
    med = []
    for q in qs:
        m = math.ceil(q * n / p)
        med.append(np.median(time_replicates(Y, m, projected_dimension(m, n, p), B, seed)))
    return float(np.polyfit(np.log(qs), np.log(med), 1)[0])
