"""Bootstrap test of H0: Sigma = I based on the Ledoit-Wolf statistic.

The statistic ``T_n = tr((S - I)^2)`` is compared, after subtracting its
Marchenko-Pastur centering ``p^2/n``, with the (1-alpha) quantile of the
bootstrap law of ``T*_{m,n} - (m/n) T_n``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Literal, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from mnpboot import rng as rngmod
from mnpboot.adaptive import build_ladder, candidate_ms, choose_m, ladder_diagnostics
from mnpboot.bootstrap import ProjectionStrategy, projected_dimension, run_bootstrap
from mnpboot.datagen import CovarianceSpec, InnovationDist, generate_sample
from mnpboot.errors import DomainError
from mnpboot.mp import bias_correction_dn
from mnpboot.spectra import LEDOIT_WOLF, DiscreteMeasure, empirical_spectral_measure

__all__ = [
    "TestResult",
    "MCConfig",
    "MCResult",
    "ledoit_wolf_stat",
    "bootstrap_quantile",
    "identity_test",
    "rejection_probability_mc",
    "full_spectrum",
]

MRule = Union[int, Literal["bs", "dk"]]


def ledoit_wolf_stat(Y: NDArray[np.float64], route: Literal["auto", "dense", "gram"] = "auto") -> float:
    """``tr((S - I)^2)`` with ``S = Y'Y/n``.

    For ``p > n`` the ``n x n`` Gram matrix is used, so no ``p x p`` array is
    formed.
    """
    Y = np.asarray(Y, dtype=np.float64)
    n, p = Y.shape
    if route == "auto":
        route = "gram" if p > n else "dense"
    if route == "dense":
        S = Y.T @ Y / n
        S[np.diag_indices(p)] -= 1.0
        return float(np.sum(S * S))
    G = Y @ Y.T
    tr_s2 = float(np.sum(G * G)) / n**2
    tr_s = float(np.trace(G)) / n
    return tr_s2 - 2.0 * tr_s + p


def bootstrap_quantile(samples: Sequence[float], alpha: float) -> float:
    """The ``ceil((1-alpha) B)``-th order statistic (1-based), no interpolation."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    s = np.sort(np.asarray(samples, dtype=float))
    if s.size == 0:
        raise DomainError("need at least one bootstrap sample")
    # Fraction-free but guarded against (1-alpha)*B landing a hair above an integer
    k = math.ceil(round((1.0 - alpha) * s.size, 9))
    return float(s[min(max(k, 1), s.size) - 1])


def full_spectrum(Y: NDArray[np.float64]) -> NDArray[np.float64]:
    """All ``p`` eigenvalues of ``S``; via the Gram matrix (plus zeros) when ``p > n``."""
    n, p = Y.shape
    if p > n:
        g = np.linalg.eigvalsh(Y @ Y.T / n)
        return np.sort(np.r_[np.zeros(p - n), g])
    return np.linalg.eigvalsh(Y.T @ Y / n)


@dataclass
class TestResult:
    """Outcome of one identity test; ``timings`` are wall-clock seconds per phase."""

    __test__ = False  # not a pytest class

    statistic: float
    centering: float
    samples: NDArray[np.float64]
    quantile: float
    m: int
    q: int
    decision: bool
    rule: str
    alpha: float
    B: int
    chosen_index: int | None = None
    bias_statistic: float = 0.0
    bias_bootstrap: float = 0.0
    timings: dict[str, float] = field(default_factory=dict)
    diagnostics: list[dict] | None = None

    def record(self) -> dict:
        """Deterministic part of the result (no timings)."""
        return {
            "statistic": self.statistic, "centering": self.centering,
            "quantile": self.quantile, "m": self.m, "q": self.q,
            "decision": self.decision, "rule": self.rule, "alpha": self.alpha,
            "B": self.B, "chosen_index": self.chosen_index,
            "bias_statistic": self.bias_statistic, "bias_bootstrap": self.bias_bootstrap,
            "samples": [float(v) for v in self.samples],
        }


def identity_test(
    Y: NDArray[np.float64],
    m_rule: MRule = "bs",
    B: int = 500,
    alpha: float = 0.05,
    strategy: ProjectionStrategy | None = None,
    seed: int = 0,
    workers: int = 1,
    *,
    psi: float = 0.75,
    K: int = 30,
    j_start: int = 10,
    projection_resample: str = "per_replicate",
    refined_centering: bool = False,
) -> TestResult:
    """Reject H0 iff ``T_n - p^2/n`` exceeds the bootstrap quantile.

    ``m_rule`` is a fixed subsample size or ``"bs"``/``"dk"`` for the adaptive
    rules. With ``refined_centering`` the contour bias term is subtracted on
    both sides: ``d_n(delta_1)`` from the statistic and ``d_n(ESD of S)`` from
    the bootstrap samples.
    """
    Y = np.asarray(Y, dtype=np.float64)
    n, p = Y.shape
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    T = ledoit_wolf_stat(Y)
    centering = p * p / n
    timings["statistic"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    chosen = diag = None
    if isinstance(m_rule, str):
        ladder = build_ladder(Y, LEDOIT_WOLF, T, B, psi, K, j_start, strategy,
                              projection_resample, seed, workers)
        chosen, m = choose_m(ladder, m_rule)
        samples = ladder.samples[chosen]
        q = ladder.qs[chosen]
        rule = m_rule
        diag = ladder_diagnostics(ladder)
    else:
        m = int(m_rule)
        run = run_bootstrap(Y, m, B, strategy, projection_resample, [LEDOIT_WOLF], seed, workers)
        samples = run.lss_samples(LEDOIT_WOLF.name) - (m / n) * T
        q = run.q
        rule = "fixed"
    timings["bootstrap"] = time.perf_counter() - t1

    bias_stat = bias_boot = 0.0
    if refined_centering:
        t2 = time.perf_counter()
        gamma = p / n
        bias_stat = bias_correction_dn(DiscreteMeasure.dirac(1.0), gamma, LEDOIT_WOLF)
        bias_boot = bias_correction_dn(empirical_spectral_measure(full_spectrum(Y)), gamma, LEDOIT_WOLF)
        samples = samples - bias_boot
        timings["bias"] = time.perf_counter() - t2

    quant = bootstrap_quantile(samples, alpha)
    decision = bool(T - centering - bias_stat > quant)
    timings["total"] = time.perf_counter() - t0
    return TestResult(T, centering, np.asarray(samples), quant, m, q, decision, rule,
                      alpha, B, chosen, bias_stat, bias_boot, timings, diag)


@dataclass(frozen=True)
class MCConfig:
    """One cell of a rejection-probability table."""

    spec: CovarianceSpec
    n: int
    dist: InnovationDist = InnovationDist("normal")
    m_rule: MRule = "bs"
    B: int = 500
    alpha: float = 0.05
    n_sim: int = 100
    seed: int = 0
    strategy: ProjectionStrategy = ProjectionStrategy("uniform")
    psi: float = 0.75
    K: int = 30
    j_start: int = 10
    refined_centering: bool = False
    workers: int = 1


@dataclass
class MCResult:
    rate: float
    se: float
    n_sim: int
    decisions: list[bool]
    chosen_ms: list[int]
    chosen_indices: list[int | None]
    n_candidates: int | None
    mean_runtime_s: float


def rejection_probability_mc(config: MCConfig) -> MCResult:
    """Fraction of rejections over ``n_sim`` independent data sets.

    Simulation ``i`` draws its data from ``child_seed(seed, "data", i)`` and
    bootstraps with ``child_seed(seed, "test", i)``; simulations run in
    parallel, each bootstrap serially.
    """
    if config.n_sim < 1:
        raise DomainError("n_sim must be at least 1")
    cfg = config

    def one(i: int):
        t = time.perf_counter()
        Y = generate_sample(cfg.spec, cfg.dist, cfg.n, rngmod.child_seed(cfg.seed, "data", i))
        res = identity_test(Y, cfg.m_rule, cfg.B, cfg.alpha, cfg.strategy,
                            rngmod.child_seed(cfg.seed, "test", i), 1,
                            psi=cfg.psi, K=cfg.K, j_start=cfg.j_start,
                            refined_centering=cfg.refined_centering)
        return res.decision, res.m, res.chosen_index, time.perf_counter() - t

    out = rngmod.parallel_map(one, range(cfg.n_sim), cfg.workers)
    decisions = [o[0] for o in out]
    rate = sum(decisions) / cfg.n_sim
    n_cand = None
    if isinstance(cfg.m_rule, str):
        n_cand = sum(1 for m in candidate_ms(cfg.n, cfg.psi, cfg.K, cfg.j_start)
                     if m >= 2 and projected_dimension(m, cfg.n, cfg.spec.p) >= 1)
    return MCResult(rate, math.sqrt(rate * (1.0 - rate) / cfg.n_sim), cfg.n_sim, decisions,
                    [o[1] for o in out], [o[2] for o in out], n_cand,
                    float(np.mean([o[3] for o in out])))
