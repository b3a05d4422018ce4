from __future__ import annotations

import numpy as np
import pytest

from mnpboot.bench import run_bench, scaling_slope, time_replicates
from mnpboot.errors import DomainError


@pytest.fixture(scope="module")
def Y():
    return np.random.default_rng(0).normal(size=(400, 200))


def test_b0_only_statistic(Y):
    rep = run_bench(Y, 40, 0)
    assert rep.boot_median_s is None and rep.classical_median_s is None
    assert [r["phase"] for r in rep.rows()] == ["statistic"]


def test_ratio_and_skip(Y):
    rep = run_bench(Y, 40, 5)
    assert rep.q == 20 and rep.ratio > 1
    skipped = run_bench(Y, 40, 3, mem_limit_bytes=1000)
    assert skipped.classical_median_s is None and "skipped" in skipped.notes[0]
    with pytest.raises(DomainError):
        run_bench(Y, 1, 3)


def test_time_replicates_shape(Y):
    t = time_replicates(Y, 40, 20, 4, seed=1)
    assert t.shape == (4,) and np.all(t > 0)


@pytest.mark.slow
def test_scaling_slope():
    Y = np.random.default_rng(1).normal(size=(8000, 4000))
    # q doubling from 200 to 1600: eigen-dominated cost grows between q^2 and q^3
    slope = scaling_slope(Y, [200, 400, 800, 1600], B=5, seed=0)
    assert 1.7 <= slope <= 3.3
