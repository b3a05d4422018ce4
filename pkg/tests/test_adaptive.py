from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mnpboot.adaptive import (
    MLadder,
    bickel_sakov_index,
    build_ladder,
    candidate_ms,
    choose_m,
    choose_m_bickel_sakov,
    choose_m_dette_kroll,
    dette_kroll_index,
    distance_matrix,
    ladder_diagnostics,
)
from mnpboot.errors import DomainError
from mnpboot.spectra import LEDOIT_WOLF
from mnpboot.testing import ledoit_wolf_stat


def test_candidate_examples():
    assert candidate_ms(100, 0.5, K=2, j_start=1) == [50, 25, 13]
    ms = candidate_ms(80000)
    assert ms[0] == 4506 and ms[1] == 3379
    assert len(ms) == 31


@settings(max_examples=50)
@given(st.integers(1, 10**6), st.floats(0.05, 0.95), st.integers(1, 40), st.integers(0, 20))
def test_candidates_positive_nonincreasing(n, psi, K, j0):
    ms = candidate_ms(n, psi, K, j0)
    assert len(ms) == K + 1
    assert all(m >= 1 for m in ms)
    assert all(a >= b for a, b in zip(ms, ms[1:]))


def test_candidate_domain():
    with pytest.raises(DomainError):
        candidate_ms(10, 1.0)
    with pytest.raises(DomainError):
        candidate_ms(10, 0.5, K=0)


def test_bs_examples():
    assert bickel_sakov_index([0.5, 0.2, 0.2, 0.4]) == 1
    assert bickel_sakov_index([0.3]) == 0
    with pytest.raises(DomainError):
        bickel_sakov_index([])


def test_dk_example():
    D = np.array([[0, 1, 1], [1, 0, 0.1], [1, 0.1, 0]])
    assert dette_kroll_index(D) == 1
    with pytest.raises(DomainError):
        dette_kroll_index(np.zeros((1, 1)))


def _ladder(samples):
    lad = MLadder(100, 50, 0.75, len(samples) - 1, 1)
    lad.samples = list(samples)
    lad.ms = list(range(len(samples) + 10, 10, -1))
    lad.qs = [m // 2 for m in lad.ms]
    lad.js = list(range(1, len(samples) + 1))
    return lad


def test_identical_samples_pick_first():
    s = np.arange(10.0)
    lad = _ladder([s] * 5)
    assert choose_m_bickel_sakov(lad) == (0, lad.ms[0])
    assert choose_m_dette_kroll(lad) == (0, lad.ms[0])


def test_two_candidates():
    g = np.random.default_rng(0)
    lad = _ladder([g.normal(size=20), g.normal(size=20) + 1])
    assert choose_m(lad, "bs")[0] == 0
    with pytest.raises(DomainError):
        choose_m(_ladder([np.zeros(3)]), "dk")
    with pytest.raises(DomainError):
        choose_m(lad, "xx")


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10**6))
def test_distance_matrix_and_rules(k, seed):
    g = np.random.default_rng(seed)
    samples = [g.normal(size=g.integers(3, 15)).round(1) + g.normal() for _ in range(k)]
    D = distance_matrix(samples)
    assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0)
    lad = _ladder(samples)
    for rule in ("bs", "dk"):
        J, m = choose_m(lad, rule)
        assert 0 <= J < k and m == lad.ms[J]
        assert choose_m(lad, rule) == (J, m)
    # relabeling by reversing order keeps the row-sum minimizer when it is unique
    rs = D.sum(axis=1)
    if np.sum(rs == rs.min()) == 1:
        perm = np.arange(k)[::-1]
        assert dette_kroll_index(D[np.ix_(perm, perm)]) == int(np.flatnonzero(perm == np.argmin(rs))[0])


def test_build_ladder_drops_and_diagnostics():
    Y = np.random.default_rng(3).normal(size=(200, 40))
    T = ledoit_wolf_stat(Y)
    with pytest.warns(RuntimeWarning, match="infeasible"):
        lad = build_ladder(Y, LEDOIT_WOLF, T, 20, seed=1)
    assert all(m >= 2 and (m * 40) // 200 >= 1 for m in lad.ms)
    assert len(lad) + len(lad.dropped) == 31
    assert all(len(s) == 20 for s in lad.samples)
    rows = ladder_diagnostics(lad)
    assert [r["m_j"] for r in rows] == lad.ms
    assert np.isnan(rows[-1]["d_consecutive"])
    with pytest.warns(RuntimeWarning):
        again = build_ladder(Y, LEDOIT_WOLF, T, 20, seed=1, workers=4)
    assert all(a.tobytes() == b.tobytes() for a, b in zip(lad.samples, again.samples))
