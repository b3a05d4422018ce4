from __future__ import annotations

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from mnpboot.rng import child_seed, fresh_seed, parallel_map, stream


@given(st.integers(0, 2**128), st.text(max_size=8), st.lists(st.integers(0, 2**40), max_size=3))
def test_stream_reproducible(seed, tag, index):
    a = stream(seed, tag, *index).integers(0, 2**62, 4)
    b = stream(seed, tag, *index).integers(0, 2**62, 4)
    assert np.array_equal(a, b)


def test_streams_distinct():
    draws = {tuple(stream(1, t, i).integers(0, 2**62, 2)) for t in ("rows", "projection") for i in range(50)}
    assert len(draws) == 100
    assert child_seed(1, "data", 0) != child_seed(1, "data", 1)
    assert child_seed(1, "data", 0) == child_seed(1, "data", 0)
    assert 0 <= child_seed(5, "x") < 2**64


def test_fresh_seed_varies():
    assert len({fresh_seed() for _ in range(5)}) == 5


def test_parallel_map_order():
    items = list(range(40))
    assert parallel_map(lambda x: x * x, items, 1) == parallel_map(lambda x: x * x, items, 7)
