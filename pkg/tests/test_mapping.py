import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarmap.mapping import (
    apply_demapper,
    apply_mapper,
    as_permutation,
    format_positions,
    identity,
    parse_positions,
    selection_to_permutation,
)


def test_identity_mapper_is_noop():
    c = np.array([1, 0, 1, 1], dtype=np.uint8)
    assert np.array_equal(apply_mapper(c, identity(4)), c)
    bits, llr = apply_demapper(c, c * 1.5, identity(4))
    assert np.array_equal(bits, c)
    assert np.array_equal(llr, c * 1.5)


def test_mapper_example():
    P = [3, 0, 1, 2]
    assert list(apply_mapper(np.array([1, 0, 0, 0]), P)) == [0, 1, 0, 0]


def test_demapper_example():
    P = [3, 0, 1, 2]
    a, b, c, d = 1.0, 2.0, 3.0, 4.0
    _, llr = apply_demapper(np.zeros(4), np.array([a, b, c, d]), P)
    assert list(llr) == [b, c, d, a]


def test_round_trip_random():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        N = int(rng.choice([8, 16, 128]))
        c = rng.integers(0, 2, N)
        ell = rng.normal(size=N)
        P = rng.permutation(N)
        bits, llr = apply_demapper(apply_mapper(c, P), apply_mapper(ell, P), P)
        assert np.array_equal(bits, c)
        assert np.array_equal(llr, ell)


@pytest.mark.parametrize("P", [[0, 0, 1, 2], [0, 1, 2], [1, 2, 3, 4]])
def test_non_bijection_rejected(P):
    with pytest.raises(ValueError):
        apply_mapper(np.zeros(4), P)
    with pytest.raises(ValueError):
        apply_demapper(np.zeros(4), np.zeros(4), P)


def test_selection_to_permutation_examples():
    assert list(selection_to_permutation([2], 4)) == [2, 0, 1, 3]
    assert list(selection_to_permutation([5, 11], 16)) == [5, 11, 0, 1, 2, 3, 4, 6, 7, 8, 9, 10, 12, 13, 14, 15]
    assert list(selection_to_permutation([], 6)) == list(range(6))


def test_selection_duplicates_rejected():
    with pytest.raises(ValueError):
        selection_to_permutation([3, 3], 8)


@given(st.data())
def test_selection_gives_valid_permutation(data):
    N = data.draw(st.integers(1, 64))
    sel = data.draw(st.lists(st.integers(0, N - 1), unique=True, max_size=N))
    P = selection_to_permutation(sel, N)
    as_permutation(P, N)
    assert list(P[: len(sel)]) == sel


def test_position_text_is_one_based():
    assert format_positions([5, 11]) == "6,12"
    assert parse_positions("6,12") == [5, 11]
    assert parse_positions("") == []
    with pytest.raises(ValueError):
        parse_positions("0,3")
