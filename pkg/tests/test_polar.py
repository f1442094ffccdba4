import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import gf2_encode, gf2_generator, prob_sc_decode
from polarmap._sequence import RELIABILITY_1024
from polarmap.polar import (
    LLR_CLAMP,
    build_code,
    encode,
    generator_matrix,
    load_reliability_order,
    polar_transform,
    read_reliability_file,
    sc_decode,
)


def test_reliability_small_orders():
    assert load_reliability_order(2) == [0, 1]
    assert load_reliability_order(16) == [0, 1, 2, 4, 8, 3, 5, 9, 6, 10, 12, 7, 11, 13, 14, 15]


def test_reliability_full_sequence_and_data_file():
    full = load_reliability_order(1024)
    assert full == list(RELIABILITY_1024)
    assert sorted(full) == list(range(1024))
    assert read_reliability_file() == full


@pytest.mark.parametrize("N", [3, 12, 0, 2048])
def test_reliability_rejects_bad_length(N):
    with pytest.raises(ValueError):
        load_reliability_order(N)


@pytest.mark.parametrize("N", [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024])
def test_reliability_is_filtered_universal_sequence(N):
    order = load_reliability_order(N)
    assert order == [q for q in RELIABILITY_1024 if q < N]
    assert len(order) == N


def test_build_code_examples():
    assert build_code(16, 3).info_set == (13, 14, 15)
    assert build_code(16, 4).info_set == (11, 13, 14, 15)
    assert build_code(2, 2).info_set == (0, 1)
    assert build_code(2, 2).frozen_set == ()


@pytest.mark.parametrize("N,K", [(16, 0), (16, 17), (12, 3)])
def test_build_code_rejects_invalid(N, K):
    with pytest.raises(ValueError):
        build_code(N, K)


@given(n=st.integers(1, 10), data=st.data())
def test_info_sets_are_nested(n, data):
    N = 2**n
    K = data.draw(st.integers(1, N - 1))
    small, big = build_code(N, K), build_code(N, K + 1)
    assert set(small.info_set) < set(big.info_set)
    assert set(small.info_set).isdisjoint(small.frozen_set)
    assert set(small.info_set) | set(small.frozen_set) == set(range(N))


def test_encode_examples():
    code = build_code(8, 4)
    assert not encode(code, np.zeros(4, dtype=np.uint8)).any()
    assert list(polar_transform(np.array([0, 0, 0, 1]))) == [1, 1, 1, 1]


def test_encode_rejects_wrong_length():
    with pytest.raises(ValueError):
        encode(build_code(8, 4), np.zeros(3, dtype=np.uint8))


@pytest.mark.parametrize("N", [2, 4, 8, 16, 32, 64, 128, 256])
def test_generator_is_an_involution(N):
    G = generator_matrix(N).astype(np.int64)
    assert np.array_equal((G @ G) % 2, np.eye(N, dtype=np.int64))
    assert np.array_equal(G, gf2_generator(N))


def test_transform_matches_matrix_product_and_self_inverse():
    rng = np.random.default_rng(0)
    for _ in range(50):
        u = rng.integers(0, 2, 8)
        c = polar_transform(u)
        assert np.array_equal(c, gf2_encode(u))
        assert np.array_equal(polar_transform(c), u)


def test_transform_batches_rows_independently():
    rng = np.random.default_rng(1)
    u = rng.integers(0, 2, (20, 32)).astype(np.uint8)
    c = polar_transform(u)
    for row_u, row_c in zip(u, c):
        assert np.array_equal(row_c, gf2_encode(row_u))


def test_sc_all_positive_llrs_give_zeros():
    code = build_code(16, 8)
    assert not sc_decode(code, np.full(16, LLR_CLAMP)).any()


@pytest.mark.parametrize("rule", ["exact", "minsum"])
def test_sc_noiseless_exactness(rule):
    rng = np.random.default_rng(2)
    for _ in range(1000):
        N = int(rng.choice([4, 8, 16, 32]))
        K = int(rng.integers(1, N + 1))
        code = build_code(N, K)
        d = rng.integers(0, 2, K).astype(np.uint8)
        llr = LLR_CLAMP * (1.0 - 2.0 * encode(code, d))
        assert np.array_equal(sc_decode(code, llr, check_node=rule), d)


def test_sc_matches_probability_domain_oracle():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        N = int(rng.choice([4, 8, 16]))
        K = int(rng.integers(1, N + 1))
        code = build_code(N, K)
        llr = rng.normal(0.0, 3.0, N)
        u_hat = sc_decode(code, llr, return_input=True)
        expected = prob_sc_decode(llr, code.frozen_set)
        assert np.array_equal(u_hat, expected), (N, K, llr)
        assert not u_hat[list(code.frozen_set)].any()


def test_sc_batch_matches_single_rows():
    rng = np.random.default_rng(4)
    code = build_code(32, 12)
    llr = rng.normal(0.0, 2.0, (50, 32))
    batch = sc_decode(code, llr)
    assert batch.shape == (50, 12)
    for row, out in zip(llr, batch):
        assert np.array_equal(sc_decode(code, row), out)


def test_sc_zero_llr_ties_decode_to_zero():
    code = build_code(16, 16)
    assert not sc_decode(code, np.zeros(16)).any()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-60, 60), min_size=16, max_size=16))
def test_sc_frozen_bits_always_zero(values):
    code = build_code(16, 5)
    llr = np.clip(values, -LLR_CLAMP, LLR_CLAMP)
    u_hat = sc_decode(code, llr, return_input=True)
    assert not u_hat[list(code.frozen_set)].any()


def test_sc_rejects_bad_input():
    code = build_code(8, 4)
    with pytest.raises(ValueError):
        sc_decode(code, np.zeros(7))
    with pytest.raises(ValueError):
        sc_decode(code, np.array([np.inf] + [0.0] * 7))
    with pytest.raises(ValueError):
        sc_decode(code, np.zeros(8), check_node="bp")
