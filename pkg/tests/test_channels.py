import math

import numpy as np
import pytest
from scipy.stats import norm

from oracles import bisect_root, j0_series
from polarmap.channels import (
    bessel_j0,
    bpsk_modulate,
    bsc_transmit,
    build_jakes_correlation,
    demodulate_map,
    fading_factor,
    fading_transmit,
    sample_fading,
)
from polarmap.polar import LLR_CLAMP

J0_FIRST_ROOT = bisect_root(j0_series, 2.0, 3.0)


def test_bsc_perfect_channel():
    rng = np.random.default_rng(0)
    c = np.array([0, 1, 1, 0, 1], dtype=np.uint8)
    received, llr = bsc_transmit(c, np.zeros(5), rng)
    assert np.array_equal(received, c)
    assert list(llr) == [40.0, -40.0, -40.0, 40.0, -40.0]


def test_bsc_useless_channel_gives_zero_llrs():
    rng = np.random.default_rng(0)
    _, llr = bsc_transmit(np.ones(8, dtype=np.uint8), np.full(8, 0.5), rng)
    assert not llr.any()


def test_bsc_llr_closed_form():
    rng = np.random.default_rng(0)
    received, llr = bsc_transmit(np.ones((2000, 1), dtype=np.uint8), [0.2], rng)
    ones = received[:, 0] == 1
    assert np.allclose(llr[ones, 0], -math.log(4.0))
    assert np.allclose(llr[~ones, 0], math.log(4.0))
    assert llr[ones, 0][0] == pytest.approx(-1.386294, abs=1e-6)


@pytest.mark.parametrize("p", [[-0.1], [0.6], [np.nan]])
def test_bsc_rejects_bad_probabilities(p):
    with pytest.raises(ValueError):
        bsc_transmit(np.zeros(1, dtype=np.uint8), p, np.random.default_rng(0))


def test_bsc_flip_rate_calibration():
    rng = np.random.default_rng(1)
    probs = np.array([0.0, 0.01, 0.1, 0.2, 0.35, 0.5])
    frames = 100_000
    received, _ = bsc_transmit(np.zeros((frames, probs.size), dtype=np.uint8), probs, rng)
    rate = received.mean(axis=0)
    se = np.sqrt(probs * (1 - probs) / frames)
    assert np.all(np.abs(rate - probs) <= 3 * se + 1e-12)


def test_bsc_llr_sign_matches_likelihood():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        p = rng.uniform(0.0, 0.5)
        bit = rng.integers(0, 2, dtype=np.uint8)
        r, llr = bsc_transmit(np.array([bit]), [p], rng)
        like0 = 1 - p if r[0] == 0 else p
        like1 = p if r[0] == 0 else 1 - p
        assert np.sign(llr[0]) == np.sign(like0 - like1)
        assert abs(llr[0]) <= LLR_CLAMP


def test_j0_examples():
    assert bessel_j0(0.0) == 1.0
    assert bessel_j0(1.0) == pytest.approx(j0_series(1.0), abs=1e-12)
    assert bessel_j0(1.0) == pytest.approx(0.7651977, abs=1e-6)
    assert J0_FIRST_ROOT == pytest.approx(2.404826, abs=1e-6)
    assert bessel_j0(2.404826) == pytest.approx(0.0, abs=1e-5)


def test_j0_grid_accuracy():
    grid = np.linspace(-100.0, 100.0, 1000)
    ours = bessel_j0(grid)
    ref = np.array([j0_series(x, digits=90) for x in grid])
    assert np.max(np.abs(ours - ref)) <= 1e-7


def test_j0_rejects_non_finite():
    with pytest.raises(ValueError):
        bessel_j0(float("nan"))
    with pytest.raises(ValueError):
        bessel_j0(np.array([1.0, np.inf]))


def test_jakes_matrix_properties():
    assert np.array_equal(build_jakes_correlation(5, 0.0), np.ones((5, 5)))
    R = build_jakes_correlation(12, 0.07)
    assert np.array_equal(np.diag(R), np.ones(12))
    assert np.array_equal(R, R.T)
    R2 = build_jakes_correlation(2, J0_FIRST_ROOT / (2 * math.pi))
    assert R2[0, 1] == pytest.approx(0.0, abs=1e-5)


def test_fading_independent_covariance():
    rng = np.random.default_rng(3)
    h = sample_fading(np.eye(4), 2.0, rng, size=100_000)
    cov = np.cov(h, rowvar=False)
    assert np.allclose(cov, 2.0 * np.eye(4), atol=0.1)
    se = np.sqrt(2.0 / h.shape[0])
    assert np.all(np.abs(h.mean(axis=0)) <= 3 * se)


def test_fading_rank_one_is_constant_across_positions():
    rng = np.random.default_rng(4)
    h = sample_fading(np.ones((6, 6)), 1.0, rng, size=10)
    assert np.allclose(h, h[:, :1])


def test_fading_adjacent_correlation_follows_jakes():
    rng = np.random.default_rng(5)
    R = build_jakes_correlation(16, 0.01)
    h = sample_fading(R, 1.0, rng, size=100_000)
    emp = np.corrcoef(h[:, 3], h[:, 4])[0, 1]
    assert emp == pytest.approx(j0_series(2 * math.pi * 0.01), abs=0.02)


def test_fading_clips_negative_eigenvalues():
    rng = np.random.default_rng(6)
    R = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
    w, V = np.linalg.eigh(R)
    assert w.min() < 0
    A = fading_factor(R)
    assert np.allclose(A @ A.T, (V * np.clip(w, 0, None)) @ V.T, atol=1e-12)
    h = sample_fading(R, 1.0, rng, size=3)
    assert np.all(np.isfinite(h))


def test_jakes_round_off_negatives_are_harmless():
    R = build_jakes_correlation(128, 0.02)
    A = fading_factor(R)
    assert np.all(np.isfinite(A))
    assert np.allclose(A @ A.T, R, atol=1e-9)


def test_fading_rejects_asymmetric():
    with pytest.raises(ValueError):
        sample_fading(np.array([[1.0, 0.5], [0.0, 1.0]]), 1.0, np.random.default_rng(0))


def test_bpsk():
    assert list(bpsk_modulate(np.zeros(3))) == [-1, -1, -1]
    assert list(bpsk_modulate(np.ones(3))) == [1, 1, 1]
    assert list(bpsk_modulate(np.array([0, 1, 0]))) == [-1, 1, -1]
    with pytest.raises(ValueError):
        bpsk_modulate(np.array([0, 2]))


def test_fading_transmit_noiseless_and_noise_law():
    rng = np.random.default_rng(7)
    x = bpsk_modulate(rng.integers(0, 2, 10))
    h = rng.normal(size=10)
    assert np.array_equal(fading_transmit(x, h, math.inf, rng), h * x)
    assert fading_transmit(np.array([1.0]), np.array([2.0]), math.inf, rng)[0] == 2.0
    ones = np.ones(1_000_000)
    y = fading_transmit(ones, ones, 4.0, rng)
    assert np.var(y - ones) == pytest.approx(0.25, rel=0.01)


def test_demodulate_examples():
    assert demodulate_map(np.array([0.5]), np.array([1.0]), 1.0)[0] == pytest.approx(-1.0)
    assert demodulate_map(np.array([0.7]), np.array([0.0]), 3.0)[0] == 0.0
    assert demodulate_map(np.array([1.3]), np.array([1.3]), 1e4)[0] == -LLR_CLAMP


def test_demodulate_sign_matches_gaussian_likelihoods():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        gamma = 10 ** rng.uniform(-1, 1)
        h = rng.normal()
        y = rng.normal(scale=2.0)
        sd = 1 / math.sqrt(gamma)
        log_ratio = norm.logpdf(y, loc=-h, scale=sd) - norm.logpdf(y, loc=h, scale=sd)
        llr = demodulate_map(np.array([y]), np.array([h]), gamma)[0]
        assert np.sign(llr) == np.sign(log_ratio)
        if abs(log_ratio) < LLR_CLAMP:
            assert llr == pytest.approx(log_ratio, rel=1e-9, abs=1e-12)
