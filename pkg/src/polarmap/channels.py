"""Channel models: per-position BSC and BPSK over correlated slow fading.

All soft outputs use ``l = log P(0)/P(1)`` and are clamped to ``[-LLR_CLAMP, LLR_CLAMP]``.
BPSK maps bit 0 to -1 and bit 1 to +1.
"""
from __future__ import annotations

import math

import numpy as np

from .polar import LLR_CLAMP

_SERIES_LIMIT = 12.0


def validate_bsc_profile(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1:
        raise ValueError("BSC profile must be one-dimensional")
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 0.5):
        raise ValueError("flip probabilities must lie in [0, 0.5]")
    return p


def bsc_llr_magnitude(probs) -> np.ndarray:
    """``log((1-p)/p)`` per position, clamped; 0 for p=0.5, the clamp for p=0."""
    p = validate_bsc_profile(probs)
    with np.errstate(divide="ignore"):
        mag = np.log1p(-p) - np.log(p)
    return np.minimum(mag, LLR_CLAMP)


def bsc_transmit(
    cbar: np.ndarray, probs, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Flip bit ``i`` with probability ``probs[i]``; return received bits and LLRs."""
    cbar = np.asarray(cbar, dtype=np.uint8)
    p = validate_bsc_profile(probs)
    if cbar.shape[-1] != p.size:
        raise ValueError(f"codeword length {cbar.shape[-1]} != profile length {p.size}")
    flips = rng.random(cbar.shape) < p
    received = cbar ^ flips.astype(np.uint8)
    llr = (1.0 - 2.0 * received) * bsc_llr_magnitude(p)
    return received, llr


def _j0_series(x: float) -> float:
    half_sq = (x / 2.0) ** 2
    term = 1.0
    total = 1.0
    m = 0
    while abs(term) > 1e-17 * max(1.0, abs(total)):
        m += 1
        term *= -half_sq / (m * m)
        total += term
    return total


def _j0_asymptotic(x: float) -> float:
    # Hankel expansion; terms shrink until k ~ 2x, far past what x >= 12 needs
    p_sum, q_sum = 0.0, 0.0
    term = 1.0
    prev = math.inf
    for k in range(60):
        if k > 0:
            term *= -((2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(term) > prev or abs(term) < 1e-18:
            break
        prev = abs(term)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p_sum += sign * term
        else:
            q_sum += sign * term
    phase = x - math.pi / 4.0
    return math.sqrt(2.0 / (math.pi * x)) * (p_sum * math.cos(phase) - q_sum * math.sin(phase))


def _j0_scalar(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError("bessel_j0 needs a finite argument")
    x = abs(x)
    if x <= _SERIES_LIMIT:
        return _j0_series(x)
    return _j0_asymptotic(x)


def bessel_j0(x):
    """Zeroth-order Bessel function of the first kind (scalar or array)."""
    if np.ndim(x) == 0:
        return _j0_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    return np.vectorize(_j0_scalar, otypes=[float])(arr)


def build_jakes_correlation(N: int, f_D: float) -> np.ndarray:
    """Toeplitz matrix ``R[i, j] = J0(2 pi f_D (i - j))``."""
    if N < 1:
        raise ValueError("N must be positive")
    if not f_D >= 0:
        raise ValueError("f_D must be non-negative")
    lags = np.arange(N)
    first_row = bessel_j0(2.0 * np.pi * f_D * lags)
    return first_row[np.abs(lags[:, None] - lags[None, :])]


def fading_factor(R: np.ndarray) -> np.ndarray:
    """Square-root factor ``L`` with ``L @ L.T == R`` after clipping negative eigenvalues."""
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("correlation matrix must be square")
    if not np.allclose(R, R.T, atol=1e-12):
        raise ValueError("correlation matrix must be symmetric")
    w, V = np.linalg.eigh(R)
    return V * np.sqrt(np.clip(w, 0.0, None))


def sample_fading(
    R: np.ndarray,
    sigma_h_sq: float,
    rng: np.random.Generator,
    size: int | None = None,
    factor: np.ndarray | None = None,
) -> np.ndarray:
    """Draw real channel gains ``h ~ N(0, sigma_h_sq * R)``.

    ``size`` draws a batch of shape ``(size, N)``; ``factor`` reuses a precomputed
    :func:`fading_factor`.
    """
    if sigma_h_sq <= 0:
        raise ValueError("sigma_h_sq must be positive")
    L = fading_factor(R) if factor is None else factor
    N = L.shape[0]
    z = rng.standard_normal((N,) if size is None else (size, N))
    return math.sqrt(sigma_h_sq) * (z @ L.T)


def bpsk_modulate(cbar: np.ndarray) -> np.ndarray:
    c = np.asarray(cbar)
    if np.any((c != 0) & (c != 1)):
        raise ValueError("BPSK input must be binary")
    return 2.0 * c - 1.0


def fading_transmit(
    x: np.ndarray, h: np.ndarray, gamma: float, rng: np.random.Generator
) -> np.ndarray:
    """``y = h * x + n`` with ``n ~ N(0, 1/gamma)``; ``gamma = inf`` is noiseless."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    if x.shape != h.shape:
        raise ValueError("symbols and gains must have the same shape")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    y = h * x
    if math.isinf(gamma):
        return y
    return y + rng.standard_normal(x.shape) / math.sqrt(gamma)


def demodulate_map(y: np.ndarray, h_hat: np.ndarray, gamma: float) -> np.ndarray:
    """MAP soft demodulation, ``l = -2 gamma h_hat y``, clamped."""
    y = np.asarray(y, dtype=float)
    h_hat = np.asarray(h_hat, dtype=float)
    if y.shape != h_hat.shape:
        raise ValueError("received symbols and gain estimates must have the same shape")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    prod = h_hat * y
    if math.isinf(gamma):
        return -LLR_CLAMP * np.sign(prod)
    return np.clip(-2.0 * gamma * prod, -LLR_CLAMP, LLR_CLAMP)
