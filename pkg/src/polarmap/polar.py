"""Polar encoding, information-set construction and LLR-domain SC decoding.

Conventions used throughout the package:

* positions are 0-based internally;
* ``G_N = F^{(x)n}`` with ``F = [[1, 0], [1, 1]]`` and no bit-reversal;
* LLRs follow ``l = log P(bit=0) / P(bit=1)``, so a positive value favours 0;
* a decision on ``l == 0`` yields bit 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from ._sequence import RELIABILITY_1024

LLR_CLAMP = 40.0
CHECK_NODE_RULES = ("exact", "minsum")


def _log2_exact(N: int) -> int:
    if not isinstance(N, (int, np.integer)) or N < 1 or N & (N - 1):
        raise ValueError(f"block length must be a power of two, got {N!r}")
    return int(N).bit_length() - 1


def read_reliability_file() -> list[int]:
    """Read the plain-text copy of the reliability sequence shipped with the package."""
    text = resources.files("polarmap").joinpath("data/reliability_3gpp.txt").read_text()
    return [int(tok) for tok in text.split()]


def load_reliability_order(N: int) -> list[int]:
    """Positions ``0..N-1`` in ascending reliability (least reliable first)."""
    _log2_exact(N)
    if N > len(RELIABILITY_1024):
        raise ValueError(f"block length {N} exceeds the 1024-entry sequence")
    return [q for q in RELIABILITY_1024 if q < N]


@dataclass(frozen=True)
class PolarCode:
    """An (N, K) polar code with its information and frozen sets (both ascending)."""

    N: int
    K: int
    info_set: tuple[int, ...]
    frozen_set: tuple[int, ...]

    @property
    def n(self) -> int:
        return _log2_exact(self.N)

    @property
    def rate(self) -> float:
        return self.K / self.N

    @property
    def frozen_mask(self) -> np.ndarray:
        return _frozen_mask(self.N, self.frozen_set)


@lru_cache(maxsize=None)
def _frozen_mask(N: int, frozen_set: tuple[int, ...]) -> np.ndarray:
    mask = np.zeros(N, dtype=bool)
    mask[list(frozen_set)] = True
    mask.setflags(write=False)
    return mask


def build_code(N: int, K: int) -> PolarCode:
    """Take the K most reliable positions of the length-N 3GPP order as information set."""
    order = load_reliability_order(N)
    if not 1 <= K <= N:
        raise ValueError(f"need 1 <= K <= N, got K={K}, N={N}")
    info = tuple(sorted(order[N - K:]))
    frozen = tuple(sorted(order[: N - K]))
    return PolarCode(N=N, K=K, info_set=info, frozen_set=frozen)


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Compute ``u @ G_N`` over GF(2) along the last axis (butterfly form).

    The transform is its own inverse.
    """
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    _log2_exact(N)
    if np.any(x > 1):
        raise ValueError("input must be binary")
    half = 1
    while half < N:
        view = x.reshape(*x.shape[:-1], N // (2 * half), 2, half)
        view[..., 0, :] ^= view[..., 1, :]
        half *= 2
    return x


def generator_matrix(N: int) -> np.ndarray:
    """Dense ``F^{(x)n}`` as a uint8 matrix."""
    n = _log2_exact(N)
    G = np.ones((1, 1), dtype=np.uint8)
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, F)
    return G


def build_input(code: PolarCode, d: np.ndarray) -> np.ndarray:
    """Place data bits on the information set; frozen positions stay 0."""
    d = np.asarray(d)
    if d.shape[-1] != code.K:
        raise ValueError(f"data word length {d.shape[-1]} != K={code.K}")
    if np.any((d != 0) & (d != 1)):
        raise ValueError("data word must be binary")
    u = np.zeros(d.shape[:-1] + (code.N,), dtype=np.uint8)
    u[..., list(code.info_set)] = d
    return u


def encode(code: PolarCode, d: np.ndarray) -> np.ndarray:
    """Encode data word(s) ``d`` (shape ``(..., K)``) into codeword(s) ``(..., N)``."""
    return polar_transform(build_input(code, d))


def check_node_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # 2 atanh(tanh(a/2) tanh(b/2)) rewritten with log1p so it never overflows
    return (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )


def check_node_minsum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


_CHECK_NODES = {"exact": check_node_exact, "minsum": check_node_minsum}


def _sc_node(llr: np.ndarray, frozen: np.ndarray, f) -> tuple[np.ndarray, np.ndarray]:
    """Decode one subtree. Returns (input bits, re-encoded partial sums)."""
    B, L = llr.shape
    if frozen.all():
        zeros = np.zeros((B, L), dtype=np.uint8)
        return zeros, zeros
    if L == 1:
        u = (llr < 0).astype(np.uint8)
        return u, u
    h = L // 2
    a, b = llr[:, :h], llr[:, h:]
    u_left, x_left = _sc_node(f(a, b), frozen[:h], f)
    u_right, x_right = _sc_node(b + (1.0 - 2.0 * x_left) * a, frozen[h:], f)
    return (
        np.concatenate([u_left, u_right], axis=1),
        np.concatenate([x_left ^ x_right, x_right], axis=1),
    )


def sc_decode(
    code: PolarCode,
    llr: np.ndarray,
    check_node: str = "exact",
    return_input: bool = False,
) -> np.ndarray:
    """Successive cancellation decoding of one or a batch of LLR words.

    Parameters
    ----------
    code : PolarCode
    llr : array, shape ``(N,)`` or ``(B, N)``
        Channel LLRs in codeword order. Must be finite; clamp before calling.
    check_node : {"exact", "minsum"}
    return_input : bool
        Return the full decoded input vector ``u`` instead of the K data bits.

    Returns
    -------
    ndarray of uint8, shape ``(K,)`` / ``(B, K)`` (or ``N`` with ``return_input``).
    """
    if check_node not in _CHECK_NODES:
        raise ValueError(f"unknown check-node rule {check_node!r}")
    llr = np.asarray(llr, dtype=float)
    single = llr.ndim == 1
    llr2 = llr.reshape(1, -1) if single else llr
    if llr2.ndim != 2 or llr2.shape[1] != code.N:
        raise ValueError(f"LLR length {llr.shape[-1]} != N={code.N}")
    if not np.all(np.isfinite(llr2)):
        raise ValueError("LLRs must be finite")
    u_hat, _ = _sc_node(llr2, code.frozen_mask, _CHECK_NODES[check_node])
    out = u_hat if return_input else u_hat[:, list(code.info_set)]
    return out[0] if single else out
