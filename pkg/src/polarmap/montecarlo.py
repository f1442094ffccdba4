"""Chunked, seed-deterministic Monte Carlo BER estimation.

Frames are processed in fixed-size chunks. Chunk ``j`` draws from its own stream,
``SeedSequence(seed, spawn_key=(j,))``, so totals do not depend on how chunks are
spread over worker processes. Inside a chunk the data words are drawn first and the
channel randomness second, always in channel order, so two permutations evaluated
with the same seed see identical data and identical channel realizations.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channels
from .mapping import as_permutation, identity, invert
from .polar import PolarCode, encode, sc_decode


@dataclass(frozen=True)
class BerEstimate:
    bit_errors: int
    bits_tested: int
    frames: int
    frame_errors: int
    sq_errors: int  # sum over frames of (errors in frame)^2

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_tested if self.bits_tested else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def stderr(self) -> float:
        """Standard error of ``ber`` from the per-frame error counts."""
        if self.frames < 2:
            return 0.0
        k = self.bits_tested / self.frames
        mean = self.bit_errors / self.frames
        var = max(self.sq_errors / self.frames - mean * mean, 0.0) * self.frames / (self.frames - 1)
        return math.sqrt(var / self.frames) / k

    @property
    def half_width_95(self) -> float:
        return 1.959963984540054 * self.stderr

    def __add__(self, other: "BerEstimate") -> "BerEstimate":
        return BerEstimate(
            self.bit_errors + other.bit_errors,
            self.bits_tested + other.bits_tested,
            self.frames + other.frames,
            self.frame_errors + other.frame_errors,
            self.sq_errors + other.sq_errors,
        )

    @classmethod
    def empty(cls) -> "BerEstimate":
        return cls(0, 0, 0, 0, 0)

    @classmethod
    def from_errors(cls, errors_per_frame: np.ndarray, K: int) -> "BerEstimate":
        e = np.asarray(errors_per_frame, dtype=np.int64)
        return cls(
            bit_errors=int(e.sum()),
            bits_tested=int(e.size * K),
            frames=int(e.size),
            frame_errors=int(np.count_nonzero(e)),
            sq_errors=int((e * e).sum()),
        )


def chunk_size_for(N: int) -> int:
    return max(256, (1 << 20) // N)


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(chunk),)))


def chunk_plan(frames: int, N: int) -> list[tuple[int, int]]:
    """``(chunk_index, n_frames)`` pairs covering ``frames``."""
    if frames < 1:
        raise ValueError("frames must be >= 1")
    size = chunk_size_for(N)
    return [(j, min(size, frames - j * size)) for j in range(math.ceil(frames / size))]


def run_chunks(task, args_list, workers: int = 1):
    """Map ``task`` over ``args_list``; results come back in submission order."""
    if workers <= 1 or len(args_list) <= 1:
        return [task(*args) for args in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task, *args) for args in args_list]
        return [f.result() for f in futures]


@dataclass(frozen=True)
class FadingModel:
    """Correlated real slow-fading channel with perfect receiver CSI."""

    N: int
    gamma: float
    f_D: float = 0.01
    sigma_h_sq: float = 1.0

    def __post_init__(self):
        if self.f_D < 0 or self.sigma_h_sq <= 0 or not self.gamma > 0:
            raise ValueError("need f_D >= 0, sigma_h_sq > 0, gamma > 0")


def _bsc_chunk(code, perm, probs, n, seed, chunk, check_node):
    rng = chunk_rng(seed, chunk)
    d = rng.integers(0, 2, size=(n, code.K), dtype=np.uint8)
    cbar = encode(code, d)[:, perm]
    _, llr = channels.bsc_transmit(cbar, probs, rng)
    d_hat = sc_decode(code, llr[:, invert(perm)], check_node=check_node)
    return BerEstimate.from_errors((d_hat != d).sum(axis=1), code.K)


def _fading_chunk(code, perm, model, n, seed, chunk, check_node):
    rng = chunk_rng(seed, chunk)
    d = rng.integers(0, 2, size=(n, code.K), dtype=np.uint8)
    x = channels.bpsk_modulate(encode(code, d)[:, perm])
    L = channels.fading_factor(channels.build_jakes_correlation(code.N, model.f_D))
    h = channels.sample_fading(None, model.sigma_h_sq, rng, size=n, factor=L)
    y = channels.fading_transmit(x, h, model.gamma, rng)
    llr = channels.demodulate_map(y, h, model.gamma)
    d_hat = sc_decode(code, llr[:, invert(perm)], check_node=check_node)
    return BerEstimate.from_errors((d_hat != d).sum(axis=1), code.K)


def estimate_ber(
    code: PolarCode,
    P,
    channel,
    frames: int,
    seed: int,
    workers: int = 1,
    check_node: str = "exact",
) -> BerEstimate:
    """Monte Carlo data-bit error rate of ``code`` mapped by ``P`` onto ``channel``.

    ``channel`` is either a sequence of BSC flip probabilities (one per channel
    position) or a :class:`FadingModel`. ``P=None`` means no mapping.
    """
    perm = identity(code.N) if P is None else as_permutation(P, code.N)
    if isinstance(channel, FadingModel):
        if channel.N != code.N:
            raise ValueError("fading model length does not match the code")
        task, chan = _fading_chunk, channel
    else:
        chan = channels.validate_bsc_profile(channel)
        if chan.size != code.N:
            raise ValueError("BSC profile length does not match the code")
        task = _bsc_chunk
    args = [(code, perm, chan, n, seed, j, check_node) for j, n in chunk_plan(frames, code.N)]
    total = BerEstimate.empty()
    for part in run_chunks(task, args, workers):
        total = total + part
    return total
