"""OFDM-style link simulation over correlated slow fading.

Subcarriers are modelled abstractly as parallel real fading channels. Pilots (+1)
are sent in a preamble over the same fading realization as the codeword, so the
codeword keeps its full length ``N`` and pilot subcarriers get the best estimates.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import channels
from .mapping import as_permutation, identity, invert
from .montecarlo import BerEstimate, FadingModel, chunk_plan, run_chunks
from .polar import PolarCode, encode, sc_decode

TABLE_COLUMNS = ("snr_db", "ber", "errors", "frames", "mapping_label")
H_FLOOR = 1e-12


class EstimatorKind(str, Enum):
    PERFECT = "perfect"
    MMSE = "mmse"
    LINEAR_INTERP = "linear_interp"


@dataclass(frozen=True)
class PilotScheme:
    N: int
    positions: tuple[int, ...]  # 0-based, strictly increasing

    @property
    def V(self) -> int:
        return len(self.positions)

    @property
    def one_based(self) -> tuple[int, ...]:
        return tuple(p + 1 for p in self.positions)


def pilot_positions(N: int, V: int, uniform: bool = False) -> PilotScheme:
    """Pilot set ``{1, s, 2s, ..., (V-1)s}`` (1-based) with ``s = N // V``.

    ``uniform=True`` gives ``{1, 1+s, ..., 1+(V-1)s}`` instead.
    """
    if not 1 <= V <= N:
        raise ValueError(f"need 1 <= V <= N, got V={V}, N={N}")
    s = N // V
    if uniform:
        one_based = [1 + k * s for k in range(V)]
    else:
        one_based = sorted({1} | {k * s for k in range(1, V)})
    if len(one_based) < V:
        raise ValueError(f"pilot formula collapses to {len(one_based)} < V={V} positions")
    return PilotScheme(N, tuple(p - 1 for p in one_based))


@dataclass(frozen=True)
class SnrSweep:
    snr_db: tuple[float, ...]
    frames: int
    noiseless: bool = False

    def __post_init__(self):
        if not self.snr_db or self.frames < 1:
            raise ValueError("sweep needs at least one SNR point and frames >= 1")

    def gammas(self) -> list[float]:
        if self.noiseless:
            return [math.inf] * len(self.snr_db)
        return [10.0 ** (s / 10.0) for s in self.snr_db]


DEFAULT_SNR_DB = tuple(float(s) for s in range(0, 21, 2))


def estimator_matrix(
    kind: EstimatorKind | str,
    scheme: PilotScheme,
    R: np.ndarray,
    gamma: float,
    sigma_h_sq: float = 1.0,
) -> np.ndarray | None:
    """``W`` such that ``h_hat = W @ y_pilots``; ``None`` for perfect knowledge."""
    kind = EstimatorKind(kind)
    S = list(scheme.positions)
    N = scheme.N
    if kind is EstimatorKind.PERFECT:
        return None
    if kind is EstimatorKind.LINEAR_INTERP:
        W = np.zeros((N, len(S)))
        # np.interp holds the end pilots beyond the pilot span
        for k in range(len(S)):
            unit = np.zeros(len(S))
            unit[k] = 1.0
            W[:, k] = np.interp(np.arange(N), S, unit)
        return W
    R = np.asarray(R, dtype=float)
    C = sigma_h_sq * R
    C_ps = C[:, S]
    C_ss = C[np.ix_(S, S)]
    if math.isinf(gamma):
        # C = L L^T; pinv on the factor keeps the condition number at sqrt(cond C)
        L = channels.fading_factor(C)
        return L @ np.linalg.pinv(L[S])
    return np.linalg.solve(C_ss + np.eye(len(S)) / gamma, C_ps.T).T


def estimate_channel(
    kind: EstimatorKind | str,
    y: np.ndarray,
    h_true: np.ndarray,
    scheme: PilotScheme,
    R: np.ndarray,
    gamma: float,
    sigma_h_sq: float = 1.0,
    W: np.ndarray | None = None,
) -> np.ndarray:
    """Estimate the gains on all subcarriers from the received preamble ``y``.

    ``y`` holds the preamble observation on every subcarrier (only pilot
    positions are used); batches of shape ``(B, N)`` are supported.
    """
    kind = EstimatorKind(kind)
    if kind is EstimatorKind.PERFECT:
        return np.array(h_true, dtype=float, copy=True)
    if W is None:
        W = estimator_matrix(kind, scheme, R, gamma, sigma_h_sq)
    y_p = np.asarray(y, dtype=float)[..., list(scheme.positions)]
    return y_p @ W.T


def selection_to_subcarrier_permutation(sel, scheme: PilotScheme) -> np.ndarray:
    """Permutation placing the selected coded bits on the pilot subcarriers.

    Selected bit ``k`` rides pilot subcarrier ``S[k]``; remaining coded bits fill the
    remaining subcarriers in ascending order.
    """
    sel = [int(s) for s in sel]
    if len(sel) > scheme.V:
        raise ValueError("more selected bits than pilot subcarriers")
    if len(set(sel)) != len(sel):
        raise ValueError("duplicate entries in selection")
    N = scheme.N
    P = np.full(N, -1, dtype=np.int64)
    P[list(scheme.positions[: len(sel)])] = sel
    rest_bits = iter(b for b in range(N) if b not in set(sel))
    for i in range(N):
        if P[i] < 0:
            P[i] = next(rest_bits)
    return as_permutation(P, N)


def _rng(seed: int, point: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(point), int(chunk))))


def _link_chunk(code, perm, L, W, pilots, gamma, sigma_h_sq, n, seed, point, chunk, check_node):
    rng = _rng(seed, point, chunk)
    N = code.N
    d = rng.integers(0, 2, size=(n, code.K), dtype=np.uint8)
    x = channels.bpsk_modulate(encode(code, d)[:, perm])
    h = channels.sample_fading(None, sigma_h_sq, rng, size=n, factor=L)
    y_pre = channels.fading_transmit(np.ones((n, N)), h, gamma, rng)
    y = channels.fading_transmit(x, h, gamma, rng)
    h_hat = h if W is None else y_pre[:, list(pilots)] @ W.T
    llr = channels.demodulate_map(y, h_hat, gamma)
    d_hat = sc_decode(code, llr[:, invert(perm)], check_node=check_node)
    return BerEstimate.from_errors((d_hat != d).sum(axis=1), code.K)


@dataclass
class SweepRow:
    snr_db: float
    estimate: BerEstimate
    label: str

    def as_dict(self) -> dict:
        return {
            "snr_db": f"{self.snr_db:g}",
            "ber": repr(self.estimate.ber),
            "errors": self.estimate.bit_errors,
            "frames": self.estimate.frames,
            "mapping_label": self.label,
        }


def run_link_sim(
    code: PolarCode,
    P,
    model: FadingModel,
    scheme: PilotScheme,
    kind: EstimatorKind | str,
    sweep: SnrSweep,
    seed: int,
    label: str = "",
    workers: int = 1,
    check_node: str = "exact",
) -> list[SweepRow]:
    """BER versus SNR with pilot-based channel estimation and MAP demodulation."""
    if model.N != code.N or scheme.N != code.N:
        raise ValueError("code, fading model and pilot scheme must share N")
    perm = identity(code.N) if P is None else as_permutation(P, code.N)
    R = channels.build_jakes_correlation(code.N, model.f_D)
    L = channels.fading_factor(R)
    rows = []
    for point, (snr_db, gamma) in enumerate(zip(sweep.snr_db, sweep.gammas())):
        W = estimator_matrix(kind, scheme, R, gamma, model.sigma_h_sq)
        args = [
            (code, perm, L, W, scheme.positions, gamma, model.sigma_h_sq, n, seed, point, j, check_node)
            for j, n in chunk_plan(sweep.frames, code.N)
        ]
        total = BerEstimate.empty()
        for part in run_chunks(_link_chunk, args, workers):
            total = total + part
        rows.append(SweepRow(snr_db, total, label))
    return rows


def _sorted_chunk(code, perm, L, gamma, sigma_h_sq, n, seed, point, chunk, check_node):
    rng = _rng(seed, point, chunk)
    N = code.N
    d = rng.integers(0, 2, size=(n, code.K), dtype=np.uint8)
    c = encode(code, d)
    h = channels.sample_fading(None, sigma_h_sq, rng, size=n, factor=L)
    h = np.where(np.abs(h) < H_FLOOR, np.where(h < 0, -H_FLOOR, H_FLOOR), h)
    # slot i is the i-th weakest subcarrier of this realization
    order = np.argsort(h * h, axis=1, kind="stable")
    h_slot = np.take_along_axis(h, order, axis=1)
    x_slot = channels.bpsk_modulate(c[:, perm])
    y_slot = channels.fading_transmit(x_slot, h_slot, gamma, rng)
    equalized = y_slot / h_slot
    llr_slot = channels.demodulate_map(equalized, h_slot * h_slot, gamma)
    d_hat = sc_decode(code, llr_slot[:, invert(perm)], check_node=check_node)
    return BerEstimate.from_errors((d_hat != d).sum(axis=1), code.K)


def run_sorted_sim(
    code: PolarCode,
    P2,
    model: FadingModel,
    sweep: SnrSweep,
    seed: int,
    label: str = "",
    workers: int = 1,
    check_node: str = "exact",
) -> list[SweepRow]:
    """BER versus SNR when coded bit ``P2[i]`` rides the i-th least reliable subcarrier.

    The channel is known at both ends and re-sorted for every fading realization.
    """
    if model.N != code.N:
        raise ValueError("code and fading model must share N")
    perm = as_permutation(P2, code.N)
    L = channels.fading_factor(channels.build_jakes_correlation(code.N, model.f_D))
    rows = []
    for point, (snr_db, gamma) in enumerate(zip(sweep.snr_db, sweep.gammas())):
        args = [
            (code, perm, L, gamma, model.sigma_h_sq, n, seed, point, j, check_node)
            for j, n in chunk_plan(sweep.frames, code.N)
        ]
        total = BerEstimate.empty()
        for part in run_chunks(_sorted_chunk, args, workers):
            total = total + part
        rows.append(SweepRow(snr_db, total, label))
    return rows


def write_table_csv(path, rows: list[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TABLE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row.as_dict())
