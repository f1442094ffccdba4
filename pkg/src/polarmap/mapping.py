"""Coded-bit permutation between encoder and channel, and its inverse."""
from __future__ import annotations

from collections.abc import Sequence

import numpy as np


def as_permutation(P: Sequence[int], N: int | None = None) -> np.ndarray:
    """Validate ``P`` as a bijection on ``range(len(P))`` and return it as an int array."""
    arr = np.asarray(P, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("permutation must be one-dimensional")
    if N is not None and arr.size != N:
        raise ValueError(f"permutation has length {arr.size}, expected {N}")
    if not np.array_equal(np.sort(arr), np.arange(arr.size)):
        raise ValueError("permutation is not a bijection")
    return arr


def identity(N: int) -> np.ndarray:
    return np.arange(N, dtype=np.int64)


def apply_mapper(c: np.ndarray, P: Sequence[int]) -> np.ndarray:
    """Output position ``i`` carries input position ``P[i]`` (works on batches)."""
    c = np.asarray(c)
    perm = as_permutation(P, c.shape[-1])
    return c[..., perm]


def invert(P: Sequence[int]) -> np.ndarray:
    perm = as_permutation(P)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def apply_demapper(
    cbar: np.ndarray, llr: np.ndarray, P: Sequence[int]
) -> tuple[np.ndarray, np.ndarray]:
    """Undo :func:`apply_mapper` on received bits and their LLRs."""
    cbar = np.asarray(cbar)
    llr = np.asarray(llr)
    if cbar.shape != llr.shape:
        raise ValueError("bits and LLRs must have the same shape")
    inv = invert(as_permutation(P, cbar.shape[-1]))
    return cbar[..., inv], llr[..., inv]


def demap_llr(llr: np.ndarray, P: Sequence[int]) -> np.ndarray:
    llr = np.asarray(llr)
    return llr[..., invert(as_permutation(P, llr.shape[-1]))]


def selection_to_permutation(sel: Sequence[int], N: int) -> np.ndarray:
    """Put the selected positions first, then the rest in ascending order."""
    chosen = [int(s) for s in sel]
    if len(set(chosen)) != len(chosen):
        raise ValueError(f"duplicate entries in selection {chosen}")
    if any(not 0 <= s < N for s in chosen):
        raise ValueError(f"selection {chosen} out of range for N={N}")
    taken = set(chosen)
    rest = [i for i in range(N) if i not in taken]
    return np.array(chosen + rest, dtype=np.int64)


def format_positions(P: Sequence[int]) -> str:
    """Comma-separated 1-based positions."""
    return ",".join(str(int(p) + 1) for p in P)


def parse_positions(text: str) -> list[int]:
    """Inverse of :func:`format_positions`; returns 0-based positions."""
    text = text.strip()
    if not text:
        return []
    out = []
    for tok in text.split(","):
        value = int(tok)
        if value < 1:
            raise ValueError(f"positions are 1-based, got {value}")
        out.append(value - 1)
    return out
