"""Finding important coded bits and good permutations on BSC profiles."""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .mapping import format_positions, identity, selection_to_permutation
from .montecarlo import BerEstimate, estimate_ber
from .polar import build_code
from .surrogate import PermutationSpace, SelectionSpace, SurrogateResult, surrogate_optimize

LOG_COLUMNS = ("candidate", "ber", "errors", "frames", "seed")


@dataclass(frozen=True)
class SearchBudget:
    max_evaluations: int
    frames_per_evaluation: int
    master_seed: int

    def __post_init__(self):
        if self.max_evaluations < 1 or self.frames_per_evaluation < 1:
            raise ValueError("budget counts must be positive")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    @property
    def crn_seed(self) -> int:
        """Seed shared by every candidate evaluation (common random numbers)."""
        return int(np.random.SeedSequence(self.master_seed).generate_state(1)[0])


def two_level_profile(N: int, V: int, p: float) -> np.ndarray:
    """Perfect channels on the first ``V`` positions, flip probability ``p`` elsewhere."""
    if not 0 <= V <= N:
        raise ValueError(f"need 0 <= V <= N, got V={V}")
    if not 0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 0.5]")
    probs = np.full(N, float(p))
    probs[:V] = 0.0
    return probs


def ramp_profile(N: int) -> np.ndarray:
    """Flip probabilities falling from 0.5 to 0 in equal steps."""
    if N < 2:
        raise ValueError("ramp profile needs N >= 2")
    i = np.arange(1, N + 1)
    return 0.5 * (N - i) / (N - 1)


@dataclass
class SelectionRow:
    selection: tuple[int, ...]
    estimate: BerEstimate


@dataclass
class BruteForceResult:
    best: tuple[int, ...]
    table: list[SelectionRow]

    @property
    def ranked(self) -> list[SelectionRow]:
        return sorted(self.table, key=lambda r: (r.estimate.bit_errors, r.selection))

    @property
    def best_ber(self) -> float:
        return min(r.estimate.ber for r in self.table)

    @property
    def gain(self) -> float:
        """Worst over best BER across the table."""
        bers = [r.estimate.ber for r in self.table]
        return max(bers) / min(bers) if min(bers) > 0 else math.inf

    def rank_of(self, selection) -> int:
        """1-based rank of a selection (order inside the selection ignored)."""
        key = frozenset(selection)
        for rank, row in enumerate(self.ranked, start=1):
            if frozenset(row.selection) == key:
                return rank
        raise KeyError(selection)


def brute_force_select(
    N: int, K: int, V: int, p: float, budget: SearchBudget, workers: int = 1
) -> BruteForceResult:
    """Score every V-subset placed on the perfect channels of the two-level profile."""
    count = math.comb(N, V)
    if count > budget.max_evaluations:
        raise ValueError(f"{count} combinations exceed max_evaluations={budget.max_evaluations}")
    code = build_code(N, K)
    probs = two_level_profile(N, V, p)
    seed = budget.crn_seed
    table = []
    for sel in itertools.combinations(range(N), V):
        est = estimate_ber(
            code, selection_to_permutation(sel, N), probs,
            budget.frames_per_evaluation, seed, workers=workers,
        )
        table.append(SelectionRow(sel, est))
    best = min(table, key=lambda r: (r.estimate.bit_errors, r.selection)).selection
    return BruteForceResult(best, table)


class _BerObjective:
    """Deterministic BER objective that also keeps the full estimates for logging."""

    def __init__(self, code, probs, frames, seed, to_perm, workers=1):
        self.code, self.probs, self.frames, self.seed = code, probs, frames, seed
        self.to_perm = to_perm
        self.workers = workers
        self.records: dict[tuple[int, ...], BerEstimate] = {}

    def __call__(self, point):
        est = estimate_ber(
            self.code, self.to_perm(point), self.probs, self.frames, self.seed, workers=self.workers
        )
        self.records[point] = est
        return est.ber


@dataclass
class SurrogateSearch:
    result: SurrogateResult
    estimates: dict[tuple[int, ...], BerEstimate]
    seed: int

    @property
    def best_point(self):
        return self.result.best_point

    @property
    def best_ber(self) -> float:
        return self.result.best_value

    def log_rows(self):
        for entry in self.result.log:
            est = self.estimates[entry.point]
            yield {
                "candidate": format_positions(entry.point),
                "ber": repr(est.ber),
                "errors": est.bit_errors,
                "frames": est.frames,
                "seed": self.seed,
            }


def surrogate_select(
    N: int, K: int, V: int, p: float, budget: SearchBudget, workers: int = 1
) -> SurrogateSearch:
    """Surrogate search for the V coded bits to put on the perfect channels."""
    code = build_code(N, K)
    probs = two_level_profile(N, V, p)
    seed = budget.crn_seed
    obj = _BerObjective(
        code, probs, budget.frames_per_evaluation, seed,
        lambda sel: selection_to_permutation(sel, N), workers,
    )
    result = surrogate_optimize(obj, SelectionSpace(N, V), budget.max_evaluations, budget.master_seed)
    return SurrogateSearch(result, obj.records, seed)


def optimize_permutation(
    N: int, K: int, budget: SearchBudget, workers: int = 1, include_identity: bool = True
) -> SurrogateSearch:
    """Surrogate search for the coded-bit permutation that minimizes BER on the ramp."""
    code = build_code(N, K)
    probs = ramp_profile(N)
    seed = budget.crn_seed
    obj = _BerObjective(
        code, probs, budget.frames_per_evaluation, seed, lambda perm: np.asarray(perm), workers
    )
    start = [tuple(identity(N))] if include_identity else []
    result = surrogate_optimize(
        obj, PermutationSpace(N), budget.max_evaluations, budget.master_seed, initial_points=start
    )
    return SurrogateSearch(result, obj.records, seed)


def write_log_csv(path, search: SurrogateSearch) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=LOG_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(search.log_rows())
