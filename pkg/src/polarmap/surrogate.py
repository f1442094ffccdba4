"""Radial-basis-function surrogate minimization over discrete search spaces.

Points are searched as real vectors and decoded into discrete objects:

* :class:`SelectionSpace` rounds each coordinate to a position and repairs duplicates;
* :class:`PermutationSpace` uses random keys, the permutation being the sort order.

The loop is the usual stochastic-RBF scheme: a Latin-hypercube start, a cubic RBF
with linear tail fitted to everything evaluated so far, Gaussian perturbations of the
incumbent as candidates, and a candidate score that blends the surrogate prediction
with the distance to evaluated points under a cycling weight.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RBFInterpolator
from scipy.stats import qmc

WEIGHT_CYCLE = (0.3, 0.5, 0.8, 0.95)


class SelectionSpace:
    """Ordered selections of ``V`` distinct positions out of ``N``."""

    def __init__(self, N: int, V: int):
        if not 1 <= V <= N:
            raise ValueError(f"need 1 <= V <= N, got V={V}, N={N}")
        self.N, self.V = N, V
        self.dim = V
        self.lower = np.full(V, -0.5)
        self.upper = np.full(V, N - 0.5)

    def decode(self, x: np.ndarray) -> tuple[int, ...]:
        idx = np.clip(np.rint(x), 0, self.N - 1).astype(int)
        taken: set[int] = set()
        out = []
        for value, raw in zip(idx, x):
            if value in taken:
                free = [i for i in range(self.N) if i not in taken]
                value = min(free, key=lambda i: (abs(i - raw), i))
            taken.add(int(value))
            out.append(int(value))
        return tuple(out)

    def encode(self, point: Sequence[int]) -> np.ndarray:
        return np.asarray(point, dtype=float)


class PermutationSpace:
    """Permutations of ``range(N)`` via random keys in ``[0, 1]^N``."""

    def __init__(self, N: int):
        if N < 1:
            raise ValueError("N must be positive")
        self.N = N
        self.dim = N
        self.lower = np.zeros(N)
        self.upper = np.ones(N)

    def decode(self, x: np.ndarray) -> tuple[int, ...]:
        return tuple(int(i) for i in np.argsort(x, kind="stable"))

    def encode(self, point: Sequence[int]) -> np.ndarray:
        keys = np.empty(self.N)
        keys[np.asarray(point, dtype=int)] = (np.arange(self.N) + 0.5) / self.N
        return keys


@dataclass
class Evaluation:
    index: int
    point: tuple[int, ...]
    value: float
    best_value: float


@dataclass
class SurrogateResult:
    best_point: tuple[int, ...]
    best_value: float
    log: list[Evaluation] = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return len(self.log)


def _scaled(v: np.ndarray) -> np.ndarray:
    span = v.max() - v.min()
    return np.zeros_like(v) if span <= 0 else (v - v.min()) / span


def surrogate_optimize(
    objective: Callable[[tuple[int, ...]], float],
    space,
    max_evaluations: int,
    seed: int,
    initial_points: Sequence[Sequence[int]] = (),
    n_candidates: int | None = None,
    callback: Callable[[Evaluation], None] | None = None,
) -> SurrogateResult:
    """Minimize ``objective`` over the decoded points of ``space``.

    ``objective`` is called once per distinct decoded point and must be
    deterministic (evaluate with common random numbers). ``initial_points`` are
    decoded objects placed ahead of the Latin-hypercube design. Stops after
    ``max_evaluations`` objective calls, or earlier if the space is exhausted.
    """
    if max_evaluations < 1:
        raise ValueError("max_evaluations must be >= 1")
    rng = np.random.default_rng(seed)
    dim = space.dim
    width = space.upper - space.lower
    n_cand = n_candidates or min(100 * dim, 2000)

    X: list[np.ndarray] = []
    fvals: list[float] = []
    seen: dict[tuple[int, ...], float] = {}
    log: list[Evaluation] = []
    best_point: tuple[int, ...] | None = None
    best_value = math.inf

    def evaluate(x: np.ndarray) -> bool:
        nonlocal best_point, best_value
        point = space.decode(x)
        if point in seen:
            return False
        value = float(objective(point))
        if not math.isfinite(value):
            raise ValueError(f"objective returned {value} at {point}")
        seen[point] = value
        X.append(np.asarray(x, dtype=float))
        fvals.append(value)
        if value < best_value:
            best_point, best_value = point, value
        entry = Evaluation(len(log), point, value, best_value)
        log.append(entry)
        if callback is not None:
            callback(entry)
        return True

    n_init = min(2 * dim + 2, max_evaluations)
    for point in initial_points:
        if len(log) >= n_init:
            break
        evaluate(space.encode(point))
    design = qmc.LatinHypercube(d=dim, seed=rng).random(n_init)
    for u in design:
        if len(log) >= n_init:
            break
        evaluate(space.lower + u * width)

    sigma = 0.2
    sigma_min = 0.2 * 0.5**6
    fail_tol, succ_tol = max(3, min(dim, 8)), 3
    fails = succs = 0
    stalls = 0
    it = 0
    while len(log) < max_evaluations and stalls < 50:
        w = WEIGHT_CYCLE[it % len(WEIGHT_CYCLE)]
        it += 1
        Xa = np.array(X)
        fa = np.array(fvals)
        x_best = Xa[int(np.argmin(fa))]

        prob = min(1.0, 20.0 / dim)
        mask = rng.random((n_cand, dim)) < prob
        empty = ~mask.any(axis=1)
        mask[empty, rng.integers(0, dim, empty.sum())] = True
        step = rng.normal(0.0, sigma, (n_cand, dim)) * width
        cand = np.clip(x_best + np.where(mask, step, 0.0), space.lower, space.upper)

        if len(X) > dim + 1:
            rbf = RBFInterpolator(Xa, fa, kernel="cubic", degree=1, smoothing=1e-9)
            pred = rbf(cand)
        else:
            pred = np.zeros(n_cand)
        dists = np.sqrt(((cand[:, None, :] - Xa[None, :, :]) ** 2).sum(-1)).min(axis=1)
        score = w * _scaled(pred) + (1.0 - w) * (1.0 - _scaled(dists))

        before = best_value
        improved_point = False
        for k in np.argsort(score, kind="stable"):
            if evaluate(cand[k]):
                improved_point = True
                break
        if not improved_point:
            stalls += 1
            sigma = min(2 * sigma, 0.5)
            continue
        stalls = 0
        if best_value < before:
            succs, fails = succs + 1, 0
        else:
            succs, fails = 0, fails + 1
        if succs >= succ_tol:
            sigma, succs = min(2 * sigma, 0.5), 0
        if fails >= fail_tol:
            sigma, fails = max(sigma / 2, sigma_min), 0
    return SurrogateResult(best_point, best_value, log)
