"""Skyline algorithms under noisy comparisons.

``sky_gm``
    sort every dimension noisily, then read the skyline off the ranks.
``skyline_high_dim`` / ``guess_skyline_high_dim``
    find skyline points one at a time; the guess wrapper doubles k.
``skyline_low_dim`` / ``guess_skyline_low_dim``
    bucket the points on sampled breakpoints, discard dominated buckets,
    finish on the survivors; the guess wrapper squares k.

All functions take the point set either as an :class:`Instance` or as a
sequence of ids into the oracle's instance.
"""
from __future__ import annotations

import math
import random
from contextlib import nullcontext
from dataclasses import dataclass, field

import numpy as np

from .dominance import is_empty, max_lex, set_dominates
from .errors import ContractViolation
from .geometry import Bucket, Instance, id_cell, skyline_mask
from .oracle import NoisyOracle, derive_seed
from .primitives import dedupe_sorted, noisy_search_index, noisy_sort

PHASES = ("sort", "filter", "maxlex", "bucketing", "elimination", "reduced")


def _ids(X) -> list[int]:
    if isinstance(X, Instance):
        return X.ids
    return list(X)


def _check_delta(delta: float, upper: float = 0.5) -> None:
    if not 0.0 < delta < upper:
        raise ContractViolation(f"delta must lie in (0, {upper}), got {delta}")


@dataclass(frozen=True)
class AlgoConfig:
    """Tunables for the bucketing algorithm.

    The defaults follow the published pseudocode.  ``initial_k``,
    ``sample_size_scale`` and ``sample_size`` exist so the bucketing phases
    can be exercised at sizes where the guard would otherwise always fire.
    """

    guard_exponent: int = 5
    restart_cap: int = 16
    initial_k: int | None = None
    sample_size_scale: float = 1.0
    sample_size: int | None = None

    @classmethod
    def test_mode(cls, initial_k: int = 2, sample_size: int | None = None,
                  sample_size_scale: float = 0.1, guard_exponent: int = 2,
                  restart_cap: int = 16) -> "AlgoConfig":
        return cls(guard_exponent=guard_exponent, restart_cap=restart_cap, initial_k=initial_k,
                   sample_size_scale=sample_size_scale, sample_size=sample_size)

    @property
    def is_default(self) -> bool:
        return self == AlgoConfig()


# -- SkyGM -------------------------------------------------------------------

def sky_gm(X, delta: float, oracle: NoisyOracle) -> set[int]:
    _check_delta(delta, 1.0)
    ids = _ids(X)
    if len(ids) <= 1:
        return set(ids)
    d = oracle.dim
    ranks = np.empty((len(ids), d), dtype=np.int64)
    slot = {p: i for i, p in enumerate(ids)}
    with oracle.phase("sort"):
        for dim in range(d):
            for r, p in enumerate(noisy_sort(ids, dim, delta / d, oracle)):
                ranks[slot[p], dim] = r
    return {ids[i] for i in np.flatnonzero(skyline_mask(ranks))}


# -- incremental algorithm ---------------------------------------------------

def skyline_high_dim(k: int, X, delta: float, oracle: NoisyOracle,
                     trace: dict | None = None, phased: bool = True) -> set[int]:
    """Up to ``k`` skyline points, all of them when ``k >= |skyline|`` (w.p. 1 - delta).

    With ``phased=False`` queries stay attributed to the caller's phase.
    """
    if k < 1:
        raise ContractViolation(f"k must be >= 1, got {k}")
    _check_delta(delta)
    ids = _ids(X)
    n = len(ids)
    found: list[int] = []
    candidates = list(ids)
    filter_budgets = (delta / (4 * k), delta / (4 * k * max(n, 1)))
    rounds = []

    def phase(name):
        return oracle.phase(name) if phased else nullcontext()

    for _ in range(k):
        with phase("filter"):
            while candidates:
                p = candidates[0]
                if not set_dominates(found, p, *filter_budgets, oracle):
                    break
                candidates.pop(0)
        if not candidates:
            break
        with phase("maxlex"):
            stats: dict = {}
            best = max_lex(p, candidates, delta / (2 * k), oracle, stats)
        rounds.append({"seed_point": p, "found": best, **stats})
        found.append(best)
        candidates.remove(best)
    if trace is not None:
        trace["rounds"] = rounds
    return set(found)


def guess_skyline_high_dim(X, delta: float, oracle: NoisyOracle,
                           trace: list | None = None) -> set[int]:
    """Doubling guesses k = 2, 4, 8, ... with budget delta/8^j until fewer than k come back."""
    _check_delta(delta)
    j, k = 0, 1
    while True:
        j += 1
        k *= 2
        budget = delta / 8 ** j
        S = skyline_high_dim(k, X, budget, oracle)
        if trace is not None:
            trace.append({"k": k, "delta": budget, "found": len(S)})
        if len(S) < k:
            return S


# -- bucketing algorithm -----------------------------------------------------

@dataclass
class LowDimTrace:
    """What one ``skyline_low_dim`` call did; filled in when passed by the caller."""

    k: int = 0
    delta_prime: float = 0.0
    sample_size: int = 0
    guard_fired: bool = False
    restarts: int = 0
    fell_back: bool = False
    breakpoints: list = field(default_factory=list)
    assignment: dict = field(default_factory=dict)
    buckets: dict = field(default_factory=dict)
    tested: list = field(default_factory=list)
    nonempty: list = field(default_factory=list)
    reduced: list = field(default_factory=list)


def low_dim_parameters(k: int, d: int, delta: float, cfg: AlgoConfig) -> tuple[float, int]:
    """(delta', s): the shrunken budget and the per-dimension sample size."""
    delta_p = delta / (2 * d * k) ** 5
    if cfg.sample_size is not None:
        return delta_p, int(cfg.sample_size)
    s = math.ceil(cfg.sample_size_scale * d * k * k * math.log2(d * d * k * k / delta_p))
    return delta_p, max(1, s)


def guard_fires(k: int, d: int, n: int, cfg: AlgoConfig) -> bool:
    g = cfg.guard_exponent
    return k ** g >= n or d ** g >= n


def bucket_dominators(keys: list[tuple]) -> np.ndarray:
    """``dom[a, b]`` is True iff bucket ``keys[a]`` dominates bucket ``keys[b]``."""
    K = np.asarray(keys, dtype=np.int64).reshape(len(keys), -1)
    sup = K // 2 + 1
    inf = (K + 1) // 2
    dom = np.all(sup[None, :, :] <= inf[:, None, :], axis=2)
    dom &= np.any(K[None, :, :] != K[:, None, :], axis=2)
    return dom


def skyline_low_dim(k: int, X, delta: float, cfg: AlgoConfig | None, oracle: NoisyOracle,
                    rng: random.Random | None = None, trace: LowDimTrace | None = None) -> set[int]:
    """Up to ``k`` skyline points by bucketing, elimination and a reduced subproblem."""
    if k < 1:
        raise ContractViolation(f"k must be >= 1, got {k}")
    _check_delta(delta)
    cfg = cfg or AlgoConfig()
    ids = _ids(X)
    n, d = len(ids), oracle.dim
    delta_p, s = low_dim_parameters(k, d, delta, cfg)
    tr = trace if trace is not None else LowDimTrace()
    tr.k, tr.delta_prime, tr.sample_size = k, delta_p, min(s, n)

    if guard_fires(k, d, n, cfg):
        tr.guard_fired = True
        return sky_gm(ids, delta_p, oracle)

    base_seed = rng.getrandbits(64) if rng is not None else derive_seed(oracle.seed, 0x5EED)
    for attempt in range(cfg.restart_cap + 1):
        tr.restarts = attempt
        result = _low_dim_attempt(k, ids, delta_p, min(s, n), oracle,
                                  random.Random(derive_seed(base_seed, attempt)), tr)
        if result is not None:
            return result
    tr.fell_back = True
    return sky_gm(ids, delta_p, oracle)


def _low_dim_attempt(k: int, ids: list[int], delta_p: float, s: int, oracle: NoisyOracle,
                     rng: random.Random, tr: LowDimTrace) -> set[int] | None:
    n, d = len(ids), oracle.dim

    with oracle.phase("bucketing"):
        breakpoints = []
        for dim in range(d):
            sample = list(ids) if s >= n else rng.sample(ids, s)
            order = noisy_sort(sample, dim, delta_p / d, oracle)
            breakpoints.append(dedupe_sorted(order, dim, delta_p / d, oracle))
        assignment = {}
        buckets: dict[tuple, list[int]] = {}
        per_search = delta_p / (d * k)
        for p in ids:
            key = tuple(noisy_search_index(p, dim, breakpoints[dim], per_search, oracle)
                        for dim in range(d))
            assignment[p] = key
            buckets.setdefault(key, []).append(p)
    tr.breakpoints, tr.assignment, tr.buckets = breakpoints, assignment, buckets
    tr.tested, tr.nonempty, tr.reduced = [], [], []

    # Buckets nobody landed in are empty by definition.  Every dominator of a
    # bucket has a strictly larger cell-index sum, so descending sums give a
    # topological order and one pass settles each bucket after its dominators.
    with oracle.phase("elimination"):
        keys = sorted(buckets, key=lambda key: (-sum(key), key))
        dom = bucket_dominators(keys)
        state: list[bool | None] = [None] * len(keys)
        limit = n / math.log2(n)
        nonempty = 0
        for b, key in enumerate(keys):
            if not all(state[a] is True for a in np.flatnonzero(dom[:, b])):
                continue
            cells = tuple(id_cell(breakpoints[dim], key[dim]) for dim in range(d))
            empty = is_empty(Bucket(cells), buckets[key], delta_p / k, delta_p / n, oracle)
            state[b] = empty
            tr.tested.append(key)
            if not empty:
                nonempty += 1
                tr.nonempty.append(key)
                if nonempty > limit:
                    return None

    reduced = [p for b, key in enumerate(keys) if state[b] is False for p in buckets[key]]
    tr.reduced = reduced
    with oracle.phase("reduced"):
        return skyline_high_dim(k, reduced, delta_p, oracle, phased=False) if reduced else set()


def guess_skyline_low_dim(X, delta: float, cfg: AlgoConfig | None, oracle: NoisyOracle,
                          trace: list | None = None) -> set[int]:
    """Squaring guesses of k with halving budgets until fewer than k points come back."""
    _check_delta(delta)
    cfg = cfg or AlgoConfig()
    d = oracle.dim
    if cfg.initial_k is not None:
        k = cfg.initial_k
    else:
        base = math.floor(d / delta)
        k = base * base if base >= 2 else 4
    while True:
        delta /= 2
        k = k * k
        S = skyline_low_dim(k, X, delta, cfg, oracle)
        if trace is not None:
            trace.append({"k": k, "delta": delta, "found": len(S)})
        if len(S) < k:
            return S


def assignment_load(trace: LowDimTrace, X: Instance) -> int:
    """Largest number of distinct coordinate values that one interval received."""
    worst = 0
    arr = X.array
    for dim in range(X.dim):
        per_cell: dict[int, set] = {}
        for p, key in trace.assignment.items():
            per_cell.setdefault(key[dim], set()).add(arr[p, dim].item())
        worst = max([worst] + [len(values) for values in per_cell.values()])
    return worst
