"""Noise-reduction building blocks: boosting, noisy search, noisy sort, dedup."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ContractViolation
from .geometry import WHOLE_LINE, Interval, partition_cell
from .oracle import NoisyOracle

# Per-endpoint comparisons inside the search walk are boosted to a +-5 margin
# (error 1/33 at flip 1/3).  With that, ceil(1.25 * log2((m+2)/delta)) walk
# steps keep the exact walk error below delta for m <= 255, delta >= 1e-8.
SEARCH_MARGIN = 5
SEARCH_STEPS_CONSTANT = 1.25

# Margin for comparisons that are combined into compound tests (membership,
# equality).  Error 1/9 each, so a conjunction of two stays below 1/3.
LITE_MARGIN = 3


def ceil_log2_inv(delta: float) -> int:
    """ceil(log2(1/delta)), robust to float noise at exact powers of two."""
    return max(1, math.ceil(math.log2(1.0 / delta) - 1e-9))


@dataclass(frozen=True)
class BoostThresholds:
    up: int
    down: int

    def __post_init__(self):
        if self.up < 1 or self.down < 1:
            raise ContractViolation(f"thresholds must be >= 1, got up={self.up} down={self.down}")

    @classmethod
    def from_deltas(cls, delta1: float, delta2: float) -> "BoostThresholds":
        for name, val in (("delta1", delta1), ("delta2", delta2)):
            if not 0.0 < val < 0.5:
                raise ContractViolation(f"{name} must lie in (0, 1/2), got {val}")
        return cls(ceil_log2_inv(delta1), ceil_log2_inv(delta2))


def boost_margin(test: Callable[[], bool], up: int, down: int) -> bool:
    """Run ``test`` until true leads by ``up`` (-> True) or false leads by ``down``."""
    margin = 0
    while -down < margin < up:
        margin += 1 if test() else -1
    return margin >= up


def boost_prob(test: Callable[[], bool], delta1: float, delta2: float) -> bool:
    """Amplify a test with error <= 1/3 to false-positive <= delta1, false-negative <= delta2."""
    th = BoostThresholds.from_deltas(delta1, delta2)
    return boost_margin(test, th.up, th.down)


def boosted_less(oracle: NoisyOracle, p: int, q: int, dim: int, delta1: float, delta2: float) -> bool:
    """``boost_prob`` specialised to the single query ``p[dim] < q[dim]``."""
    th = BoostThresholds.from_deltas(delta1, delta2)
    return oracle.boosted_compare(p, q, dim, th.up, th.down)


def lite_less(oracle: NoisyOracle, p: int, q: int, dim: int, margin: int = LITE_MARGIN) -> bool:
    return oracle.boosted_compare(p, q, dim, margin, margin)


# -- noisy binary search -----------------------------------------------------

def search_steps(m: int, delta: float, constant: float = SEARCH_STEPS_CONSTANT) -> int:
    return max(1, math.ceil(constant * math.log2((m + 2) / delta)))


def noisy_search_index(target: int, dim: int, breakpoints: Sequence[int], delta: float,
                       oracle: NoisyOracle, *, margin: int = SEARCH_MARGIN,
                       steps_constant: float = SEARCH_STEPS_CONSTANT) -> int:
    """Cell index (0..2m) of ``target`` among the partition cells of ``breakpoints``.

    Random walk on the search tree over the 2m+1 cells, where every leaf is
    extended by an infinite chain of copies of itself.  Each step first checks
    that the target lies between the current node's bounds (one boosted
    comparison per finite bound), backs up one level if not, and otherwise
    moves down: one comparison at internal nodes, one chain link at leaves.
    The walk runs a fixed number of steps and then, if it happens to sit at an
    internal node, keeps walking until it reaches a leaf.
    """
    if not 0.0 < delta < 1.0:
        raise ContractViolation(f"delta must lie in (0, 1), got {delta}")
    m = len(breakpoints)
    if m == 0:
        return 0
    bps = breakpoints
    cmp = oracle.boosted_compare
    y = target
    last = 2 * m
    total = search_steps(m, delta, steps_constant)
    path = [(0, last)]
    chain = 0
    step = 0
    while True:
        L, R = path[-1]
        if step >= total and L == R:
            break
        step += 1
        inside = True
        if L > 0:
            if L % 2 == 0:  # gap cell: need b < y
                inside = cmp(bps[L // 2 - 1], y, dim, margin, margin)
            else:  # singleton cell: need not (y < b)
                inside = not cmp(y, bps[L // 2], dim, margin, margin)
        if inside and R < last:
            if R % 2 == 0:  # need y < b
                inside = cmp(y, bps[R // 2], dim, margin, margin)
            else:  # need not (b < y)
                inside = not cmp(bps[R // 2], y, dim, margin, margin)
        if not inside:
            if chain:
                chain -= 1
            elif len(path) > 1:
                path.pop()
        elif L == R:
            chain += 1
        else:
            M = (L + R) // 2
            if M % 2 == 0:  # M is a gap, M+1 the breakpoint b: left iff y < b
                left = cmp(y, bps[M // 2], dim, margin, margin)
            else:  # M is the breakpoint b: left iff not (b < y)
                left = not cmp(bps[M // 2], y, dim, margin, margin)
            path.append((L, M) if left else (M + 1, R))
    return path[-1][0]


def cell_interval(oracle: NoisyOracle, breakpoints: Sequence[int], dim: int, index: int) -> Interval:
    """Label cell ``index`` with coordinate values.  Reporting only; costs no queries."""
    if not breakpoints:
        return Interval(WHOLE_LINE, index=0)
    coords = oracle.instance.points
    values = [coords[b].coords[dim] for b in breakpoints]
    return partition_cell(values, index, list(breakpoints))


def noisy_search(target: int, dim: int, breakpoints: Sequence[int], delta: float,
                 oracle: NoisyOracle, **kw) -> Interval:
    """Partition cell containing ``target``'s coordinate, correct w.p. >= 1 - delta."""
    idx = noisy_search_index(target, dim, breakpoints, delta, oracle, **kw)
    return cell_interval(oracle, breakpoints, dim, idx)


def insertion_slot(cell: int) -> int:
    # gap 2j -> before breakpoint j; singleton 2j+1 -> right after breakpoint j
    return (cell + 1) // 2


def noisy_sort(items: Sequence[int], dim: int, delta: float, oracle: NoisyOracle) -> list[int]:
    """Insertion sort by noisy search, each insertion with budget delta/m."""
    if not 0.0 < delta < 1.0:
        raise ContractViolation(f"delta must lie in (0, 1), got {delta}")
    items = list(items)
    if len(items) <= 1:
        return items
    per = delta / len(items)
    out: list[int] = []
    for y in items:
        cell = noisy_search_index(y, dim, out, per, oracle)
        out.insert(insertion_slot(cell), y)
    return out


def dedupe_sorted(sorted_ids: Sequence[int], dim: int, delta: float, oracle: NoisyOracle) -> list[int]:
    """Drop every element whose coordinate equals its predecessor's.

    Equality is not a query in this model, so each inner run evaluates
    ``not (a < b) and not (b < a)`` with two lite-boosted comparisons (error
    at most 2/9), and the run is boosted with budget delta/m per pair.
    """
    if not 0.0 < delta < 1.0:
        raise ContractViolation(f"delta must lie in (0, 1), got {delta}")
    ids = list(sorted_ids)
    if len(ids) <= 1:
        return ids
    per = min(delta / len(ids), 0.49)
    kept = [ids[0]]
    for a, b in zip(ids, ids[1:]):
        def equal(a=a, b=b):
            return not lite_less(oracle, a, b, dim) and not lite_less(oracle, b, a, dim)

        if not boost_prob(equal, per, per):
            kept.append(b)
    return kept
