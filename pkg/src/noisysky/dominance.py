"""Noisy dominance tests, lexicographic comparison and bucket emptiness."""
from __future__ import annotations

import heapq
from functools import lru_cache
from typing import Sequence

from .errors import ContractViolation
from .geometry import LEFT_UNBOUNDED, OPEN, RIGHT_UNBOUNDED, SINGLETON, Bucket, Interval
from .oracle import NoisyOracle
from .primitives import BoostThresholds, boost_margin, boost_prob, ceil_log2_inv, lite_less


@lru_cache(maxsize=None)
def _per_coordinate(d: int, denom: int) -> tuple[int, int]:
    """(up, down) thresholds for one of ``d`` coordinate tests in a test of error 1/denom."""
    th = BoostThresholds.from_deltas(1 / (denom * d), 1 / denom)
    return th.up, th.down


def dominates_noisy(p: int, q: int, oracle: NoisyOracle) -> bool:
    """Does ``p`` weakly dominate ``q``?  Error at most 1/16, O(d) expected queries."""
    d = oracle.dim
    up, down = _per_coordinate(d, 16)
    cmp = oracle.boosted_compare
    for i in range(d):
        if cmp(p, q, i, up, down):  # confirmed p_i < q_i
            return False
    return True


def set_dominates(S: Sequence[int], q: int, delta1: float, delta2: float,
                  oracle: NoisyOracle) -> bool:
    """Does some member of ``S`` weakly dominate ``q``?

    False positives at most ``delta1``, false negatives at most ``delta2``.
    """
    if not S:
        return False
    th = BoostThresholds.from_deltas(delta1 / len(S), delta2)
    for p in S:
        if boost_margin(lambda: dominates_noisy(p, q, oracle), th.up, th.down):
            return True
    return False


def lex_noisy(p: int, q: int, oracle: NoisyOracle) -> bool:
    """Is ``p >_lex q``?  Error at most 1/16.  Equal coordinates fall back to ids."""
    if p == q:
        raise ContractViolation(f"lexicographic comparison of point {p} with itself")
    d = oracle.dim
    up, down = _per_coordinate(d, 32)
    cmp = oracle.boosted_compare
    for i in range(d):
        if cmp(q, p, i, up, down):
            return True
        if cmp(p, q, i, up, down):
            return False
    return p > q


def max_lex_iteration_cap(size: int, delta: float) -> int:
    return 10 * (size + 3) * (ceil_log2_inv(delta) + 3)


def max_lex(p: int, S: Sequence[int], delta: float, oracle: NoisyOracle,
            stats: dict | None = None) -> int:
    """Lexicographic maximum among the members of ``S`` that dominate ``p``.

    Every member carries a counter, initially ceil(log2(1/delta)).  Each round
    the two largest counters meet and the lexicographic winner is tested
    against ``p``.  If it dominates ``p`` it gains 1/2 and the loser drops
    by 1; otherwise only the winner drops by 1.  (Charging the loser of a
    meeting with a non-dominator would let lexicographically larger
    non-dominators drag the answer down with them.)  Rounds stop once the
    second largest counter is at most -2.  Counters are kept in half units;
    ties go to the lower id.
    """
    S = list(S)
    if p not in S:
        raise ContractViolation(f"point {p} must belong to the candidate set")
    if not 0.0 < delta < 0.5:
        raise ContractViolation(f"delta must lie in (0, 1/2), got {delta}")
    if len(S) == 1:
        if stats is not None:
            stats.update(iterations=0, capped=False)
        return S[0]

    start = 2 * ceil_log2_inv(delta)
    count = {q: start for q in S}
    version = {q: 0 for q in S}
    heap = [(-start, q, 0) for q in S]
    heapq.heapify(heap)

    def pop_valid():
        while True:
            negc, q, ver = heapq.heappop(heap)
            if version[q] == ver:
                return q

    def push(q):
        version[q] += 1
        heapq.heappush(heap, (-count[q], q, version[q]))

    cap = max_lex_iteration_cap(len(S), delta)
    iterations = 0
    capped = False
    while True:
        if iterations >= cap:
            capped = True
            break
        iterations += 1
        q1 = pop_valid()
        q2 = pop_valid()
        x, y = (q1, q2) if lex_noisy(q1, q2, oracle) else (q2, q1)
        if dominates_noisy(x, p, oracle):
            count[x] += 1
            count[y] -= 2
        else:
            count[x] -= 2
        push(q1)
        push(q2)
        # second largest counter: pop the largest, peek at the next valid entry
        first = pop_valid()
        while version[heap[0][1]] != heap[0][2]:
            heapq.heappop(heap)
        second = count[heap[0][1]]
        heapq.heappush(heap, (-count[first], first, version[first]))
        if second <= -4:
            break
    if stats is not None:
        stats.update(iterations=iterations, capped=capped)
    return min(S, key=lambda q: (-count[q], q))


# -- buckets -----------------------------------------------------------------

def _outside_test(p: int, cell: Interval, dim: int, oracle: NoisyOracle):
    """A test for ``p[dim] not in cell`` with error at most 1/3, or None if trivially inside."""
    kind = cell.kind
    if (cell.lo is not None and cell.lo_id is None) or (cell.hi is not None and cell.hi_id is None):
        raise ContractViolation(f"cell {cell} in dimension {dim} has no breakpoint ids")
    if kind == SINGLETON:
        b = cell.lo_id
        return lambda: lite_less(oracle, p, b, dim) or lite_less(oracle, b, p, dim)
    if kind == OPEN:
        a, b = cell.lo_id, cell.hi_id
        return lambda: not lite_less(oracle, a, p, dim) or not lite_less(oracle, p, b, dim)
    if kind == LEFT_UNBOUNDED:
        b = cell.hi_id
        return lambda: not oracle.compare(p, b, dim)
    if kind == RIGHT_UNBOUNDED:
        a = cell.lo_id
        return lambda: not oracle.compare(a, p, dim)
    return None


def in_bucket(p: int, B: Bucket, oracle: NoisyOracle) -> bool:
    """Is ``p`` inside bucket ``B``?  Error at most 1/16, O(d) expected queries.

    The cells must carry breakpoint ids (``lo_id``/``hi_id``) so their bounds
    can be queried.
    """
    up, down = _per_coordinate(len(B.cells), 16)
    for dim, cell in enumerate(B.cells):
        test = _outside_test(p, cell, dim, oracle)
        if test is not None and boost_margin(test, up, down):
            return False
    return True


def is_empty(B: Bucket, Y: Sequence[int], delta1: float, delta2: float,
             oracle: NoisyOracle) -> bool:
    """Is no member of ``Y`` inside ``B``?

    Wrongly answers True w.p. at most ``delta1``, wrongly False at most ``delta2``.
    """
    if not Y:
        return True
    m = len(Y)
    for p in Y:
        if boost_prob(lambda: in_bucket(p, B, oracle), delta2 / m, delta1):
            return False
    return True
