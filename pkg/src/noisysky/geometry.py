"""Points, instances, interval partitions, buckets and the exact skyline.

Everything in here is noise-free.  The exact routines are the ground truth
that the noisy algorithms are checked against; they never touch an oracle.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import ContractViolation

OPEN = "open-span"
SINGLETON = "singleton"
LEFT_UNBOUNDED = "left-unbounded"
RIGHT_UNBOUNDED = "right-unbounded"
WHOLE_LINE = "whole-line"
INTERVAL_KINDS = (OPEN, SINGLETON, LEFT_UNBOUNDED, RIGHT_UNBOUNDED, WHOLE_LINE)


@dataclass(frozen=True)
class Point:
    id: int
    coords: tuple

    def __post_init__(self):
        if self.id < 0:
            raise ContractViolation(f"point id must be non-negative, got {self.id}")
        object.__setattr__(self, "coords", tuple(self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class Instance:
    """A point set with ids ``0..n-1`` plus generator metadata."""

    points: tuple
    dim: int
    meta: dict = field(default_factory=dict, compare=False)
    _array: Any = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ContractViolation("an instance needs at least one point")
        if self.dim < 1:
            raise ContractViolation(f"dimension must be >= 1, got {self.dim}")
        for i, p in enumerate(pts):
            if p.id != i:
                raise ContractViolation(f"point ids must be contiguous from 0; slot {i} holds id {p.id}")
            if p.dim != self.dim:
                raise ContractViolation(f"point {p.id} has {p.dim} coordinates, expected {self.dim}")

    @classmethod
    def from_coords(cls, coords, meta: dict | None = None) -> "Instance":
        rows = [tuple(_plain(v) for v in row) for row in coords]
        if not rows:
            raise ContractViolation("an instance needs at least one point")
        return cls(tuple(Point(i, r) for i, r in enumerate(rows)), len(rows[0]), dict(meta or {}))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def ids(self) -> list[int]:
        return list(range(len(self.points)))

    @property
    def array(self) -> np.ndarray:
        if self._array is None:
            arr = np.array([p.coords for p in self.points])
            arr.setflags(write=False)
            object.__setattr__(self, "_array", arr)
        return self._array

    def is_general_position(self) -> bool:
        arr = self.array
        return all(len(np.unique(arr[:, j])) == self.n for j in range(self.dim))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.dim,
            "points": [{"id": p.id, "coords": list(p.coords)} for p in self.points],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Instance":
        try:
            pts = sorted(doc["points"], key=lambda p: p["id"])
            inst = cls(tuple(Point(int(p["id"]), tuple(p["coords"])) for p in pts), int(doc["d"]),
                       dict(doc.get("meta") or {}))
        except (KeyError, TypeError) as exc:
            raise ContractViolation(f"malformed instance document: {exc}") from exc
        if "n" in doc and int(doc["n"]) != inst.n:
            raise ContractViolation(f"instance declares n={doc['n']} but lists {inst.n} points")
        if inst.meta.get("general_position") and not inst.is_general_position():
            raise ContractViolation("instance is flagged general-position but has repeated coordinates")
        return inst

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "Instance":
        return cls.from_json(json.loads(Path(path).read_text()))


def _plain(v):
    # numpy scalars -> python numbers so JSON round trips are exact
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _check_same_dim(p: Point, q: Point) -> None:
    if p.dim != q.dim:
        raise ContractViolation(f"dimension mismatch: {p.dim} vs {q.dim}")


def dominates_exact(p: Point, q: Point) -> bool:
    """True iff ``p`` weakly dominates ``q`` (``q_i <= p_i`` everywhere)."""
    _check_same_dim(p, q)
    return all(b <= a for a, b in zip(p.coords, q.coords))


def strictly_dominates_exact(p: Point, q: Point) -> bool:
    _check_same_dim(p, q)
    return dominates_exact(p, q) and any(a > b for a, b in zip(p.coords, q.coords))


def lex_greater_exact(p: Point, q: Point) -> bool:
    """Lexicographic ``p > q``, falling back to the ids when coordinates agree."""
    _check_same_dim(p, q)
    if p.id == q.id:
        raise ContractViolation(f"lexicographic comparison of point {p.id} with itself")
    for a, b in zip(p.coords, q.coords):
        if a != b:
            return a > b
    return p.id > q.id


def skyline_mask(coords) -> np.ndarray:
    """Boolean mask of rows not strictly dominated by any other row.

    Pairwise O(n^2 d) scan.  Identical rows share their fate, so the scan runs
    over distinct rows only; the work is chunked to bound memory.
    """
    arr = np.asarray(coords)
    if arr.ndim != 2 or len(arr) == 0:
        raise ContractViolation("expected a non-empty (n, d) coordinate array")
    uniq, inverse = np.unique(arr, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    u, d = uniq.shape
    dominated = np.zeros(u, dtype=bool)
    chunk = max(1, (1 << 23) // max(1, u * d))
    for start in range(0, u, chunk):
        rows = uniq[start:start + chunk]
        ge = np.ones((len(rows), u), dtype=bool)
        for j in range(d):
            ge &= uniq[None, :, j] >= rows[:, None, j]
        # among distinct rows, weak dominance by another row is strict
        ge[np.arange(len(rows)), np.arange(start, start + len(rows))] = False
        dominated[start:start + len(rows)] = ge.any(axis=1)
    return ~dominated[inverse]


def skyline_exact(X: Instance) -> set[int]:
    return {int(i) for i in np.flatnonzero(skyline_mask(X.array))}


# -- intervals ---------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """One cell of a breakpoint partition.

    ``lo``/``hi`` are coordinate values (``None`` for an infinite side).
    ``index`` is the cell position within its partition and ``lo_id``/``hi_id``
    are the breakpoint points bounding it, when the interval came from one.
    Cells built inside noisy algorithms may carry ids only, no values.
    """

    kind: str
    lo: float | None = None
    hi: float | None = None
    index: int | None = field(default=None, compare=False)
    lo_id: int | None = field(default=None, compare=False)
    hi_id: int | None = field(default=None, compare=False)

    def __post_init__(self):
        k, lo, hi = self.kind, self.lo, self.hi
        if k not in INTERVAL_KINDS:
            raise ContractViolation(f"unknown interval kind {k!r}")
        has_lo = lo is not None or self.lo_id is not None
        has_hi = hi is not None or self.hi_id is not None
        need_lo, need_hi = {
            OPEN: (True, True), SINGLETON: (True, True), LEFT_UNBOUNDED: (False, True),
            RIGHT_UNBOUNDED: (True, False), WHOLE_LINE: (False, False),
        }[k]
        if (has_lo, has_hi) != (need_lo, need_hi):
            raise ContractViolation(f"{k} interval has the wrong bounds: lo={lo}, hi={hi}")
        if k == OPEN and lo is not None and hi is not None and not lo < hi:
            raise ContractViolation(f"open span needs lo < hi, got ({lo}, {hi})")
        if k == SINGLETON and (lo != hi or self.lo_id != self.hi_id):
            raise ContractViolation(f"singleton needs lo == hi, got [{lo}, {hi}]")

    @property
    def inf(self) -> float:
        return -math.inf if self.lo is None else self.lo

    @property
    def sup(self) -> float:
        return math.inf if self.hi is None else self.hi

    def contains(self, x) -> bool:
        if (self.lo is None and self.lo_id is not None) or (self.hi is None and self.hi_id is not None):
            raise ContractViolation("interval carries breakpoint ids but no values")
        if self.kind == SINGLETON:
            return x == self.lo
        return self.inf < x < self.sup

    def __str__(self):
        if self.kind == SINGLETON:
            return f"[{self.lo}]"
        lo = "-inf" if self.lo is None else self.lo
        hi = "+inf" if self.hi is None else self.hi
        return f"({lo}, {hi})"


def partition_cell(values: Sequence, index: int, ids: Sequence[int] | None = None) -> Interval:
    """Cell ``index`` of the 2m+1 partition induced by sorted ``values``.

    Even indices are open gaps, odd indices the breakpoints themselves.
    """
    m = len(values)
    if not 0 <= index <= 2 * m:
        raise ContractViolation(f"cell index {index} outside 0..{2 * m}")
    idv = (lambda j: None) if ids is None else (lambda j: ids[j])
    if index % 2 == 1:
        j = index // 2
        return Interval(SINGLETON, values[j], values[j], index, idv(j), idv(j))
    j = index // 2  # gap between values[j-1] and values[j]
    if m == 0:
        return Interval(WHOLE_LINE, index=0)
    if j == 0:
        return Interval(LEFT_UNBOUNDED, None, values[0], index, None, idv(0))
    if j == m:
        return Interval(RIGHT_UNBOUNDED, values[m - 1], None, index, idv(m - 1), None)
    return Interval(OPEN, values[j - 1], values[j], index, idv(j - 1), idv(j))


def id_cell(breakpoints: Sequence[int], index: int) -> Interval:
    """Cell ``index`` of the partition induced by breakpoint ids, without values."""
    m = len(breakpoints)
    if not 0 <= index <= 2 * m:
        raise ContractViolation(f"cell index {index} outside 0..{2 * m}")
    j = index // 2
    if index % 2 == 1:
        return Interval(SINGLETON, index=index, lo_id=breakpoints[j], hi_id=breakpoints[j])
    if m == 0:
        return Interval(WHOLE_LINE, index=0)
    if j == 0:
        return Interval(LEFT_UNBOUNDED, index=index, hi_id=breakpoints[0])
    if j == m:
        return Interval(RIGHT_UNBOUNDED, index=index, lo_id=breakpoints[m - 1])
    return Interval(OPEN, index=index, lo_id=breakpoints[j - 1], hi_id=breakpoints[j])


def partition(values: Sequence, ids: Sequence[int] | None = None) -> list[Interval]:
    """All 2m+1 cells for strictly increasing breakpoints ``values``."""
    if any(a >= b for a, b in zip(values, values[1:])):
        raise ContractViolation("breakpoints must be strictly increasing")
    return [partition_cell(values, c, ids) for c in range(2 * len(values) + 1)]


def locate(values: Sequence, x) -> int:
    """Exact cell index of ``x`` in the partition of ``values``."""
    lo, hi = 0, len(values)
    while lo < hi:
        mid = (lo + hi) // 2
        if values[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    if lo < len(values) and values[lo] == x:
        return 2 * lo + 1
    return 2 * lo


def cell_sup_rank(c: int) -> int:
    """Rank of a cell's upper end among breakpoints b_0=-inf, b_1..b_m, b_{m+1}=+inf."""
    return c // 2 + 1


def cell_inf_rank(c: int) -> int:
    return (c + 1) // 2


# -- buckets -----------------------------------------------------------------

@dataclass(frozen=True)
class Bucket:
    cells: tuple
    assigned: frozenset = frozenset()
    emptiness: bool | None = None  # None means unknown

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "assigned", frozenset(self.assigned))

    @property
    def dim(self) -> int:
        return len(self.cells)

    def contains(self, point: Point) -> bool:
        if point.dim != self.dim:
            raise ContractViolation(f"dimension mismatch: {point.dim} vs {self.dim}")
        return all(cell.contains(x) for cell, x in zip(self.cells, point.coords))


def bucket_dominates(upper: Bucket, lower: Bucket) -> bool:
    """True iff every point of ``upper`` strictly dominates every point of ``lower``."""
    if upper.dim != lower.dim:
        raise ContractViolation(f"dimension mismatch: {upper.dim} vs {lower.dim}")
    if upper.cells == lower.cells:
        return False
    return all(lo.sup <= up.inf for up, lo in zip(upper.cells, lower.cells))


def bucket_key_dominates(upper: Sequence[int], lower: Sequence[int]) -> bool:
    """``bucket_dominates`` on cell-index tuples from shared per-dimension partitions."""
    if tuple(upper) == tuple(lower):
        return False
    return all(cell_sup_rank(c) <= cell_inf_rank(u) for u, c in zip(upper, lower))


def points_dominance_free(X: Instance, ids: Iterable[int]) -> bool:
    """No member of ``ids`` strictly dominates another."""
    ids = list(ids)
    pts = X.points
    return not any(strictly_dominates_exact(pts[a], pts[b]) for a in ids for b in ids if a != b)
