"""Instance generators.

Two random families for benchmarking (uniform permutations and a family with a
prescribed skyline size) and the block construction that turns a
(k, l)-null-vectors input into a skyline instance.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractViolation
from .geometry import Instance, skyline_exact, skyline_mask

NULL_MAGNITUDE = 2  # value of the single nonzero entry of a non-null vector


def _meta(family: str, seed: int, skyline: set[int], **extra) -> dict:
    return {"family": family, "seed": int(seed), "skyline": sorted(int(i) for i in skyline),
            "general_position": True, **extra}


def _ranks(values: np.ndarray) -> np.ndarray:
    """Column-wise rank transform to 0..n-1."""
    ranks = np.empty(values.shape, dtype=np.int64)
    n = values.shape[0]
    for j in range(values.shape[1]):
        ranks[np.argsort(values[:, j], kind="stable"), j] = np.arange(n)
    return ranks


def gen_uniform(n: int, d: int, seed: int) -> Instance:
    """Every coordinate column is an independent uniform permutation of 0..n-1."""
    if n < 1 or d < 1:
        raise ContractViolation(f"need n >= 1 and d >= 1, got n={n} d={d}")
    rng = random.Random(seed)
    cols = []
    for _ in range(d):
        col = list(range(n))
        rng.shuffle(col)
        cols.append(col)
    coords = np.array(cols, dtype=np.int64).T
    return Instance.from_coords(coords.tolist(), _meta("uniform", seed, set(np.flatnonzero(skyline_mask(coords)))))


def gen_fixed_skyline(n: int, d: int, k: int, seed: int) -> Instance:
    """Exactly ``k`` skyline points, in general position.

    The maxima form a staircase in the first two dimensions (increasing in
    one, decreasing in the other); each remaining point sits strictly below a
    randomly chosen maximum in every dimension.  Coordinates are finally
    replaced by their per-dimension ranks, and ids are shuffled.
    """
    if not 1 <= k <= n:
        raise ContractViolation(f"need 1 <= k <= n, got k={k} n={n}")
    if d == 1 and k > 1:
        raise ContractViolation("in one dimension with distinct coordinates the skyline has exactly one point")
    rng = np.random.default_rng(seed)
    vals = np.empty((n, d))
    vals[:k] = 1.0 + rng.uniform(0.0, k, size=(k, d))
    if d >= 2:
        stairs = np.arange(k, dtype=float)
        vals[:k, 0] = 1.0 + stairs + rng.uniform(0.0, 0.5, size=k)
        vals[:k, 1] = 1.0 + stairs[::-1] + rng.uniform(0.0, 0.5, size=k)
    owners = rng.integers(0, k, size=n - k)
    vals[k:] = vals[owners] * rng.uniform(0.0, 1.0, size=(n - k, d))
    order = rng.permutation(n)  # order[new_id] = old row
    coords = _ranks(vals[order])
    maxima = {int(i) for i in np.flatnonzero(order < k)}
    found = set(int(i) for i in np.flatnonzero(skyline_mask(coords)))
    if found != maxima or any(len(set(coords[:, j])) != n for j in range(d)):
        raise ContractViolation(f"generator self-check failed for n={n} d={d} k={k} seed={seed}")
    return Instance.from_coords(coords.tolist(), _meta("fixed_skyline", seed, maxima, k=k))


# -- lower-bound construction ------------------------------------------------

@dataclass(frozen=True)
class NullVectorsInput:
    """``k`` vectors over {0, 2} of length ``ell`` with at most one nonzero entry each.

    Stored sparsely: ``nonzero_positions[i]`` is the index of the 2 in vector
    ``i`` or -1 for the all-zero vector.
    """

    k: int
    ell: int
    nonzero_positions: tuple

    def __post_init__(self):
        object.__setattr__(self, "nonzero_positions", tuple(int(x) for x in self.nonzero_positions))
        if self.k < 1 or self.ell < 1:
            raise ContractViolation(f"need k, ell >= 1, got k={self.k} ell={self.ell}")
        if len(self.nonzero_positions) != self.k:
            raise ContractViolation(f"expected {self.k} positions, got {len(self.nonzero_positions)}")
        for pos in self.nonzero_positions:
            if not -1 <= pos < self.ell:
                raise ContractViolation(f"position {pos} outside [-1, {self.ell})")

    @property
    def vectors(self) -> list[list[int]]:
        out = []
        for pos in self.nonzero_positions:
            v = [0] * self.ell
            if pos >= 0:
                v[pos] = NULL_MAGNITUDE
            out.append(v)
        return out

    @property
    def answer(self) -> list[int]:
        """The correct output w: 0 for a null vector, 2 otherwise."""
        return [0 if pos < 0 else NULL_MAGNITUDE for pos in self.nonzero_positions]

    @classmethod
    def from_vectors(cls, vectors) -> "NullVectorsInput":
        vectors = [list(v) for v in vectors]
        if not vectors:
            raise ContractViolation("need at least one vector")
        ell = len(vectors[0])
        positions = []
        for v in vectors:
            if len(v) != ell or any(x not in (0, NULL_MAGNITUDE) for x in v) or sum(v) > NULL_MAGNITUDE:
                raise ContractViolation(f"not a valid null-vectors entry: {v}")
            positions.append(v.index(NULL_MAGNITUDE) if sum(v) else -1)
        return cls(len(vectors), ell, tuple(positions))

    def to_json(self) -> dict:
        return {"k": self.k, "ell": self.ell, "nonzero_positions": list(self.nonzero_positions)}

    @classmethod
    def from_json(cls, doc: dict) -> "NullVectorsInput":
        try:
            return cls(int(doc["k"]), int(doc["ell"]), tuple(doc["nonzero_positions"]))
        except (KeyError, TypeError) as exc:
            raise ContractViolation(f"malformed null-vectors document: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path) -> "NullVectorsInput":
        return cls.from_json(json.loads(Path(path).read_text()))


def gen_null_vectors(k: int, ell: int, seed: int) -> NullVectorsInput:
    """``k`` independent draws: null w.p. 1/2, else a single 2 at a uniform position."""
    if k < 1 or ell < 1:
        raise ContractViolation(f"need k, ell >= 1, got k={k} ell={ell}")
    rng = random.Random(seed)
    positions = tuple(rng.randrange(ell) if rng.random() < 0.5 else -1 for _ in range(k))
    return NullVectorsInput(k, ell, positions)


def reduce_to_skyline(S: NullVectorsInput, d: int, seed: int) -> Instance:
    """Block construction: a skyline instance whose skyline encodes the answer to ``S``.

    Each vector's entries are first permuted at random.  Vectors are grouped
    into blocks of ``d - 2``; block ``j`` has ``ell + d - 2`` points (ids
    ``j*(ell+d-2) + row``).  Column ``c < d-2`` of block ``j`` holds vector
    ``j*(d-2) + c`` in rows ``0..ell-1`` and a single 1 in row ``ell + c``.
    The last two coordinates are ``j`` and ``n - j``, so points of different
    blocks never dominate each other.
    """
    if d < 3:
        raise ContractViolation(f"the construction needs d >= 3, got {d}")
    w = d - 2
    if S.k % w:
        raise ContractViolation(f"d - 2 = {w} must divide k = {S.k}")
    ell = S.ell
    blocks = S.k // w
    rows = ell + w
    n = rows * blocks
    rng = random.Random(seed)
    permuted = []
    for pos in S.nonzero_positions:
        perm = list(range(ell))
        rng.shuffle(perm)
        permuted.append(perm[pos] if pos >= 0 else -1)

    coords = np.zeros((n, d), dtype=np.int64)
    one_rows, collision = [], False
    for j in range(blocks):
        base = j * rows
        coords[base:base + rows, d - 2] = j
        coords[base:base + rows, d - 1] = n - j
        seen = set()
        for c in range(w):
            pos = permuted[j * w + c]
            if pos >= 0:
                coords[base + pos, c] = NULL_MAGNITUDE
                collision |= pos in seen
                seen.add(pos)
            coords[base + ell + c, c] = 1
            one_rows.append(base + ell + c)
    meta = {
        "family": "null_vectors",
        "seed": int(seed),
        "k": S.k,
        "ell": ell,
        "general_position": False,
        "one_rows": one_rows,  # one_rows[i] carries the 1 of vector i
        "permuted_positions": permuted,
        "collision": collision,
    }
    return Instance.from_coords(coords.tolist(), meta)


def decode_skyline_to_answer(sky, meta: dict) -> list[int]:
    """w_i = 0 iff the point carrying the 1 of vector i is a skyline point."""
    try:
        one_rows = meta["one_rows"]
    except (KeyError, TypeError) as exc:
        raise ContractViolation("metadata does not come from reduce_to_skyline") from exc
    sky = set(sky)
    return [0 if r in sky else NULL_MAGNITUDE for r in one_rows]


def skyline_of(X: Instance) -> set[int]:
    """Recorded skyline ids when present, otherwise brute force."""
    rec = X.meta.get("skyline")
    return set(rec) if rec is not None else skyline_exact(X)
