"""Simulated noisy comparison oracle with exact query accounting."""
from __future__ import annotations

import random
from contextlib import contextmanager

from .errors import ContractViolation
from .geometry import Instance

MASK64 = (1 << 64) - 1
DEFAULT_FLIP_PROB = 1 / 3


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, *parts: int) -> int:
    """Stable 64-bit child seed: fold each part into the state with splitmix64."""
    h = splitmix64(master & MASK64)
    for part in parts:
        h = splitmix64(h ^ (int(part) & MASK64))
    return h


class NoisyOracle:
    """Answers "is coordinate ``dim`` of p strictly smaller than that of q?".

    Each answer is flipped independently with probability ``flip_prob``, using
    one fresh draw from a seeded Mersenne Twister stream per query.  Not safe
    to share between threads; give each trial its own oracle.

    Queries are attributed to the innermost active :meth:`phase`.
    """

    def __init__(self, instance: Instance, flip_prob: float = DEFAULT_FLIP_PROB, seed: int = 0,
                 record: bool = False):
        if not 0.0 <= flip_prob <= 1 / 3:
            raise ContractViolation(f"flip_prob must lie in [0, 1/3], got {flip_prob}")
        self.instance = instance
        self.flip_prob = float(flip_prob)
        self.seed = int(seed)
        self.query_count = 0
        self.transcript: list | None = [] if record else None
        self._coords = [p.coords for p in instance.points]
        self._random = random.Random(self.seed).random
        self._phase_stack: list[str] = []
        self._phase = "main"
        self._mark = 0
        self._phase_counts: dict[str, int] = {}

    @property
    def n(self) -> int:
        return len(self._coords)

    @property
    def dim(self) -> int:
        return self.instance.dim

    def _truth(self, p: int, q: int, dim: int) -> bool:
        if p < 0 or q < 0 or dim < 0:
            raise ContractViolation(f"bad query ({p}, {q}, dim={dim})")
        try:
            return self._coords[p][dim] < self._coords[q][dim]
        except (IndexError, TypeError) as exc:
            raise ContractViolation(f"bad query ({p}, {q}, dim={dim}): {exc}") from None

    def compare(self, p: int, q: int, dim: int) -> bool:
        """One noisy answer to ``p[dim] < q[dim]`` (``dim`` is 0-based)."""
        truth = self._truth(p, q, dim)
        self.query_count += 1
        answer = truth != (self._random() < self.flip_prob)
        if self.transcript is not None:
            self.transcript.append((p, q, dim, answer))
        return answer

    def boosted_compare(self, p: int, q: int, dim: int, up: int, down: int) -> bool:
        """Repeat ``compare(p, q, dim)`` until true leads by ``up`` or false by ``down``.

        Same draws, counts and transcript as looping over :meth:`compare`; the
        truth value is just looked up once.  At flip probability 0 the draws
        are skipped, which cannot change any answer.
        """
        truth = self._truth(p, q, dim)
        rand, f = self._random, self.flip_prob
        if f == 0.0:
            # Noiseless: the walk is straight, and skipping the draws changes no answer.
            steps = up if truth else down
            self.query_count += steps
            if self.transcript is not None:
                self.transcript.extend([(p, q, dim, truth)] * steps)
            return truth
        margin = 0
        steps = 0
        rec = self.transcript
        while -down < margin < up:
            answer = truth != (rand() < f)
            steps += 1
            margin += 1 if answer else -1
            if rec is not None:
                rec.append((p, q, dim, answer))
        self.query_count += steps
        return margin >= up

    def snapshot_queries(self) -> int:
        return self.query_count

    # -- phase accounting -------------------------------------------------

    def _flush(self) -> None:
        delta = self.query_count - self._mark
        if delta:
            self._phase_counts[self._phase] = self._phase_counts.get(self._phase, 0) + delta
        self._mark = self.query_count

    @contextmanager
    def phase(self, name: str):
        self._flush()
        self._phase_stack.append(self._phase)
        self._phase = name
        try:
            yield self
        finally:
            self._flush()
            self._phase = self._phase_stack.pop()

    def phase_counts(self) -> dict[str, int]:
        """Queries per phase so far; the values sum to ``query_count``."""
        self._flush()
        return dict(self._phase_counts)
