from __future__ import annotations

import math

import pytest

from noisysky.geometry import Instance


def binom_sigma(p: float, trials: int) -> float:
    return math.sqrt(p * (1.0 - p) / trials)


@pytest.fixture
def staircase() -> Instance:
    # three maxima and one point below all of them
    return Instance.from_coords([(1, 3), (2, 2), (3, 1), (0, 0)])


@pytest.fixture
def report(capsys):
    """Print one line straight to the terminal, bypassing capture."""

    def emit(line: str) -> None:
        with capsys.disabled():
            print(line, flush=True)

    return emit
