from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisysky.errors import ContractViolation
from noisysky.geometry import SINGLETON, Instance, locate
from noisysky.harness import gambler_ruin
from noisysky.oracle import NoisyOracle
from noisysky.primitives import (BoostThresholds, boost_margin, boost_prob, ceil_log2_inv,
                                 dedupe_sorted, insertion_slot, noisy_search, noisy_search_index,
                                 noisy_sort, search_steps)

from .conftest import binom_sigma


def line_instance(values):
    return Instance.from_coords([(v,) for v in values])


def test_ceil_log2_inv():
    assert ceil_log2_inv(1 / 8) == 3
    assert ceil_log2_inv(1 / 9) == 4
    assert ceil_log2_inv(0.49) == 2
    assert ceil_log2_inv(0.9) == 1


def test_thresholds_validate():
    assert BoostThresholds.from_deltas(1 / 8, 1 / 64) == BoostThresholds(3, 6)
    for bad in [(0.5, 0.1), (0.1, 0.0), (-1, 0.1)]:
        with pytest.raises(ContractViolation):
            BoostThresholds.from_deltas(*bad)


def test_boost_margin_noiseless():
    assert boost_margin(lambda: True, 3, 5) is True
    assert boost_margin(lambda: False, 3, 5) is False
    calls = []
    boost_margin(lambda: calls.append(1) or True, 4, 1)
    assert len(calls) == 4


def test_boost_prob_false_positive_rate():
    # a test that is really false but says true w.p. 1/3: wrong "True" is the walk
    # with p = 1/3 reaching +up before -down
    rng = random.Random(3)
    trials = 20_000
    got = sum(boost_prob(lambda: rng.random() < 1 / 3, 1 / 8, 1 / 64) for _ in range(trials))
    _, win, _ = gambler_ruin(1 / 3, 6, 9)
    assert abs(got / trials - win) <= 3 * binom_sigma(win, trials)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 40), unique=True, min_size=1, max_size=12), st.data())
def test_noiseless_search_is_exact(values, data):
    X = line_instance(values)
    o = NoisyOracle(X, 0.0)
    bps = sorted(X.ids[1:], key=lambda i: values[i])
    target = 0
    idx = noisy_search_index(target, 0, bps, 0.1, o)
    assert idx == locate([values[b] for b in bps], values[target])


def test_search_hits_breakpoints_and_gaps():
    values = [10, 20, 30, 15, 20, 35, 5]
    X = line_instance(values)
    o = NoisyOracle(X, 0.0)
    bps = [0, 1, 2]  # 10, 20, 30
    assert noisy_search_index(3, 0, bps, 0.1, o) == 2   # 15 in (10, 20)
    assert noisy_search_index(4, 0, bps, 0.1, o) == 3   # 20 == breakpoint 20
    assert noisy_search_index(5, 0, bps, 0.1, o) == 6   # 35 beyond the last
    assert noisy_search_index(6, 0, bps, 0.1, o) == 0   # 5 before the first
    assert noisy_search_index(6, 0, [], 0.1, o) == 0
    cell = noisy_search(4, 0, bps, 0.1, o)
    assert cell.kind == SINGLETON and cell.lo == 20 and cell.lo_id == 1
    with pytest.raises(ContractViolation):
        noisy_search_index(6, 0, bps, 0.0, o)


def test_search_steps_grow_with_log():
    assert search_steps(1, 0.5) == 4  # ceil(1.25 * log2(6))
    assert search_steps(31, 0.01) > search_steps(31, 0.1) > search_steps(3, 0.1)


def test_noisy_search_error_small_case():
    values = list(range(0, 40, 2)) + [13]
    X = line_instance(values)
    bps = list(range(20))
    wrong = 0
    trials = 1500
    for seed in range(trials):
        o = NoisyOracle(X, 1 / 3, seed)
        wrong += noisy_search_index(20, 0, bps, 0.05, o) != 14
    assert wrong / trials <= 0.05 + 3 * binom_sigma(0.05, trials)


def test_insertion_slot():
    assert [insertion_slot(c) for c in range(5)] == [0, 1, 1, 2, 2]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 30), min_size=0, max_size=20))
def test_noiseless_sort_and_dedupe(values):
    X = line_instance(values) if values else None
    if X is None:
        return
    o = NoisyOracle(X, 0.0)
    order = noisy_sort(X.ids, 0, 0.1, o)
    assert sorted(order) == X.ids
    assert [values[i] for i in order] == sorted(values)
    kept = dedupe_sorted(order, 0, 0.1, o)
    assert [values[i] for i in kept] == sorted(set(values))


def test_noisy_sort_is_usually_perfect():
    rng = random.Random(0)
    values = rng.sample(range(1000), 24)
    X = line_instance(values)
    target = sorted(X.ids, key=lambda i: values[i])
    trials = 150
    ok = sum(noisy_sort(X.ids, 0, 0.1, NoisyOracle(X, 1 / 3, s)) == target for s in range(trials))
    assert ok / trials >= 0.9 - 3 * binom_sigma(0.9, trials)
