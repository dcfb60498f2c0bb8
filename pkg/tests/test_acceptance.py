"""Acceptance suite: eight Monte-Carlo / property criteria at their stated tolerances.

Each test prints one ``[PASS]``/``[FAIL]`` line (visible even under pytest's
output capture) and then asserts.  Everything is seeded, so a rerun reproduces
the same numbers.
"""
from __future__ import annotations

import random
import statistics
import time

from noisysky.dominance import (dominates_noisy, in_bucket, is_empty, lex_noisy, max_lex,
                                max_lex_iteration_cap, set_dominates)
from noisysky.geometry import Bucket, Instance, id_cell, locate, skyline_exact
from noisysky.harness import gambler_ruin
from noisysky.instances import (decode_skyline_to_answer, gen_fixed_skyline, gen_null_vectors,
                                gen_uniform, reduce_to_skyline)
from noisysky.oracle import NoisyOracle, derive_seed
from noisysky.primitives import BoostThresholds, boost_prob, noisy_search_index, noisy_sort
from noisysky.skyline import (AlgoConfig, LowDimTrace, assignment_load, guess_skyline_high_dim,
                              guess_skyline_low_dim, low_dim_parameters, sky_gm, skyline_high_dim,
                              skyline_low_dim)

from .conftest import binom_sigma

FLIP = 1 / 3


def _emit(report, number, title, ok, detail, started):
    report(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail} "
           f"({time.perf_counter() - started:.1f}s)")


# -- 1 -----------------------------------------------------------------------

C1_GRID = [(n, d) for n in (16, 64, 256) for d in (2, 3, 5)]
C1_K = (1, 2, 3, 5, 8)


def _c1_instances():
    """100 instances per family, cycling through the (n, d) grid."""
    for i in range(100):
        n, d = C1_GRID[i % len(C1_GRID)]
        yield "uniform", gen_uniform(n, d, derive_seed(101, i))
        k = min(n, C1_K[(i // len(C1_GRID)) % len(C1_K)])
        yield "fixed_skyline", gen_fixed_skyline(n, d, k, derive_seed(102, i))


def test_criterion_1_noiseless_totality(report):
    started = time.perf_counter()
    test_cfg = AlgoConfig.test_mode()
    algos = {
        "sky_gm": lambda X, k, o: sky_gm(X, 0.1, o),
        "skyline_high_dim": lambda X, k, o: skyline_high_dim(k, X, 0.1, o),
        "guess_skyline_high_dim": lambda X, k, o: guess_skyline_high_dim(X, 0.1, o),
        "skyline_low_dim": lambda X, k, o: skyline_low_dim(k, X, 0.1, AlgoConfig(), o),
        "skyline_low_dim[test_mode]": lambda X, k, o: skyline_low_dim(k, X, 0.1, test_cfg, o),
        "guess_skyline_low_dim": lambda X, k, o: guess_skyline_low_dim(X, 0.1, AlgoConfig(), o),
    }
    failures = []
    runs = 0
    for i, (family, X) in enumerate(_c1_instances()):
        truth = skyline_exact(X)
        assert truth == set(X.meta["skyline"])
        for name, fn in algos.items():
            got = fn(X, len(truth), NoisyOracle(X, 0.0, seed=i))
            runs += 1
            if got != truth:
                failures.append((name, family, X.n, X.dim, X.meta["seed"]))
    ok = not failures
    _emit(report, 1, "noiseless totality", ok,
          f"{runs - len(failures)}/{runs} runs exact over 200 instances x {len(algos)} algorithms",
          started)
    assert ok, failures[:10]


# -- 2 -----------------------------------------------------------------------

def test_criterion_2_primitive_error_rates(report):
    started = time.perf_counter()
    pair = Instance.from_coords([(0,), (1,)])
    lines, ok = [], True

    for d1, d2 in [(1 / 8, 1 / 8), (1 / 64, 1 / 64), (1 / 8, 1 / 64)]:
        o = NoisyOracle(pair, FLIP, seed=derive_seed(2, int(1 / d1), int(1 / d2)))
        trials = 100_000
        # the test is true (0 < 1), so a False verdict is a false negative
        fn = sum(not boost_prob(lambda: o.compare(0, 1, 0), d1, d2) for _ in range(trials))
        th = BoostThresholds.from_deltas(d1, d2)
        ruin, _, _ = gambler_ruin(2 / 3, th.down, th.up + th.down)
        rate = fn / trials
        good = abs(rate - ruin) <= 3 * binom_sigma(ruin, trials)
        ok &= good
        lines.append(f"boost({d1:.4g},{d2:.4g}) FN {rate:.5f} vs {ruin:.5f}")

    m, delta, trials = 31, 0.01, 10_000
    X = Instance.from_coords([(2 * (j + 1),) for j in range(m)] + [(v,) for v in range(0, 2 * m + 3)])
    bps = list(range(m))
    values = [2 * (j + 1) for j in range(m)]
    rng = random.Random(21)
    wrong = 0
    for t in range(trials):
        target = m + rng.randrange(2 * m + 3)
        o = NoisyOracle(X, FLIP, seed=derive_seed(22, t))
        wrong += noisy_search_index(target, 0, bps, delta, o) != locate(values, X.points[target].coords[0])
    rate = wrong / trials
    good = rate <= delta + 3 * binom_sigma(delta, trials)
    ok &= good
    lines.append(f"search m=31 err {rate:.4f} <= {delta}+3s")

    m, delta, trials = 64, 0.05, 2000
    perfect = 0
    for t in range(trials):
        Y = gen_uniform(m, 1, derive_seed(23, t))
        order = sorted(Y.ids, key=lambda i: Y.points[i].coords[0])
        perfect += noisy_sort(Y.ids, 0, delta, NoisyOracle(Y, FLIP, seed=derive_seed(24, t))) == order
    rate = perfect / trials
    good = rate >= 1 - delta - 3 * binom_sigma(1 - delta, trials)
    ok &= good
    lines.append(f"sort m=64 perfect {rate:.4f} >= 0.95-3s")

    _emit(report, 2, "primitive error rates", ok, "; ".join(lines), started)
    assert ok, lines


# -- 3 -----------------------------------------------------------------------

def _dominance_pairs(rng, d=4):
    """(coords p, coords q, p dominates q) with the hard cases: domination with
    many ties, and non-domination by a single coordinate."""
    q = [rng.randrange(10, 20) for _ in range(d)]
    if rng.random() < 0.5:
        p = [x + rng.choice((0, 0, 1)) for x in q]
        return p, q, True
    p = [x + rng.choice((0, 1)) for x in q]
    j = rng.randrange(d)
    p[j] = q[j] - 1
    return p, q, False


def test_criterion_3_dominance_subroutines(report):
    started = time.perf_counter()
    rng = random.Random(3)
    lines, ok = [], True
    bound = 1 / 16

    def check(name, wrong, trials, budget):
        nonlocal ok
        rate = wrong / trials
        good = rate <= budget + 3 * binom_sigma(budget, trials)
        ok &= good
        lines.append(f"{name} {rate:.4f}<={budget:.4g}+3s")

    trials = 10_000
    wrong = 0
    for t in range(trials):
        p, q, truth = _dominance_pairs(rng)
        X = Instance.from_coords([p, q])
        wrong += dominates_noisy(0, 1, NoisyOracle(X, FLIP, seed=derive_seed(31, t))) != truth
    check("dominates", wrong, trials, bound)

    wrong = 0
    for t in range(trials):
        # equal prefix, first difference at a random coordinate (late ones are hardest)
        d = 4
        base = [rng.randrange(10) for _ in range(d)]
        other = list(base)
        j = rng.randrange(d)
        other[j] += rng.choice((-1, 1))
        for i in range(j + 1, d):
            other[i] = rng.randrange(10)
        X = Instance.from_coords([base, other])
        truth = (tuple(base), 0) > (tuple(other), 1)
        wrong += lex_noisy(0, 1, NoisyOracle(X, FLIP, seed=derive_seed(32, t))) != truth
    check("lex", wrong, trials, bound)

    # buckets over breakpoints 10, 20, 30 (ids 0..2) in each of 4 dimensions
    wrong = 0
    bps = [0, 1, 2]
    bp_vals = [10, 20, 30]
    for t in range(trials):
        key = [rng.randrange(7) for _ in range(4)]
        inside = rng.random() < 0.5
        coords = []
        for c in key:
            if c % 2:
                coords.append(bp_vals[c // 2])
            else:
                lo = bp_vals[c // 2 - 1] if c else 0
                coords.append(lo + rng.randrange(1, 10))
        if not inside:
            # move one coordinate into a neighbouring cell
            j = rng.randrange(4)
            coords[j] = rng.choice([v for v in range(41) if abs(locate(bp_vals, v) - key[j]) == 1])
        rows = [(v,) * 4 for v in bp_vals] + [coords]
        X = Instance.from_coords(rows)
        truth = all(locate(bp_vals, x) == c for x, c in zip(coords, key))
        B = Bucket([id_cell(bps, c) for c in key])
        wrong += in_bucket(3, B, NoisyOracle(X, FLIP, seed=derive_seed(33, t))) != truth
    check("in_bucket", wrong, trials, bound)

    # set_dominates: exactly one of five members dominates q
    trials = 2000
    d1 = d2 = 0.05
    fn = fp = 0
    for t in range(trials):
        q = [rng.randrange(10, 20) for _ in range(4)]
        members = []
        for _ in range(4):
            m = [x + 1 for x in q]
            j = rng.randrange(4)
            m[j] = q[j] - 1  # fails to dominate by one coordinate
            members.append(m)
        dominator = [x + rng.choice((0, 1)) for x in q]
        X = Instance.from_coords([q, dominator] + members)
        o = NoisyOracle(X, FLIP, seed=derive_seed(34, t))
        fn += not set_dominates([1, 2, 3, 4, 5], 0, d1, d2, o)
        fp += set_dominates([2, 3, 4, 5], 0, d1, d2, o)
    check("set_dominates FN", fn, trials, d2)
    check("set_dominates FP", fp, trials, d1)

    # is_empty: bucket (10,20) x [20] x (20,30) x (30,inf); five hard near-misses, maybe one inside
    key = (2, 3, 4, 6)
    B = Bucket([id_cell(bps, c) for c in key])
    near_misses = [(10, 20, 25, 31), (15, 19, 25, 31), (15, 20, 30, 35), (15, 21, 25, 35), (20, 20, 21, 40)]
    hit = (15, 20, 25, 31)
    rows = [(v,) * 4 for v in bp_vals] + near_misses + [hit]
    X = Instance.from_coords(rows)
    miss_ids, hit_id = list(range(3, 8)), 8
    wrong_true = wrong_false = 0
    for t in range(trials):
        o = NoisyOracle(X, FLIP, seed=derive_seed(35, t))
        wrong_true += is_empty(B, miss_ids + [hit_id], d1, d2, o)
        wrong_false += not is_empty(B, miss_ids, d1, d2, o)
    check("is_empty wrong-true", wrong_true, trials, d1)
    check("is_empty wrong-false", wrong_false, trials, d2)

    _emit(report, 3, "dominance subroutines", ok, "; ".join(lines), started)
    assert ok, lines


# -- 4 -----------------------------------------------------------------------

def test_criterion_4_max_lex(report):
    started = time.perf_counter()
    trials, delta, size = 2000, 0.05, 16
    cap = max_lex_iteration_cap(size, delta)
    hits = 0
    worst_iter = 0
    noiseless_in_skyline = True
    for t in range(trials):
        X = gen_fixed_skyline(size, 3, 1 + t % 6, derive_seed(41, t))
        P = [p.coords for p in X.points]
        p = random.Random(t).randrange(size)
        best = max((q for q in X.ids if all(a >= b for a, b in zip(P[q], P[p]))), key=lambda q: P[q])
        stats = {}
        hits += max_lex(p, X.ids, delta, NoisyOracle(X, FLIP, seed=derive_seed(42, t)), stats) == best
        worst_iter = max(worst_iter, stats["iterations"])
        clean = max_lex(p, X.ids, delta, NoisyOracle(X, 0.0), stats)
        worst_iter = max(worst_iter, stats["iterations"])
        noiseless_in_skyline &= clean in set(X.meta["skyline"]) and clean == best
    rate = hits / trials
    ok = rate >= 0.95 - 3 * binom_sigma(0.95, trials) and noiseless_in_skyline and worst_iter <= cap
    _emit(report, 4, "max_lex", ok,
          f"correct {rate:.4f} >= 0.95-3s; noiseless in skyline: {noiseless_in_skyline}; "
          f"max iterations {worst_iter} <= {cap}", started)
    assert ok


# -- 5 -----------------------------------------------------------------------

def test_criterion_5_end_to_end(report):
    started = time.perf_counter()
    n, d, k, delta = 128, 3, 4, 0.1
    res = {}
    for name, trials, fn in [
        ("guess_skyline_high_dim", 300, lambda X, o: guess_skyline_high_dim(X, delta, o)),
        ("sky_gm", 500, lambda X, o: sky_gm(X, delta, o)),
    ]:
        hits = 0
        for t in range(trials):
            X = gen_fixed_skyline(n, d, k, derive_seed(51, t))
            hits += fn(X, NoisyOracle(X, FLIP, seed=derive_seed(52, t))) == set(X.meta["skyline"])
        res[name] = (hits / trials, trials)
    ok = all(rate >= 0.9 - 3 * binom_sigma(0.9, tr) for rate, tr in res.values())
    _emit(report, 5, "end-to-end noisy correctness", ok,
          "; ".join(f"{name} {rate:.3f} over {tr}" for name, (rate, tr) in res.items()), started)
    assert ok, res


# -- 6 -----------------------------------------------------------------------

def _mean_queries(n, d, k, trials, tag):
    qs = []
    for t in range(trials):
        X = gen_fixed_skyline(n, d, k, derive_seed(61, tag, n, k, t))
        o = NoisyOracle(X, FLIP, seed=derive_seed(62, tag, n, k, t))
        guess_skyline_high_dim(X, 0.1, o)
        qs.append(o.query_count)
    return statistics.fmean(qs)


def test_criterion_6_query_scaling(report):
    started = time.perf_counter()
    trials = 20
    by_n = {n: _mean_queries(n, 3, 4, trials, 1) for n in (128, 256, 512)}
    ratios = [by_n[256] / by_n[128], by_n[512] / by_n[256]]
    by_k = {k: _mean_queries(256, 3, k, trials, 2) for k in (2, 4, 8)}
    ok_n = all(1.7 <= r <= 2.5 for r in ratios)
    ok_k = by_k[2] < by_k[4] < by_k[8]
    ok = ok_n and ok_k
    _emit(report, 6, "query scaling", ok,
          f"n-ratios {ratios[0]:.3f}, {ratios[1]:.3f} in [1.7, 2.5]; "
          f"mean queries k=2,4,8: {by_k[2]:.0f} < {by_k[4]:.0f} < {by_k[8]:.0f}", started)
    assert ok


# -- 7 -----------------------------------------------------------------------

def test_criterion_7_low_dim_branches(report):
    started = time.perf_counter()
    guard_ok = True
    cases = 0
    for n, d, k in [(256, 2, 16), (64, 3, 4), (256, 3, 4), (128, 2, 3)]:
        for s in range(5):
            X = gen_fixed_skyline(n, d, k, derive_seed(71, n, d, s))
            tr = LowDimTrace()
            a = NoisyOracle(X, FLIP, seed=s)
            got = skyline_low_dim(k, X, 0.1, AlgoConfig(), a, trace=tr)
            b = NoisyOracle(X, FLIP, seed=s)
            ref = sky_gm(X, low_dim_parameters(k, d, 0.1, AlgoConfig())[0], b)
            guard_ok &= tr.guard_fired and got == ref and a.query_count == b.query_count
            cases += 1

    n, d, k, trials = 512, 2, 4, 100
    bound = 4 * n / (d * k * k)
    cfg = AlgoConfig.test_mode()
    decent = 0
    phases_ran = True
    for t in range(trials):
        X = gen_fixed_skyline(n, d, k, derive_seed(72, t))
        tr = LowDimTrace()
        o = NoisyOracle(X, FLIP, seed=derive_seed(73, t))
        skyline_low_dim(k, X, 0.1, cfg, o, trace=tr)
        counts = o.phase_counts()
        phases_ran &= (not tr.guard_fired and counts.get("bucketing", 0) > 0
                       and counts.get("elimination", 0) > 0 and tr.sample_size < n)
        decent += assignment_load(tr, X) <= bound
    rate = decent / trials
    ok = guard_ok and phases_ran and rate >= 1 - 1 / k
    _emit(report, 7, "low-dim branches", ok,
          f"guard path == sky_gm path on {cases} seeded cases: {guard_ok}; test_mode phases ran: "
          f"{phases_ran}; decent assignment (<= {bound:.0f} values/interval) in {rate:.2f} >= {1 - 1 / k:.2f}",
          started)
    assert ok


# -- 8 -----------------------------------------------------------------------

def test_criterion_8_lower_bound_construction(report):
    started = time.perf_counter()
    k, d, ell, seeds = 8, 4, 8192, 25
    exact_k = 0
    decoded_ok = True
    collision_free = 0
    for s in range(seeds):
        S = gen_null_vectors(k, ell, derive_seed(81, s))
        X = reduce_to_skyline(S, d, derive_seed(82, s))
        assert X.n == (ell + d - 2) * k // (d - 2)
        sky = skyline_exact(X)
        exact_k += len(sky) == k
        if not X.meta["collision"]:
            collision_free += 1
            decoded_ok &= decode_skyline_to_answer(sky, X.meta) == S.answer
    ok = exact_k >= 20 and decoded_ok
    _emit(report, 8, "lower-bound construction", ok,
          f"exactly k={k} skyline points in {exact_k}/{seeds} seeds (need >= 20); decode exact on "
          f"{collision_free} collision-free seeds: {decoded_ok}", started)
    assert ok
