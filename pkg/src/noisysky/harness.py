"""Seeded experiment runner: trials, sweeps, CSV output and analytic references."""
from __future__ import annotations

import csv
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

from scipy.stats import beta

from .errors import ContractViolation
from .geometry import Instance, skyline_exact
from .instances import gen_fixed_skyline, gen_uniform
from .oracle import NoisyOracle, derive_seed
from .skyline import (PHASES, AlgoConfig, guess_skyline_high_dim, guess_skyline_low_dim, sky_gm,
                      skyline_high_dim, skyline_low_dim)

# -- analytic reference ------------------------------------------------------


def gambler_ruin(p: float, s: int, b: int) -> tuple[float, float, float]:
    """(ruin, win, expected steps) for a +-1 walk started at ``s``, absorbed at 0 and ``b``.

    ``p`` is the probability of a +1 step.
    """
    if not 0.0 < p < 1.0 or p == 0.5:
        raise ContractViolation(f"p must lie in (0, 1) and differ from 1/2, got {p}")
    if not 0 <= s <= b:
        raise ContractViolation(f"need 0 <= s <= b, got s={s} b={b}")
    if s == 0:
        return 1.0, 0.0, 0.0
    if s == b:
        return 0.0, 1.0, 0.0
    r = (1.0 - p) / p
    if r < 1.0:
        win = (1.0 - r ** s) / (1.0 - r ** b)
    else:  # same formula rewritten in 1/r to avoid overflow
        t = 1.0 / r
        win = t ** (b - s) * (1.0 - t ** s) / (1.0 - t ** b)
    ruin = 1.0 - win
    steps = s / (1.0 - 2.0 * p) - (b / (1.0 - 2.0 * p)) * win
    return ruin, win, steps


def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval for a success probability."""
    if trials <= 0:
        return 0.0, 1.0
    a = (1.0 - level) / 2.0
    lo = 0.0 if successes == 0 else float(beta.ppf(a, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta.ppf(1.0 - a, successes + 1, trials - successes))
    return lo, hi


# -- algorithms and families -------------------------------------------------

AlgoFn = Callable[[Instance, float, NoisyOracle, int], set]


def _test_cfg() -> AlgoConfig:
    return AlgoConfig.test_mode()


ALGORITHMS: dict[str, AlgoFn] = {
    "sky_gm": lambda X, delta, o, k: sky_gm(X, delta, o),
    "skyline_high_dim": lambda X, delta, o, k: skyline_high_dim(k, X, delta, o),
    "guess_skyline_high_dim": lambda X, delta, o, k: guess_skyline_high_dim(X, delta, o),
    "skyline_low_dim": lambda X, delta, o, k: skyline_low_dim(k, X, delta, AlgoConfig(), o),
    "skyline_low_dim_test": lambda X, delta, o, k: skyline_low_dim(k, X, delta, _test_cfg(), o),
    "guess_skyline_low_dim": lambda X, delta, o, k: guess_skyline_low_dim(X, delta, AlgoConfig(), o),
    "guess_skyline_low_dim_test": lambda X, delta, o, k: guess_skyline_low_dim(X, delta, _test_cfg(), o),
}
"""The ``k``-taking algorithms are called with the true skyline size."""

FAMILIES = ("uniform", "fixed_skyline")


def make_instance(family: str, n: int, d: int, k: int | None, seed: int) -> Instance:
    if family == "uniform":
        return gen_uniform(n, d, seed)
    if family == "fixed_skyline":
        if k is None:
            raise ContractViolation("the fixed_skyline family needs k")
        return gen_fixed_skyline(n, d, k, seed)
    raise ContractViolation(f"unknown instance family {family!r}; choose from {FAMILIES}")


def run_algorithm(name: str, X: Instance, delta: float, oracle: NoisyOracle) -> set[int]:
    try:
        fn = ALGORITHMS[name]
    except KeyError:
        raise ContractViolation(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None
    truth = X.meta.get("skyline")
    k = len(truth) if truth is not None else len(skyline_exact(X))
    return fn(X, delta, oracle, k)


# -- records -----------------------------------------------------------------

PHASE_COLUMNS = tuple(f"q_{p}" for p in ("main",) + PHASES)
TRIAL_COLUMNS = ("algorithm", "master_seed", "trial", "n", "d", "true_k", "delta", "flip_prob",
                 "queries", "correct", "wall_ms") + PHASE_COLUMNS + ("error",)
SUMMARY_COLUMNS = ("algorithm", "family", "n", "d", "k", "trials", "mean_true_k", "mean_queries",
                   "std_queries", "successes", "success_rate", "ci_low", "ci_high", "errors")


@dataclass
class TrialRecord:
    algorithm: str
    master_seed: int
    trial: int
    n: int
    d: int
    true_k: int
    delta: float
    flip_prob: float
    queries: int
    correct: bool
    wall_ms: float
    phases: dict = field(default_factory=dict)
    error: str = ""
    output: list = field(default_factory=list)

    def row(self) -> list:
        base = [self.algorithm, self.master_seed, self.trial, self.n, self.d, self.true_k,
                repr(self.delta), repr(self.flip_prob), self.queries, int(self.correct),
                f"{self.wall_ms:.3f}"]
        return base + [self.phases.get(c[2:], 0) for c in PHASE_COLUMNS] + [self.error]

    def to_json(self, include_wall: bool = True) -> dict:
        doc = asdict(self)
        if not include_wall:
            doc.pop("wall_ms")
        return doc


def execute(algorithm: str, X: Instance, delta: float, flip_prob: float, oracle_seed: int,
            master_seed: int = 0, trial: int = 0) -> TrialRecord:
    """Run one algorithm on one instance with a fresh oracle and score it."""
    truth = set(X.meta["skyline"]) if "skyline" in X.meta else skyline_exact(X)
    oracle = NoisyOracle(X, flip_prob, oracle_seed)
    error, out = "", set()
    start = time.perf_counter()
    try:
        out = run_algorithm(algorithm, X, delta, oracle)
    except ContractViolation as exc:
        error = f"contract violation: {exc}"
    wall = (time.perf_counter() - start) * 1000.0
    phases = oracle.phase_counts()
    if sum(phases.values()) != oracle.query_count:
        raise AssertionError("phase counts do not add up to the query total")
    return TrialRecord(algorithm, master_seed, trial, X.n, X.dim, len(truth), delta, flip_prob,
                       oracle.query_count, not error and out == truth, wall, phases, error,
                       sorted(out))


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """A grid of (n, d, k) cells, each run for ``trials`` seeded trials."""

    algorithm: str
    family: str = "uniform"
    n: tuple = (64,)
    d: tuple = (2,)
    k: tuple = ()
    delta: float = 0.1
    flip_prob: float = 1 / 3
    trials: int = 10
    master_seed: int = 0
    output: str = "trials.csv"
    workers: int = 1

    def __post_init__(self):
        for name in ("n", "d", "k"):
            val = getattr(self, name)
            object.__setattr__(self, name, tuple(int(v) for v in (val if isinstance(val, (list, tuple)) else [val])))
        if self.algorithm not in ALGORITHMS:
            raise ContractViolation(f"unknown algorithm {self.algorithm!r}; choose from {sorted(ALGORITHMS)}")
        if self.family not in FAMILIES:
            raise ContractViolation(f"unknown instance family {self.family!r}; choose from {FAMILIES}")
        if self.family == "fixed_skyline" and not self.k and self.n and self.d:
            raise ContractViolation("the fixed_skyline family needs a k grid")
        if self.trials < 0:
            raise ContractViolation(f"trials must be >= 0, got {self.trials}")

    @classmethod
    def from_mapping(cls, doc: dict) -> "SweepSpec":
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ContractViolation(f"unknown sweep keys: {sorted(extra)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "SweepSpec":
        """Flat key/value config; ``.json`` is read as JSON, anything else as YAML."""
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ContractViolation(f"cannot read sweep config {path}: {exc}") from exc
        if path.suffix == ".json":
            doc = json.loads(text)
        else:
            import yaml
            doc = yaml.safe_load(text)
        if not isinstance(doc, dict):
            raise ContractViolation(f"sweep config {path} must be a key/value mapping")
        return cls.from_mapping(doc)

    def cells(self) -> list[tuple[int, int, int | None]]:
        ks = self.k if self.family == "fixed_skyline" else (None,)
        return [(n, d, k) for n in self.n for d in self.d for k in ks]

    @property
    def summary_path(self) -> Path:
        out = Path(self.output)
        return out.with_name(out.stem + "_summary" + (out.suffix or ".csv"))


def trial_seeds(master_seed: int, n: int, d: int, k: int | None, trial: int) -> tuple[int, int]:
    """(instance seed, oracle seed) for one trial of one cell."""
    inst = derive_seed(master_seed, n, d, 0 if k is None else k, trial)
    return inst, derive_seed(inst, 1)


def run_trial(spec: SweepSpec, cell: tuple, trial: int) -> TrialRecord:
    n, d, k = cell
    inst_seed, oracle_seed = trial_seeds(spec.master_seed, n, d, k, trial)
    X = make_instance(spec.family, n, d, k, inst_seed)
    return execute(spec.algorithm, X, spec.delta, spec.flip_prob, oracle_seed, spec.master_seed, trial)


def _run_job(job):
    spec, cell, trial = job
    return run_trial(spec, cell, trial)


def summarize(spec: SweepSpec, cell: tuple, records: list[TrialRecord]) -> list:
    n, d, k = cell
    qs = [r.queries for r in records]
    wins = sum(r.correct for r in records)
    lo, hi = clopper_pearson(wins, len(records))
    return [spec.algorithm, spec.family, n, d, "" if k is None else k, len(records),
            statistics.fmean(r.true_k for r in records) if records else "",
            statistics.fmean(qs) if qs else "", statistics.pstdev(qs) if qs else "",
            wins, wins / len(records) if records else "", lo, hi, sum(bool(r.error) for r in records)]


def run_sweep(spec: SweepSpec) -> tuple[list[TrialRecord], Path, Path]:
    """Run every cell, write the trial CSV and the summary CSV; returns (records, paths)."""
    jobs = [(spec, cell, t) for cell in spec.cells() for t in range(spec.trials)]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            records = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * spec.workers))))
    else:
        records = [_run_job(job) for job in jobs]

    out, summary = Path(spec.output), spec.summary_path
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRIAL_COLUMNS)
            w.writerows(r.row() for r in records)
        with summary.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SUMMARY_COLUMNS)
            for i, cell in enumerate(spec.cells()):
                w.writerow(summarize(spec, cell, records[i * spec.trials:(i + 1) * spec.trials]))
    except OSError as exc:
        raise OSError(f"writing sweep output to {out}: {exc}") from exc
    return records, out, summary


def success_sigma(rate: float, trials: int) -> float:
    return math.sqrt(max(rate * (1.0 - rate), 0.0) / trials) if trials else 0.0
