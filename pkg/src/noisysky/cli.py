"""Command line: ``noisysky {gen,run,sweep,verify}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ContractViolation
from .geometry import Instance, skyline_exact
from .harness import ALGORITHMS, SweepSpec, execute, make_instance, run_sweep
from .instances import gen_null_vectors, reduce_to_skyline


def _cmd_gen(args) -> int:
    if args.family == "null_vectors":
        if args.k is None:
            raise ContractViolation("null_vectors needs --k")
        S = gen_null_vectors(args.k, args.ell, args.seed)
        X = reduce_to_skyline(S, args.d, args.seed)
        X.meta["answer"] = S.answer
        if args.vectors_out:
            S.save(args.vectors_out)
    else:
        if args.n is None:
            raise ContractViolation(f"{args.family} needs --n")
        X = make_instance(args.family, args.n, args.d, args.k, args.seed)
    X.save(args.out)
    print(json.dumps({"path": str(args.out), "n": X.n, "d": X.dim, "skyline": X.meta.get("skyline")}))
    return 0


def _cmd_run(args) -> int:
    X = Instance.load(args.instance)
    rec = execute(args.algorithm, X, args.delta, args.flip_prob, args.seed, master_seed=args.seed)
    print(json.dumps(rec.to_json()))
    if rec.error:
        print(f"error: {rec.error}", file=sys.stderr)
        return 2
    return 0


def _cmd_sweep(args) -> int:
    spec = SweepSpec.load(args.config)
    overrides = {k: v for k, v in (("output", args.out), ("workers", args.workers)) if v is not None}
    if overrides:
        spec = SweepSpec.from_mapping({**spec.__dict__, **overrides})
    records, out, summary = run_sweep(spec)
    print(json.dumps({"trials": len(records), "correct": sum(r.correct for r in records),
                      "trials_csv": str(out), "summary_csv": str(summary)}))
    return 0


def _cmd_verify(args) -> int:
    X = Instance.load(args.instance)
    sky = sorted(skyline_exact(X))
    doc = {"n": X.n, "d": X.dim, "skyline": sky}
    if "skyline" in X.meta:
        doc["matches_meta"] = sky == sorted(X.meta["skyline"])
    print(json.dumps(doc))
    return 0 if doc.get("matches_meta", True) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="noisysky", description="Skyline computation with noisy comparisons.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write an instance as JSON")
    g.add_argument("--family", choices=("uniform", "fixed_skyline", "null_vectors"), default="uniform")
    g.add_argument("--n", type=int)
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--k", type=int, help="skyline size (fixed_skyline) or number of vectors (null_vectors)")
    g.add_argument("--ell", type=int, default=16, help="vector length for null_vectors")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--vectors-out", type=Path, help="also save the null-vectors input here")
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="run one algorithm on an instance file and print the trial record")
    r.add_argument("instance", type=Path)
    r.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="guess_skyline_high_dim")
    r.add_argument("--delta", type=float, default=0.1)
    r.add_argument("--flip-prob", type=float, default=1 / 3)
    r.add_argument("--seed", type=int, default=0, help="oracle seed")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("sweep", help="run a sweep described by a YAML/JSON config")
    s.add_argument("config", type=Path)
    s.add_argument("--out", help="override the trial CSV path")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=_cmd_sweep)

    v = sub.add_parser("verify", help="brute-force skyline of an instance file")
    v.add_argument("instance", type=Path)
    v.set_defaults(func=_cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ContractViolation, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
