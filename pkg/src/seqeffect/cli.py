"""Command-line front end: ``seqeffect check | trace | simulate``.

Exit codes: 0 pass, 2 input error, 3 violation found, 4 precondition failure.
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys

import numpy as np

from . import __version__
from .axioms import BUILTIN_CANDIDATES, fuzz_candidate, unitary_twisted
from .channels import DiscretePOVM, outcome_probabilities, instrument_from_povm, sample_outcome, simulate_measurements
from .classify import regularize_invertible, trace_theorem_steps
from .effects import as_density, as_effect
from .errors import NotInvertible, SeqEffectError, UnclassifiedMap
from .jsonio import dumps, load_matrix, load_povm
from .matcore import ToleranceConfig, check_dim, identity, op_norm, random_effect
from .rng import SplitMix64

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VIOLATION = 3
EXIT_PRECONDITION = 4


class InputError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("SEQEFFECT_SEED")
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"SEQEFFECT_SEED must be an integer, got {raw!r}") from None


def _parse_dims(text: str) -> list:
    try:
        dims = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--dims must be a comma-separated list of integers, got {text!r}") from None
    if not dims:
        raise InputError("--dims is empty")
    return [check_dim(d) for d in dims]


def _tolerances(args) -> ToleranceConfig:
    return ToleranceConfig(
        hermit_tol=args.hermit_tol,
        psd_tol=args.psd_tol,
        eq_tol=args.eq_tol,
        rank_tol=args.rank_tol,
    )


def _resolve_candidate(text: str, tol: ToleranceConfig):
    if text in BUILTIN_CANDIDATES:
        return BUILTIN_CANDIDATES[text], {"name": text}
    if text.startswith("unitary:"):
        path = text.split(":", 1)[1]
        U = load_matrix(path)
        defect = op_norm(U @ U.conj().T - identity(U.shape[0]))
        if defect > tol.eq_tol:
            raise InputError(f"{path}: matrix is not unitary (||U U* - I|| = {defect:.3e})")
        return unitary_twisted(U), {"name": "unitary", "path": path, "U": U}
    raise InputError(f"unknown candidate {text!r}; expected standard, transpose, jordan or unitary:<path>")


def _emit(args, command: str, config: dict, result: dict, exit_code: int) -> int:
    report = {
        "tool": "seqeffect",
        "version": __version__,
        "command": command,
        "config": config,
    }
    if not args.deterministic:
        report["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    report["exit_code"] = exit_code
    report["result"] = result
    text = dumps(report) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return exit_code


def _base_config(args) -> dict:
    return {
        "seed": args.seed,
        "tolerances": _tolerances(args).to_dict(),
        "deterministic": args.deterministic,
        "out": args.out,
    }


def cmd_check(args) -> int:
    tol = _tolerances(args)
    dims = _parse_dims(args.dims)
    prod, cand = _resolve_candidate(args.candidate, tol)
    if "U" in cand and any(d != cand["U"].shape[0] for d in dims):
        raise InputError(f"twist unitary has dim {cand['U'].shape[0]}, which does not match --dims {dims}")
    if args.trials < 1:
        raise InputError("--trials must be >= 1")
    config = _base_config(args) | {"candidate": cand, "dims": dims, "trials": args.trials}
    report = fuzz_candidate(prod, dims, args.trials, args.seed, tol)
    code = EXIT_OK if report.passed else EXIT_VIOLATION
    for r in report.reports:
        status = "pass" if r.passed else "FAIL"
        print(f"[{status}] dim={r.dim} {r.condition_id:<12} max_residual={r.max_residual:.3e}", file=sys.stderr)
    return _emit(args, "check", config, report.to_dict(), code)


def cmd_trace(args) -> int:
    tol = _tolerances(args)
    prod, cand = _resolve_candidate(args.candidate, tol)
    if args.effect:
        A = as_effect(load_matrix(args.effect), tol)
        source = {"effect": args.effect}
    elif args.random:
        dim = check_dim(args.dim)
        A = random_effect(dim, args.seed)
        source = {"random": True, "dim": dim}
    else:
        raise InputError("trace needs --effect <path> or --random --dim <d>")
    check_dim(A.shape[0])
    if args.regularize is not None:
        if args.regularize < 1:
            raise InputError("--regularize must be a positive integer")
        A = regularize_invertible(A, args.regularize)
    config = _base_config(args) | {
        "candidate": cand,
        "source": source,
        "regularize": args.regularize,
        "samples": args.samples,
    }
    try:
        report = trace_theorem_steps(prod, A, tol, samples=args.samples, seed=args.seed)
    except NotInvertible as exc:
        result = {"error": "NotInvertible", "message": str(exc), "suggestion": "rerun with --regularize <i>", "A": A}
        print(f"error: {exc} (try --regularize 4)", file=sys.stderr)
        return _emit(args, "trace", config, result, EXIT_PRECONDITION)
    except UnclassifiedMap as exc:
        result = {"error": "UnclassifiedMap", "message": str(exc), "A": A}
        return _emit(args, "trace", config, result, EXIT_VIOLATION)
    result = report.to_dict() | {"A": A}
    for s in report.steps:
        status = "pass" if s.passed else "FAIL"
        print(f"[{status}] {s.name:<20} residual={s.residual:.3e}", file=sys.stderr)
    return _emit(args, "trace", config, result, EXIT_OK if report.passed else EXIT_VIOLATION)


def cmd_simulate(args) -> int:
    tol = _tolerances(args)
    effects = load_povm(args.povm)
    povm = DiscretePOVM(tuple(effects), tol=tol)
    rho = as_density(load_matrix(args.state), tol)
    if rho.shape[0] != povm.dim:
        raise InputError(f"state has dim {rho.shape[0]}, POVM has dim {povm.dim}")
    if args.steps < 1 or args.runs < 1:
        raise InputError("--steps and --runs must be >= 1")
    config = _base_config(args) | {
        "povm": args.povm,
        "state": args.state,
        "steps": args.steps,
        "runs": args.runs,
    }
    root = SplitMix64(args.seed)
    trajectory = simulate_measurements(povm, rho, args.steps, root.spawn(0), tol)
    counts = np.zeros((args.steps, len(povm)), dtype=int)
    for rec_step, rec in enumerate(trajectory):
        counts[rec_step, rec["outcome"]] += 1
    for run in range(1, args.runs):
        for rec_step, rec in enumerate(simulate_measurements(povm, rho, args.steps, root.spawn(run), tol)):
            counts[rec_step, rec["outcome"]] += 1
    initial = outcome_probabilities(instrument_from_povm(povm), rho)
    result = {
        "outcomes": [rec["outcome"] for rec in trajectory],
        "trajectory": [
            {"step": i, "outcome": rec["outcome"], "probabilities": rec["probabilities"], "state": rec["state"]}
            for i, rec in enumerate(trajectory)
        ],
        "initial_probabilities": initial,
        "outcome_counts": counts.tolist(),
        "first_step_frequencies": (counts[0] / args.runs).tolist(),
    }
    return _emit(args, "simulate", config, result, EXIT_OK)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $SEQEFFECT_SEED or 42)")
    common.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp from the report")
    common.add_argument("--hermit-tol", type=float, default=1e-10)
    common.add_argument("--psd-tol", type=float, default=1e-9)
    common.add_argument("--eq-tol", type=float, default=1e-8)
    common.add_argument("--rank-tol", type=float, default=1e-7)

    parser = argparse.ArgumentParser(prog="seqeffect", description="Sequential product of quantum effects.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="fuzz a candidate product against the conditions")
    p.add_argument("--candidate", required=True, help="standard | transpose | jordan | unitary:<U.json>")
    p.add_argument("--dims", default="2", help="comma-separated dimensions, e.g. 2,3")
    p.add_argument("--trials", type=int, default=500)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("trace", parents=[common], help="replay the uniqueness proof for one effect")
    p.add_argument("--candidate", default="standard")
    p.add_argument("--effect", help="effect matrix JSON")
    p.add_argument("--random", action="store_true", help="draw a random effect from --seed")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--regularize", type=int, default=None, metavar="I", help="use (1+1/I)^-1 (A + I/I_d)")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("simulate", parents=[common], help="sequential Lüders measurements of a POVM")
    p.add_argument("--povm", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--runs", type=int, default=1, help="independent repetitions for outcome counts")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.seed < 0:
            raise InputError("--seed must be non-negative")
        return args.func(args)
    except (InputError, SeqEffectError, OSError, ValueError) as exc:
        print(f"seqeffect {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
