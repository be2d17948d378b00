"""Command line interface.

Every command prints one JSON report on stdout (``sweep-werner`` without
``--out`` prints CSV instead); diagnostics go to stderr.  Exit codes:
0 success/converged, 2 input error, 3 budget exceeded, 4 diverging,
5 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time

import numpy as np

from .ensembles import barycenter, smeared_from_density, write_ensemble
from .errors import BoundViolation, BudgetExceeded, InputError, MaxIterations
from .haar import sampler_for, state_block
from .kfunc import EvalConfig, SampleSet, k_closed_single, k_mc, k_on_samples
from .operators import (
    as_density,
    operator_to_dict,
    read_operator,
    write_operator,
)
from .solver import (
    classify_robust_separability,
    solve_bipartite_saa,
    solve_single,
    werner_state,
)

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_DIVERGING, EXIT_INCONCLUSIVE = 0, 2, 3, 4, 5

log = logging.getLogger("contens")


class CommandFailed(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _cfg(args) -> EvalConfig:
    if args.seed is None:
        raise CommandFailed(EXIT_INPUT, f"{args.command}: --seed is required for sampling")
    return EvalConfig(samples=args.samples, seed=args.seed, max_samples=args.max_samples,
                      tolerance=args.tolerance, workers=args.workers)


def cmd_k_eval(args) -> tuple[dict, int]:
    x = read_operator(args.operator)
    if args.closed_form:
        if x.space.is_bipartite:
            raise CommandFailed(EXIT_INPUT, "--closed-form is only valid for single systems")
        ev = k_closed_single(x)
    else:
        ev = k_mc(x, _cfg(args))
    return ev.to_dict(), EXIT_OK


def cmd_normalize(args) -> tuple[dict, int]:
    x = read_operator(args.operator)
    if x.space.is_bipartite:
        samples = SampleSet.for_config(x.space, _cfg(args))
        before = k_on_samples(x, samples)
        y = x.shift(-math.log(before.k_value))
        after = k_on_samples(y, samples)
    else:
        before = k_closed_single(x)
        y = x.shift(-math.log(before.k_value))
        after = k_closed_single(y)
    write_operator(y, args.out)
    return {
        "k_before": before.k_value,
        "k_after": after.k_value,
        "k_stderr": after.k_std_error,
        "method": after.method,
        "operator": operator_to_dict(y),
    }, EXIT_OK


def cmd_solve(args) -> tuple[dict, int]:
    rho = as_density(read_operator(args.density))
    if rho.space.is_bipartite:
        report = solve_bipartite_saa(rho, _cfg(args), max_iter=args.max_iter)
    else:
        try:
            report = solve_single(rho, max_iter=args.max_iter)
        except MaxIterations as exc:
            return {"status": "inconclusive", "reason": str(exc)}, EXIT_INCONCLUSIVE
    code = {"converged": EXIT_OK, "diverging": EXIT_DIVERGING}.get(report.status,
                                                                   EXIT_INCONCLUSIVE)
    return report.to_dict(), code


_VERDICT_EXIT = {
    "robustly_separable": EXIT_OK,
    "not_robustly_separable": EXIT_DIVERGING,
    "inconclusive": EXIT_INCONCLUSIVE,
}


def cmd_classify(args) -> tuple[dict, int]:
    rho = as_density(read_operator(args.density))
    verdict = classify_robust_separability(rho, _cfg(args), max_iter=args.max_iter)
    return verdict.to_dict(), _VERDICT_EXIT[verdict.verdict]


def cmd_smear(args) -> tuple[dict, int]:
    rho = as_density(read_operator(args.density))
    e = smeared_from_density(rho, args.L)
    resid = float(np.max(np.abs(barycenter(e).mean.entries - rho.entries)))
    write_ensemble(e, args.out)
    return {
        "L": args.L,
        "exponent": e.exponent,
        "weights": e.weights.tolist(),
        "barycenter_residual": resid,
    }, EXIT_OK


def _parse_grid(text: str) -> list[float]:
    items = [t for t in text.replace(" ", "").split(",") if t]
    if not items:
        raise CommandFailed(EXIT_INPUT, "sweep-werner: empty --grid")
    try:
        grid = [float(t) for t in items]
    except ValueError as exc:
        raise CommandFailed(EXIT_INPUT, f"sweep-werner: bad --grid: {exc}") from exc
    if any(not 0.0 <= p <= 1.0 for p in grid):
        raise CommandFailed(EXIT_INPUT, "sweep-werner: p must lie in [0, 1]")
    return grid


def cmd_sweep_werner(args) -> tuple[dict | str, int]:
    grid = _parse_grid(args.grid)
    cfg = _cfg(args)
    rows = []
    for p in grid:
        v = classify_robust_separability(werner_state(p), cfg, max_iter=args.max_iter)
        rows.append({"p": p, "ppt_min": v.ppt_min_eigenvalue, "verdict": v.verdict,
                     "solver_norm_final": v.solver_norm_final})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["p", "ppt_min", "verdict", "solver_norm_final"],
                            lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({**r, "solver_norm_final": "" if r["solver_norm_final"] is None
                         else repr(r["solver_norm_final"]),
                         "p": repr(r["p"]), "ppt_min": repr(r["ppt_min"])})
    if args.out is None:
        return buf.getvalue(), EXIT_OK
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    return {"rows": rows}, EXIT_OK


def cmd_sample_haar(args) -> tuple[dict, int]:
    if args.seed is None:
        raise CommandFailed(EXIT_INPUT, "sample-haar: --seed is required")
    sampler_for(args.dims, args.seed)
    vecs = state_block(args.dims, args.seed, args.start, args.start + args.count)
    return {
        "dims": args.dims,
        "start": args.start,
        "vectors": [{"re": v.real.tolist(), "im": v.imag.tolist()} for v in vecs],
    }, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--samples", type=int, default=100_000)
    common.add_argument("--max-samples", type=int, default=100_000_000)
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="contens", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("k-eval", "grad"):
        p = sub.add_parser(name, parents=[common], help="evaluate K(X) and its gradient")
        p.add_argument("--operator", required=True)
        p.add_argument("--closed-form", action="store_true")
        p.set_defaults(func=cmd_k_eval)

    p = sub.add_parser("normalize", parents=[common], help="shift X onto the surface K = 1")
    p.add_argument("--operator", required=True)
    p.set_defaults(func=cmd_normalize, needs_out=True)

    p = sub.add_parser("solve", parents=[common], help="find X with grad K(X) = rho")
    p.add_argument("--density", required=True)
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("classify", parents=[common], help="robust separability verdict")
    p.add_argument("--density", required=True)
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("smear", parents=[common], help="build a smeared ensemble")
    p.add_argument("--density", required=True)
    p.add_argument("--L", type=int, required=True)
    p.set_defaults(func=cmd_smear, needs_out=True)

    p = sub.add_parser("sweep-werner", parents=[common], help="classify Werner states")
    p.add_argument("--grid", required=True, help="comma-separated list of p values")
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(func=cmd_sweep_werner)

    p = sub.add_parser("sample-haar", parents=[common], help="dump Haar samples (debug)")
    p.add_argument("--dims", type=int, nargs="+", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--start", type=int, default=0)
    p.set_defaults(func=cmd_sample_haar)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "needs_out", False) and args.out is None:
        print(f"{args.command}: --out is required", file=sys.stderr)
        return EXIT_INPUT
    t0 = time.perf_counter()
    try:
        result, code = args.func(args)
    except CommandFailed as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except BoundViolation as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        json.dump({"command": args.command, "error": "BoundViolation", "min_L": exc.min_L,
                   "alt_min_L": exc.alt_min_L, "message": str(exc)}, sys.stdout)
        sys.stdout.write("\n")
        return EXIT_INPUT
    except (InputError, ValueError) as exc:
        print(f"{args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"{args.command}: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if isinstance(result, str):
        sys.stdout.write(result)
        return code
    inputs = {k: v for k, v in vars(args).items()
              if k not in ("func", "command", "needs_out", "verbose", "workers")}
    report = {
        "command": args.command,
        "inputs": inputs,
        "seed": args.seed,
        "samples": args.samples,
        "result": result,
        "wall_time_ms": round(1000 * (time.perf_counter() - t0), 3),
    }
    json.dump(report, sys.stdout, allow_nan=True)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
