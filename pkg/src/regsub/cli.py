"""Command-line entry point.

    regsub estimate   --n N --d D [--h1 F] [--h2 F] --u U --v V | --pattern F
    regsub exact      --n N --d D [--h1 F] [--h2 F] (--u U --v V | --pattern F)
    regsub sample     --n N --d D --seed S [--method M] [--samples K] [--out F]
    regsub experiment run KIND --seed S [--config F] [--grid N:D,...] [--out F]
    regsub experiment list

Vertices on the command line are 1-based, like the edge-list files.
Exit codes: 0 ok, 2 gate failure, 3 capability/budget, 4 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import MalformedInputError, RegsubError
from .estimates import (
    ConditioningPair,
    cond_edge_prob_baseline,
    cond_edge_prob_refined_general,
    cond_edge_prob_refined_regular,
    mu_pattern,
)
from .graph_core import DegreeSequence, Pattern, SimpleGraph, format_edge_list, read_edge_list
from .harness import KINDS, ExperimentConfig, run_experiment
from .oracle import exact_count_distribution, exact_edge_probabilities, factorial_moments
from .report import write_report
from .sampler import METHODS, SamplerConfig, conditional_samples, sample_many

EXIT_GATE = 2


def _graph_arg(path, n: int) -> SimpleGraph:
    if path is None:
        return SimpleGraph(n)
    g = read_edge_list(path)
    if g.n != n:
        raise MalformedInputError(f"{path}: graph on {g.n} vertices, expected {n}")
    return g


def _context(args) -> ConditioningPair:
    return ConditioningPair(_graph_arg(args.h1, args.n), _graph_arg(args.h2, args.n))


def _pair(args) -> tuple[int, int]:
    if args.u is None or args.v is None:
        raise MalformedInputError("--u and --v are required")
    return args.u - 1, args.v - 1


def _pattern(path) -> Pattern:
    return Pattern.from_graph(read_edge_list(path))


def _emit(obj, out=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_estimate(args) -> int:
    if args.pattern:
        est = mu_pattern(_pattern(args.pattern), args.d, args.n)
        _emit({"mu": est.value, "exact": str(est.exact), "error_order": est.error_order}, args.out)
        return 0
    ctx = _context(args)
    u, v = _pair(args)
    dseq = DegreeSequence.regular(args.n, args.d)
    out = {
        "baseline": cond_edge_prob_baseline(ctx, dseq, u, v).value,
        "refined_general": cond_edge_prob_refined_general(ctx, dseq, u, v).value,
    }
    if not ctx.h2.edges:
        out["refined"] = cond_edge_prob_refined_regular(ctx.h1, u, v, args.d, args.n).value
    _emit(out, args.out)
    return 0


def cmd_exact(args) -> int:
    ctx = _context(args)
    if args.pattern:
        dist = exact_count_distribution(args.n, args.d, _pattern(args.pattern), ctx)
        _emit({
            "pmf": {str(k): str(p) for k, p in dist.pmf.items()},
            "mean": str(dist.mean),
            "factorial_moments": [str(m) for m in factorial_moments(dist, args.k_max)],
        }, args.out)
        return 0
    u, v = _pair(args)
    total, probs = exact_edge_probabilities(args.n, args.d, ctx)
    p = probs[(min(u, v), max(u, v))]
    _emit({"class_size": total, "probability": str(p), "value": float(p)}, args.out)
    return 0


def cmd_sample(args) -> int:
    cfg = SamplerConfig(args.n, args.d, method=args.method, seed=args.seed,
                        burn_in=args.burn_in, thinning=args.thinning)
    if args.h1 or args.h2:
        graphs = conditional_samples(_context(args), cfg.dseq, cfg, args.samples)
    else:
        graphs = sample_many(cfg, args.samples)
    chunks = [format_edge_list(g) for g in graphs]
    text = "\n".join(chunks)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _parse_grid(text: str) -> list[tuple[int, int]]:
    try:
        return [tuple(int(x) for x in pt.split(":")) for pt in text.split(",") if pt]
    except ValueError:
        raise MalformedInputError(f"grid must look like 2000:20,500:10, got {text!r}") from None


def cmd_experiment(args) -> int:
    if args.action == "list":
        for kind in KINDS:
            print(kind)
        return 0
    if args.kind is None:
        raise MalformedInputError("experiment run needs a kind")
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    data["kind"] = args.kind
    overrides = {
        "seed": args.seed, "samples": args.samples, "burn_in": args.burn_in, "out": args.out,
        "format": args.format, "workers": args.workers, "method": args.method,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.grid:
        data["grid"] = _parse_grid(args.grid)
    elif args.n is not None and args.d is not None:
        data["grid"] = [(args.n, args.d)]
    data.setdefault("grid", [])
    cfg = ExperimentConfig.from_mapping(data)
    report = run_experiment(cfg)
    if cfg.out:
        write_report(report, cfg.format, cfg.out)
    else:
        sys.stdout.write(report.to_csv() if cfg.format == "csv" else report.to_json())
    return 0 if report.passed else EXIT_GATE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regsub", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def graph_flags(p, need_nd=True):
        p.add_argument("--n", type=int, required=need_nd)
        p.add_argument("--d", type=int, required=need_nd)
        p.add_argument("--h1", help="edge-list file of required edges")
        p.add_argument("--h2", help="edge-list file of forbidden edges")
        p.add_argument("--out")

    p = sub.add_parser("estimate", help="closed-form estimates")
    graph_flags(p)
    p.add_argument("--u", type=int)
    p.add_argument("--v", type=int)
    p.add_argument("--pattern", help="edge-list file; prints the expected copy count")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("exact", help="exact values by enumeration (small n only)")
    graph_flags(p)
    p.add_argument("--u", type=int)
    p.add_argument("--v", type=int)
    p.add_argument("--pattern")
    p.add_argument("--k-max", type=int, default=3)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("sample", help="draw random regular graphs as edge lists")
    graph_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--method", choices=METHODS, default="edge-swap-mcmc")
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--thinning", type=int)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("experiment", help="run or list experiment campaigns")
    p.add_argument("action", choices=("run", "list"))
    p.add_argument("kind", nargs="?", choices=KINDS)
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", help="comma-separated n:d pairs")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "experiment" and args.action == "run" and args.seed is None:
        print("error: --seed is required for experiments", file=sys.stderr)
        return 4
    try:
        return args.func(args)
    except RegsubError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
