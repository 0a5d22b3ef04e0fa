"""Command-line front end: build, simulate, verify, rate, sweep.

Every command is deterministic given its full argument list; all
randomness flows from the seed arguments and timing diagnostics go to
stderr only.  Exit codes: 0 success / structural pass, 1 structural
violations found by verify, 2 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import codefile, reports
from .channel import DecoderParams
from .experiments import (
    PairStrategy,
    TrialPlan,
    estimate_type1,
    estimate_type2,
    rate_report,
    sweep,
    verify_structure,
)
from .galaxy import (
    GalaxyParams,
    asymptotic_rate,
    center_count_bounds,
    rate_lower_bound,
    theta_of_k,
)
from .spherical import csw_lower_bound

THREADS_ENV = "GALAXYID_THREADS"


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    return int(env) if env else 1


def _params_from_args(args) -> GalaxyParams:
    return GalaxyParams(
        n=args.n,
        power=args.power,
        b=args.b,
        k=args.k,
        theta=args.theta,
        m_per_level=args.m,
        sigma=args.sigma,
        master_seed=args.seed,
        t_bar=args.depth,
        r_min_coeff=args.r_min_coeff,
        enforce_cross_galaxy_margin=not args.no_cross_margin,
        max_roots=args.max_roots,
        saturation_probes=args.probes,
        max_attempts=args.max_attempts,
    )


def _add_build_params(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, required=True, help="block length / dimension")
    sub.add_argument("--k", type=int, required=True, help="radius scale factor (>= 7)")
    sub.add_argument("--b", type=float, default=0.0, help="leaf radius exponent in [0, 1/4)")
    sub.add_argument("--power", type=float, required=True, help="per-symbol power budget P")
    sub.add_argument("--sigma", type=float, default=1.0, help="noise standard deviation")
    sub.add_argument("--m", type=int, default=None, help="points per spherical code")
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--theta", type=float, default=None, help="minimum angle (default from k)")
    sub.add_argument("--depth", type=int, default=None, help="tree depth override")
    sub.add_argument(
        "--r-min-coeff",
        type=float,
        default=None,
        help="raise leaf radius to max(n^b, COEFF*sigma*log2 n); finite-n slab margin",
    )
    sub.add_argument(
        "--no-cross-margin",
        action="store_true",
        help="do not widen center spacing for the cross-galaxy distance floor",
    )
    sub.add_argument("--max-roots", type=int, default=256)
    sub.add_argument("--probes", type=int, default=200, help="consecutive rejections = saturation")
    sub.add_argument("--max-attempts", type=int, default=20000)


def _emit(args, rows: list[dict]) -> None:
    text = reports.render_jsonl(rows) if args.format == "jsonl" else reports.render_csv(rows)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_build(args) -> int:
    t0 = time.perf_counter()
    params = _params_from_args(args)
    from .galaxy import build_code

    code = build_code(params)
    codefile.save(code, args.out)
    print(f"wrote {args.out}")
    print(f"roots={len(code.roots)} codewords={len(code.codewords)} t_bar={params.t_bar}")
    print(f"theta={params.theta!r} r={params.r!r} spacing={params.spacing!r}")
    print(f"packing_saturated={code.packing_saturated} degraded={code.degraded}")
    print(f"[time] build {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    if args.trials < 1:
        raise ValueError(f"--trials must be >= 1, got {args.trials}")
    if not (args.type1 or args.type2):
        raise ValueError("nothing to do: pass --type1 and/or --type2")
    code = codefile.load(args.code)
    dec = DecoderParams.from_galaxy(code.params)
    threads = _threads(args)
    rows = []
    rate = rate_report(code)
    if args.type1:
        est = estimate_type1(code, dec, args.trials, args.seed, threads=threads)
        rows.append(reports.build_row("simulate", code.params, rate, est))
    if args.type2:
        strategy = PairStrategy(
            mode=args.pairs,
            sample_count=args.pair_sample,
            min_distance=args.min_distance,
        )
        est = estimate_type2(code, strategy, dec, args.trials, args.seed, threads=threads)
        rows.append(reports.build_row("simulate", code.params, rate, est, pair_mode=args.pairs))
    _emit(args, rows)
    print(f"[time] simulate {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    code = codefile.load(args.code)
    report = verify_structure(code)
    counts = report.counts()
    for name in ("cond1", "cond2", "cross_galaxy", "angle", "power"):
        status = "ok" if counts[name] == 0 else f"{counts[name]} violation(s)"
        print(f"{name}: {status}")
    sep = report.separation
    print(
        f"separation: lhs={sep['lhs']!r} strict={sep['strict_holds']} weak={sep['weak_holds']}"
    )
    if args.json:
        doc = {
            "passed": report.passed,
            "counts": counts,
            "separation": sep,
            "cond1_violations": report.cond1_violations,
            "cond2_violations": report.cond2_violations,
            "cross_galaxy_violations": report.cross_galaxy_violations,
            "angle_violations": report.angle_violations,
            "power_violations": report.power_violations,
        }
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2, default=float)
            fh.write("\n")
    print("PASS" if report.passed else "FAIL")
    print(f"[time] verify {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return 0 if report.passed else 1


def _parse_pow2_range(text: str) -> list[int]:
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError as exc:
        raise ValueError(f"expected --k-pow2 like 3..20, got {text!r}") from exc
    if lo > hi:
        raise ValueError(f"empty --k-pow2 range {text!r}")
    return [2**j for j in range(lo, hi + 1)]


def cmd_rate(args) -> int:
    rows = []
    if args.code:
        code = codefile.load(args.code)
        rows.append(reports.build_row("rate", code.params, rate_report(code)))
    else:
        if args.k_pow2:
            ks = _parse_pow2_range(args.k_pow2)
        elif args.k:
            ks = [args.k]
        else:
            raise ValueError("rate needs --code, or --k / --k-pow2 for formula mode")
        if not 0 <= args.b < 0.25:
            raise ValueError(f"b must lie in [0, 1/4), got {args.b}")
        for k in ks:
            row = {c: "" for c in reports.REPORT_COLUMNS}
            row["schema_version"] = reports.SCHEMA_VERSION
            row["command"] = "rate"
            row["k"] = k
            row["b"] = args.b
            row["rate_asymptotic"] = asymptotic_rate(args.b, k)
            theta = theta_of_k(k)
            row["theta"] = theta
            if args.n:
                row["n"] = args.n
                row["m_bound_csw"] = csw_lower_bound(args.n, theta)
                if args.power:
                    row["power"] = args.power
                    row["rate_bound_lemma1"] = rate_lower_bound(args.n, args.power, args.b, k, theta)
                    lo, hi = center_count_bounds(args.n, args.power, args.b)
                    row["count_bound_claim1_lo"] = lo
                    row["count_bound_claim1_hi"] = hi
            rows.append(row)
    _emit(args, rows)
    return 0


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    ks = [int(s) for s in args.k_list.split(",") if s]
    if not ks:
        raise ValueError("--k-list is empty")
    grid = []
    for k in ks:
        grid.append(
            GalaxyParams(
                n=args.n,
                power=args.power,
                b=args.b,
                k=k,
                m_per_level=args.m,
                sigma=args.sigma,
                master_seed=args.seed,
                r_min_coeff=args.r_min_coeff,
                max_roots=args.max_roots,
                saturation_probes=args.probes,
            )
        )
    plan = TrialPlan(
        type1_trials=args.trials_type1,
        type2_trials=args.trials_type2,
        pair_mode=args.pairs,
    )
    results = sweep(grid, plan, args.seed, threads=_threads(args))
    rows = []
    for res in results:
        if res.error is not None:
            rows.append(reports.build_row("sweep", res.params, error=res.error))
            continue
        if res.type1 is not None:
            rows.append(
                reports.build_row(
                    "sweep", res.params, res.rate, res.type1, structure_passed=res.structure_passed
                )
            )
        if res.type2 is not None:
            rows.append(
                reports.build_row(
                    "sweep",
                    res.params,
                    res.rate,
                    res.type2,
                    pair_mode=plan.pair_mode,
                    structure_passed=res.structure_passed,
                )
            )
        if res.type1 is None and res.type2 is None:
            rows.append(
                reports.build_row(
                    "sweep", res.params, res.rate, structure_passed=res.structure_passed
                )
            )
    _emit(args, rows)
    print(f"[time] sweep {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="galaxyid",
        description="Hierarchical spherical identification codes over the AWGN channel",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="construct a codebook and write it to disk")
    _add_build_params(p_build)
    p_build.add_argument("--out", required=True, help="output code file (JSON)")
    p_build.set_defaults(func=cmd_build)

    p_sim = sub.add_parser("simulate", help="Monte Carlo error estimation on a code file")
    p_sim.add_argument("--code", required=True)
    p_sim.add_argument("--type1", action="store_true", help="estimate the miss rate")
    p_sim.add_argument("--type2", action="store_true", help="estimate the false-acceptance rate")
    p_sim.add_argument(
        "--pairs",
        default="cross-galaxy",
        choices=["same-planet", "same-galaxy-deep", "cross-galaxy", "exhaustive-sample"],
    )
    p_sim.add_argument("--pair-sample", type=int, default=None)
    p_sim.add_argument("--min-distance", type=float, default=None)
    p_sim.add_argument("--trials", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--threads", type=int, default=None)
    p_sim.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    p_sim.add_argument("--out", default=None, help="write rows here instead of stdout")
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify", help="exhaustive structural verification")
    p_ver.add_argument("--code", required=True)
    p_ver.add_argument("--json", default=None, help="also write the full report as JSON")
    p_ver.set_defaults(func=cmd_verify)

    p_rate = sub.add_parser("rate", help="rate table from a code file or from formulas")
    p_rate.add_argument("--code", default=None)
    p_rate.add_argument("--n", type=int, default=None)
    p_rate.add_argument("--power", type=float, default=None)
    p_rate.add_argument("--b", type=float, default=0.0)
    p_rate.add_argument("--k", type=int, default=None)
    p_rate.add_argument("--k-pow2", default=None, help="range of exponents, e.g. 3..20")
    p_rate.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    p_rate.add_argument("--out", default=None)
    p_rate.set_defaults(func=cmd_rate)

    p_sweep = sub.add_parser("sweep", help="build+verify+estimate over a grid of k values")
    p_sweep.add_argument("--n", type=int, required=True)
    p_sweep.add_argument("--power", type=float, required=True)
    p_sweep.add_argument("--b", type=float, default=0.0)
    p_sweep.add_argument("--k-list", required=True, help="comma-separated k values")
    p_sweep.add_argument("--m", type=int, default=None)
    p_sweep.add_argument("--sigma", type=float, default=1.0)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--r-min-coeff", type=float, default=None)
    p_sweep.add_argument("--max-roots", type=int, default=64)
    p_sweep.add_argument("--probes", type=int, default=200)
    p_sweep.add_argument("--trials-type1", type=int, default=0)
    p_sweep.add_argument("--trials-type2", type=int, default=0)
    p_sweep.add_argument(
        "--pairs",
        default="cross-galaxy",
        choices=["same-planet", "same-galaxy-deep", "cross-galaxy"],
    )
    p_sweep.add_argument("--threads", type=int, default=None)
    p_sweep.add_argument("--format", default="csv", choices=["csv", "jsonl"])
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
