"""Command-line surface: simulate, calibrate, analyze.

Exit codes: 0 success, 2 configuration/usage error, 3 runtime error.
Every subcommand is deterministic given its inputs and seed, so re-runs
reproduce byte-identical outputs.  ``LOBFORGE_SEED`` is the seed fallback
when neither ``--seed`` nor the config file provides one.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .agents import AgentParams, SimConfig, simulate
from .auxiliary import AuxCoefficients, fit_auxiliary, transform
from .calibrate import (
    REFERENCE_NAMES,
    Bounds,
    LobObjective,
    Nsga2Config,
    coverage_analysis,
    indirect_inference_single,
    make_agent_params,
    run_nsga2,
)
from .data_io import (
    ingest_events,
    intensity_correlation,
    order_size_histogram,
    read_snapshot_csv,
    write_sim_result,
)
from .errors import InvalidConfig, InvalidRatio, LobforgeError, ParseError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _resolve_seed(explicit, config_seed=None) -> int:
    if explicit is not None:
        return int(explicit)
    if config_seed is not None:
        return int(config_seed)
    env = os.environ.get("LOBFORGE_SEED")
    if env is not None:
        return int(env)
    return 0


def _load_json(path, what: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InvalidConfig(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{what} file is not valid JSON: {exc}") from None


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def cmd_simulate(args) -> int:
    theta = AgentParams.from_json_dict(_load_json(args.params, "params"))
    config = SimConfig.from_json_dict(_load_json(args.config, "config"))
    seed = _resolve_seed(args.seed, config.seed)
    if args.qtt_ratio is not None and args.qtt_ratio <= 1:
        raise InvalidRatio(f"--qtt-ratio must be > 1, got {args.qtt_ratio}")
    if args.qtt_ratio is not None:
        config = replace(config, quote_to_trade_ratio=args.qtt_ratio)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rep_seeds = np.random.SeedSequence(seed).generate_state(args.reps, dtype=np.uint64)
    for rep, rep_seed in enumerate(rep_seeds):
        cfg = replace(config, seed=int(rep_seed))
        result = simulate(theta, cfg)
        write_sim_result(result, out / f"sim_{rep:03d}.csv", out / f"sim_{rep:03d}.json")
    print(f"wrote {args.reps} simulated day(s) to {out}", file=sys.stderr)
    return EXIT_OK


def _bounds_from_file(path) -> Bounds:
    raw = _load_json(path, "bounds")
    if not isinstance(raw, dict) or not raw:
        raise InvalidConfig("bounds file must be a non-empty JSON object")
    pairs = {}
    for name, pair in raw.items():
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise InvalidConfig(f"bounds for {name!r} must be [lower, upper]")
        pairs[name] = (float(pair[0]), float(pair[1]))
    return Bounds.from_dict(pairs)


def _base_params(l_t: int, l_p: int, l_d: int) -> AgentParams:
    return AgentParams.reference(
        mu0_lo_passive=10.0,
        mu0_lo_direct=2.0,
        mu0_mo=1.0,
        gamma0=0.0,
        nu=10.0,
        sigma_mo=1.0,
        Sigma=0.5 * np.eye(l_t),
        l_p=l_p,
        l_d=l_d,
    )


def cmd_calibrate(args) -> int:
    snaps = read_snapshot_csv(args.data)
    target = fit_auxiliary([transform(snaps)])
    bounds = _bounds_from_file(args.bounds)
    seed = _resolve_seed(args.seed)
    l_p, l_d = snaps.l_p, snaps.l_d
    base = _base_params(l_p + l_d, l_p, l_d)
    T = args.T if args.T is not None else snaps.n_snapshots - 1
    sim_template = SimConfig(
        T=T,
        interval_seconds=snaps.interval_seconds,
        seed=0,
        keep_activity=False,
    )
    objective = LobObjective(
        target=target,
        base=base,
        sim_config=sim_template,
        names=bounds.names,
        M=args.M,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.single_objective:
        res = indirect_inference_single(
            objective.aux_coefficients,
            bounds,
            iterations=args.gens * args.pop,
            seed=seed,
            target=target,
            with_covariance=True,
            sigma_dim=l_p + l_d,
        )
        _write_json(
            out / "single_objective.json",
            {
                "best": {n: float(v) for n, v in zip(bounds.names, res.best_x)},
                "best_sigma": res.best_sigma.tolist() if res.best_sigma is not None else None,
                "best_distance": res.best_distance,
                "distance_trace": res.distance_trace.tolist(),
                "seed": seed,
            },
        )
        print(f"single-objective search done, best distance {res.best_distance:.6g}",
              file=sys.stderr)
        return EXIT_OK
    config = Nsga2Config(
        pop_size=args.pop,
        generations=args.gens,
        seed=seed,
        with_covariance=True,
        sigma_dim=l_p + l_d,
        jobs=args.jobs,
    )
    report = run_nsga2(objective, bounds, config)
    _write_front_csv(out / "front.csv", report)
    front_json = {
        "names": list(report.names),
        "seed": seed,
        "target": target.to_json_dict(),
        "front": [
            {
                "x": ind.x.tolist(),
                "sigma": ind.sigma.tolist() if ind.sigma is not None else None,
                "objectives": ind.objectives.tolist(),
                "rank": ind.rank,
            }
            for ind in report.front
        ],
        "objective_trace": [t.tolist() for t in report.objective_trace],
        "rank_trace": [t.tolist() for t in report.rank_trace],
        "psi_trace": [p.tolist() if p is not None else None for p in report.psi_trace],
    }
    if report.populations is not None:
        front_json["populations"] = [
            [
                {
                    "x": ind.x.tolist(),
                    "sigma": ind.sigma.tolist() if ind.sigma is not None else None,
                    "objectives": ind.objectives.tolist(),
                    "rank": ind.rank,
                }
                for ind in pop
            ]
            for pop in report.populations
        ]
    _write_json(out / "report.json", front_json)
    print(f"calibration done, front size {len(report.front)}", file=sys.stderr)
    return EXIT_OK


def _write_front_csv(path, report) -> None:
    rows = report.front_table()
    header = list(report.names) + ["tr_sigma", "d1", "d2", "rank"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(row[h]) if isinstance(row[h], float) else row[h] for h in header])


def cmd_analyze(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.what == "correlations":
        events = ingest_events(args.data)
        res = intensity_correlation(
            events,
            interval_seconds=args.interval_seconds,
            l_p=args.l_p,
            l_d=args.l_d,
            side=args.side,
        )
        with open(out / "correlations.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level"] + [f"l{int(s)}" for s in res.levels])
            for i, s in enumerate(res.levels):
                writer.writerow([f"l{int(s)}"] + [repr(float(v)) for v in res.matrix[i]])
        _write_json(
            out / "correlations_meta.json",
            {
                "levels": [int(s) for s in res.levels],
                "excluded": [int(s) for s in res.excluded],
                "n_intervals": res.n_intervals,
                "side": args.side,
            },
        )
    elif args.what == "sizes":
        events = ingest_events(args.data)
        hist = order_size_histogram(events, bin_width=args.bin_width)
        with open(out / "order_sizes.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_lo", "bin_hi", "count"])
            for i, c in enumerate(hist.counts):
                writer.writerow([int(hist.bin_edges[i]), int(hist.bin_edges[i + 1]) - 1, int(c)])
    elif args.what == "aux":
        snaps = read_snapshot_csv(args.data)
        coeffs = fit_auxiliary([transform(snaps)])
        _write_json(out / "aux.json", coeffs.to_json_dict())
    elif args.what == "coverage":
        if args.front is None:
            raise InvalidConfig("analyze coverage requires --front")
        snaps = read_snapshot_csv(args.data)
        target = fit_auxiliary([transform(snaps)])
        front_doc = _load_json(args.front, "front")
        names = tuple(front_doc["names"])
        base = _base_params(snaps.l_t, snaps.l_p, snaps.l_d)
        thetas = []
        for entry in front_doc["front"]:
            sigma = np.asarray(entry["sigma"], dtype=float) if entry["sigma"] else None
            thetas.append(make_agent_params(names, np.asarray(entry["x"]), sigma, base))
        sim_template = SimConfig(
            T=args.T if args.T is not None else snaps.n_snapshots - 1,
            interval_seconds=snaps.interval_seconds,
            keep_activity=False,
        )
        report = coverage_analysis(
            thetas,
            target,
            sim_template,
            n_rep=args.nrep,
            seed=_resolve_seed(args.seed),
        )
        with open(out / "coverage.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["coefficient", "proportion_covered"])
            for name, p in zip(report.names, report.proportions):
                writer.writerow([name, repr(float(p))])
        _write_json(
            out / "coverage.json",
            {
                "names": list(report.names),
                "covered": report.covered.tolist(),
                "proportions": report.proportions.tolist(),
                "intervals": report.intervals.tolist(),
                "excluded": report.excluded.tolist(),
            },
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lobforge",
        description="Order-book simulation with stochastic liquidity agents "
        "and simulation-based calibration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate trading days")
    p_sim.add_argument("--params", required=True, help="agent parameter JSON file")
    p_sim.add_argument("--config", required=True, help="simulation config JSON file")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--qtt-ratio", type=float, default=None,
                       help="quote-to-trade ratio (> 1)")
    p_sim.add_argument("--reps", type=int, default=1, help="number of repetitions")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="master seed (fallback: config, then LOBFORGE_SEED)")
    p_sim.set_defaults(func=cmd_simulate)

    p_cal = sub.add_parser("calibrate", help="fit agent parameters to a day of data")
    p_cal.add_argument("--data", required=True, help="observed day (snapshot CSV)")
    p_cal.add_argument("--bounds", required=True, help="JSON of per-parameter [lo, hi]")
    p_cal.add_argument("--pop", type=int, default=40, help="population size")
    p_cal.add_argument("--gens", type=int, default=40, help="number of generations")
    p_cal.add_argument("--M", type=int, default=1, dest="M",
                       help="simulated realisations per objective evaluation")
    p_cal.add_argument("--out", required=True, help="output directory")
    p_cal.add_argument("--single-objective", action="store_true",
                       help="use the keep-best single-objective loop instead")
    p_cal.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes for population evaluation")
    p_cal.add_argument("--seed", type=int, default=None)
    p_cal.add_argument("--T", type=int, default=None,
                       help="intervals per evaluation (default: match data)")
    p_cal.set_defaults(func=cmd_calibrate)

    p_ana = sub.add_parser("analyze", help="descriptive analytics and coverage")
    p_ana.add_argument("what", choices=["correlations", "sizes", "aux", "coverage"])
    p_ana.add_argument("--data", required=True,
                       help="event CSV (correlations, sizes) or snapshot CSV (aux, coverage)")
    p_ana.add_argument("--out", required=True)
    p_ana.add_argument("--front", default=None, help="front JSON from calibrate (coverage)")
    p_ana.add_argument("--nrep", type=int, default=50, help="re-simulations per solution")
    p_ana.add_argument("--interval-seconds", type=int, default=10)
    p_ana.add_argument("--l-p", type=int, default=5, dest="l_p")
    p_ana.add_argument("--l-d", type=int, default=3, dest="l_d")
    p_ana.add_argument("--side", choices=["bid", "ask"], default="bid")
    p_ana.add_argument("--bin-width", type=int, default=1)
    p_ana.add_argument("--seed", type=int, default=None)
    p_ana.add_argument("--T", type=int, default=None)
    p_ana.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfig, InvalidRatio, ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LobforgeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
