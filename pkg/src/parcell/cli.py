"""Command-line interface.

    parcell sched    --variant redundant --n 2 --mode exhaustive
    parcell sweep    --seed 42 --out results/
    parcell baseline --trials 10 --out results/
    parcell simulate --n 2 --trace events.ndjson

Exit codes: 0 success, 1 usage/configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from fractions import Fraction

from parcell import engine, harness, sched
from parcell.cell import GenomeConfig, build_sequential_cell, init_mother
from parcell.world import RateConfig


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_VARIANT_ALIASES = {
    "monolithic": "monolithic",
    "split": "split_description",
    "split_description": "split_description",
    "redundant": "redundant",
    "pipelined": "pipelined",
    "translator_copier": "translator_copier_only",
    "translator_copier_only": "translator_copier_only",
    "organism": "organism",
}


def _build_parser():
    parser = _Parser(prog="parcell")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--config", type=str, default=None,
                        help="JSON file with sweep/rate/genome settings")
    parser.add_argument("--out", type=str, default="results")
    sub = parser.add_subparsers(dest="command")

    ps = sub.add_parser("sched")
    ps.add_argument("--variant", required=True, choices=sorted(_VARIANT_ALIASES))
    ps.add_argument("--n", type=int, default=1)
    ps.add_argument("--m", type=int, default=1)
    ps.add_argument("--mode", choices=("exhaustive", "greedy"), default="exhaustive")
    ps.add_argument("--baseline", choices=sorted(_VARIANT_ALIASES),
                    default="split_description")
    ps.add_argument("--baseline-n", type=int, default=1)
    ps.add_argument("--format", choices=("text", "json"), default="text")

    pw = sub.add_parser("sweep")
    pw.add_argument("--n-values", type=str, default=None, help="comma list, e.g. 1,2,3")
    pw.add_argument("--trials", type=int, default=None)
    pw.add_argument("--with-baseline", action="store_true")

    pb = sub.add_parser("baseline")
    pb.add_argument("--trials", type=int, default=None)

    pm = sub.add_parser("simulate")
    pm.add_argument("--n", type=int, default=1)
    pm.add_argument("--sequential", action="store_true")
    pm.add_argument("--t-max", type=float, default=50000.0)
    pm.add_argument("--trace", type=str, default=None)

    return parser


def _load_config(args):
    cfg = harness.SweepConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"config {args.config}: {exc}") from exc
        rates = RateConfig(**raw.get("rates", {}))
        genome = GenomeConfig(**raw.get("genome", {}))
        cfg = harness.SweepConfig(
            n_values=raw.get("n_values", cfg.n_values),
            trials_per_n=raw.get("trials_per_n", cfg.trials_per_n),
            base_seed=raw.get("base_seed", cfg.base_seed),
            rates=rates, genome=genome,
            t_max=raw.get("t_max", cfg.t_max))
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    return cfg


def _cmd_sched(args):
    spec = sched.SystemSpec(_VARIANT_ALIASES[args.variant], n=args.n, m=args.m)
    baseline = sched.SystemSpec(_VARIANT_ALIASES[args.baseline], n=args.baseline_n)
    subs, cs = sched.generate_subproblems(spec)
    schedule, span = sched.min_makespan(spec, mode=args.mode)
    ratio = Fraction(sched.sequential_makespan(baseline), span)
    pairs = sched.pairwise_mutex_conflicts(subs)
    notes = [f"baseline {baseline.variant} contributes {sched.sequential_makespan(baseline)} "
             f"sequential steps"]
    if spec.variant == "pipelined":
        notes.append(
            f"a 10-step sequential baseline would give speedup {Fraction(10, span)}; "
            f"choose it with --baseline")
    if args.format == "json":
        print(json.dumps({
            "variant": spec.variant, "n": spec.n, "m": spec.m,
            "subproblems": len(subs),
            "mutex_pairs": pairs,
            "dependencies": sorted(list(d) for d in cs.dependencies),
            "makespan": span,
            "speedup": str(ratio),
            "steps": schedule.steps,
            "notes": notes,
        }, indent=2))
        return 0
    print(f"variant {spec.variant} n={spec.n}" + (f" m={spec.m}" if spec.variant == "organism" else ""))
    print(f"subproblems {len(subs)}")
    print(f"mutex_pairs {pairs}")
    print(f"makespan {span}")
    print(f"speedup {ratio}")
    for i, step in enumerate(schedule.steps, 1):
        print(f"step {i}: " + " ".join(step))
    for note in notes:
        print(f"note: {note}")
    return 0


def _cmd_sweep(args):
    cfg = _load_config(args)
    if args.n_values:
        cfg = replace(cfg, n_values=[int(v) for v in args.n_values.split(",")])
    if args.trials:
        cfg = replace(cfg, trials_per_n=args.trials)
    rows = harness.run_sweep(cfg)
    stats = harness.summarize(rows)
    baseline_stats = None
    if args.with_baseline:
        baseline_rows = harness.run_baseline(cfg)
        baseline_stats = harness.summarize(baseline_rows)
    paths = harness.emit_outputs(stats, rows, args.out, baseline_stats)
    for s in stats:
        print(f"n={s.n} mean_time={s.mean_time:.2f} sigma={s.sigma_time:.2f} "
              f"mean_mass={s.mean_pile_mass:.1f} censored={s.censored}")
    print(f"wrote {paths['rows']}, {paths['stats']}, {paths['figure']}")
    return 0


def _cmd_baseline(args):
    cfg = _load_config(args)
    rows = harness.run_baseline(cfg, trials=args.trials)
    stats = harness.summarize(rows)
    import pathlib

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "baseline_rows.csv").write_text(harness.rows_csv(rows), encoding="utf-8")
    (out / "baseline_stats.csv").write_text(harness.stats_csv(stats), encoding="utf-8")
    s = stats[0]
    print(f"sequential mean_time={s.mean_time:.2f} sigma={s.sigma_time:.2f} "
          f"trials={s.trials} censored={s.censored}")
    return 0


def _cmd_simulate(args):
    cfg = _load_config(args)
    genome = replace(cfg.genome, n_b=max(1, args.n), n_e=max(1, args.n))
    seed = cfg.base_seed
    if args.sequential:
        world = build_sequential_cell(genome, seed, rates=replace(cfg.rates))
    else:
        world = init_mother(genome, seed, rates=replace(cfg.rates))
    trace_fh = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        summary = engine.run_until(world, t_max=args.t_max,
                                   stop=lambda w: len(w.records) > 0,
                                   trace=trace_fh)
    finally:
        if trace_fh:
            trace_fh.close()
    print(f"elapsed {summary.elapsed:.3f} ops {summary.total_ops} events {summary.events} "
          f"reason {summary.reason}")
    for kind in sorted(summary.histogram):
        print(f"  {kind}: {summary.histogram[kind]}")
    if world.records:
        rec = world.records[0]
        print(f"replication_time {rec.replication_time:.3f}")
        print(f"replication_ops {rec.replication_ops}")
        print(f"genome_mass {rec.genome_mass}")
        print(f"pile_mass {rec.pile_mass}")
        print(f"race_events {rec.race_events}")
        print("census " + json.dumps(rec.gene_census, sort_keys=True))
    else:
        print("no fission before t_max (censored)")
    return 0


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required (sched, sweep, baseline, simulate)")
        if args.command == "sched":
            return _cmd_sched(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "baseline":
            return _cmd_baseline(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        raise UsageError(f"unknown command {args.command}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
