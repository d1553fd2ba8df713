"""Command-line entry points: generate scenarios, run one algorithm on a
scenario file, run a full experiment sweep, aggregate record files."""

from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import replace
from pathlib import Path

from .geo import GeoParams, geo_optimize
from .harness import (
    ALGORITHMS,
    ExperimentPlan,
    RunRecord,
    aggregate,
    read_records,
    run_algorithm,
    write_records,
    write_summary,
)
from .igeo import IgeoParams, igeo_optimize
from .metrics import calibrate_weights, evaluate
from .model import (
    Instance,
    ScenarioConfig,
    generate_scenario,
    load_scenario,
    save_scenario,
    validate_instance,
)
from .rigeo import rigeo_schedule
from .rl import RlConfig, rl_optimize


def _parse_weights(text: str):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated weights")
    return tuple(parts)


def _parse_int_list(text: str):
    return tuple(int(p) for p in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fogsched",
        description="Deadline-aware fog task-scheduling workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a seeded scenario file")
    gen.add_argument("--tasks", type=int, default=200)
    gen.add_argument("--nodes", type=int, default=20)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output scenario JSON path")

    run = sub.add_parser("run", help="run one algorithm on a scenario file")
    run.add_argument("scenario", help="scenario JSON path")
    run.add_argument("--algorithm", choices=ALGORITHMS, default="RIGEO")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--weights", type=_parse_weights, default=(1.0, 1.0, 1.0),
                     help="w_response,w_deadline,w_energy")
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--trace", action="store_true",
                     help="write a per-iteration convergence trace CSV")

    exp = sub.add_parser("experiment", help="run a full sweep")
    exp.add_argument("--tasks", type=_parse_int_list, default=(200, 300, 400, 500, 600))
    exp.add_argument("--nodes", type=int, default=20)
    exp.add_argument("--reps", type=int, default=50)
    exp.add_argument("--algorithms", default="RIGEO,IGEO-only,GEO,RL-only,RANDOM,GREEDY")
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--weights", type=_parse_weights, default=(1.0, 1.0, 1.0))
    exp.add_argument("--out", default="results")
    exp.add_argument("--workers", type=int, default=4)
    exp.add_argument("--pop", type=int, default=30)
    exp.add_argument("--iters", type=int, default=200)
    exp.add_argument("--episodes", type=int, default=2000)

    agg = sub.add_parser("aggregate", help="summarize a records.csv file")
    agg.add_argument("records", help="records.csv path")
    agg.add_argument("--out", default="summary.csv")

    return parser


def _cmd_generate(args) -> int:
    config = ScenarioConfig(n_tasks=args.tasks, n_nodes=args.nodes, rng_seed=args.seed)
    topology, tasks = generate_scenario(config)
    save_scenario(args.out, config, topology, tasks)
    print(f"wrote scenario with {len(tasks)} tasks / {len(topology.nodes)} nodes to {args.out}")
    return 0


def _cmd_run(args) -> int:
    _, topology, tasks = load_scenario(args.scenario)
    result = validate_instance(topology, tasks)
    if not result.ok:
        for violation in result.violations:
            print(f"invalid scenario: {violation}", file=sys.stderr)
        return 1
    instance = Instance(topology, tasks)
    w_r, w_d, w_e = args.weights
    weights = calibrate_weights(instance, w_r, w_d, w_e, seed=args.seed)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    node_ids = [n.id for n in topology.nodes]
    task_ids = [t.id for t in tasks]
    trace = [] if args.trace else None

    start = time.perf_counter()
    if args.algorithm == "GEO":
        assignment, _ = geo_optimize(
            instance, node_ids, task_ids, GeoParams(rng_seed=args.seed), weights, trace=trace
        )
    elif args.algorithm == "IGEO-only":
        assignment, _ = igeo_optimize(
            instance, node_ids, task_ids, IgeoParams(rng_seed=args.seed), weights, trace=trace
        )
    elif args.algorithm == "RL-only":
        assignment, _ = rl_optimize(
            instance, node_ids, task_ids, RlConfig(rng_seed=args.seed), weights, trace=trace
        )
    elif args.algorithm == "RIGEO":
        assignment, _ = rigeo_schedule(
            instance,
            IgeoParams(rng_seed=args.seed),
            RlConfig(rng_seed=args.seed),
            weights,
            summary_path=out / "routing_summary.json",
        )
    else:
        plan = ExperimentPlan()
        assignment = run_algorithm(args.algorithm, instance, args.seed, weights, plan)
    wall_ms = (time.perf_counter() - start) * 1000.0

    report = evaluate(instance, assignment, weights)
    (out / "report.json").write_text(report.to_json() + "\n")
    if trace:
        with open(out / f"trace_{args.algorithm}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            if args.algorithm == "RL-only":
                writer.writerow(["episode", "sampled_fitness", "best_fitness", "exploration_rate"])
            else:
                writer.writerow(["iteration", "best_fitness"])
            writer.writerows(trace)
    print(
        f"{args.algorithm}: dv_total={report.dv_total:.3f} ms, "
        f"energy_total={report.energy_total:.3f} J, "
        f"response_total={report.response_total:.3f} ms, "
        f"fitness={report.fitness:.6f} ({wall_ms:.0f} ms)"
    )
    return 0


def _cmd_experiment(args) -> int:
    from .harness import run_experiment

    plan = ExperimentPlan(
        task_counts=args.tasks,
        n_nodes=args.nodes,
        repetitions=args.reps,
        algorithms=tuple(args.algorithms.split(",")),
        base_seed=args.seed,
        output_dir=args.out,
        geo=GeoParams(population_size=args.pop, iterations=args.iters),
        igeo=IgeoParams(population_size=args.pop, iterations=args.iters),
        rl=RlConfig(episodes=args.episodes),
        fitness_weights=args.weights,
        workers=args.workers,
    )
    try:
        plan.validate()
    except ValueError as exc:
        print(f"invalid plan: {exc}", file=sys.stderr)
        return 1
    records = run_experiment(plan)
    print(f"wrote {len(records)} records to {Path(args.out) / 'records.csv'}")
    return 0


def _cmd_aggregate(args) -> int:
    records = read_records(args.records)
    if not records:
        print("no records to aggregate", file=sys.stderr)
        return 1
    write_summary(aggregate(records), args.out)
    print(f"wrote summary to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "aggregate":
            return _cmd_aggregate(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
