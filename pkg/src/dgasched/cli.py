"""Command-line entry point: ``dgasched <command> ...``.

Exit status: 0 ok, 1 validation failure, 2 usage error, 3 infeasible
parameters (including an exceeded brute-force cap).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, experiment
from .chain_builder import DEFAULT_BRUTE_FORCE_CAP, CapExceededError, Sequencer, build_graph, critical_path_length
from .generator import GenConfig, InfeasibleParametersError, generate_taskset
from .list_scheduler import schedule
from .model import DependencyGraph, Policy, dumps_taskset, loads_taskset, makespan, schedule_from_csv, schedule_to_csv, to_time

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3
POLICY_CHOICES = [p.value for p in Policy]
fmt = experiment.num_str


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_tasks(path: str):
    try:
        return loads_taskset(_read(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad task set {path}: {exc}") from None


def _load_schedule(path: str):
    try:
        return schedule_from_csv(_read(path))
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad schedule {path}: {exc}") from None


def _graph_for(tasks, chains, sequencer, cap):
    if chains:
        try:
            return DependencyGraph(tasks, chains)
        except ValueError as exc:
            raise UsageError(f"schedule chains do not fit the task set: {exc}") from None
    return build_graph(tasks, sequencer, cap)


# ------------------------------------------------------------------ commands


def cmd_generate(args) -> int:
    doc = json.loads(_read(args.config)) if args.config else {}
    for key in ("M", "z", "n_tasks", "per_task_cap"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    if args.beta_low is not None or args.beta_high is not None:
        lo, hi = doc.get("beta_range", ("0.1", "0.4"))
        doc["beta_range"] = (args.beta_low or lo, args.beta_high or hi)
    if args.seed is not None:
        doc["seed"] = args.seed
    if "M" not in doc or "z" not in doc:
        raise UsageError("generate needs --M and --z (flags or --config)")
    if "beta_range" in doc:
        doc["beta_range"] = tuple(to_time(str(b)) for b in doc["beta_range"])
    if "per_task_cap" in doc:
        doc["per_task_cap"] = to_time(str(doc["per_task_cap"]))
    try:
        config = GenConfig(**doc)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    _emit(dumps_taskset(generate_taskset(config)), args.out)
    return EXIT_OK


def cmd_build_graph(args) -> int:
    tasks = _load_tasks(args.taskset)
    graph = build_graph(tasks, Sequencer(args.sequencer), args.cap)
    text = graph.edge_list()
    if text and not text.endswith("\n"):
        text += "\n"
    _emit(text + f"# len(G) = {fmt(critical_path_length(graph))}\n", args.out)
    return EXIT_OK


def cmd_schedule(args) -> int:
    tasks = _load_tasks(args.taskset)
    graph = build_graph(tasks, Sequencer(args.sequencer), args.cap)
    sched = schedule(graph, args.M, Policy(args.policy))
    text = schedule_to_csv(sched, graph)
    text += f"# makespan={fmt(makespan(sched))} lemma8_bound={fmt(analysis.lemma8_bound(graph, args.M))}\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    tasks = _load_tasks(args.taskset)
    sched, chains = _load_schedule(args.schedule)
    graph = _graph_for(tasks, chains, Sequencer(args.sequencer), args.cap)
    violations = analysis.validate(sched, tasks, graph, Policy(args.policy) if args.policy else None)
    _emit("".join(f"{v}\n" for v in violations) or "ok\n", args.out)
    return EXIT_INVALID if violations else EXIT_OK


def cmd_bounds(args) -> int:
    tasks = _load_tasks(args.taskset)
    sched, chains = _load_schedule(args.schedule)
    graph = _graph_for(tasks, chains, Sequencer(args.sequencer), args.cap)
    _emit(analysis.bounds_report(tasks, graph, sched, args.cap).to_json(), args.out)
    return EXIT_OK


def cmd_theorem5(args) -> int:
    M, Q, delta = args.M, to_time(args.Q), to_time(args.delta)
    try:
        instance = analysis.build_theorem5_instance(M, Q, delta)
    except ValueError as exc:
        raise InfeasibleParametersError(str(exc)) from None
    graph = analysis.theorem5_optimal_graph(instance)
    ref_graph = analysis.theorem5_reference_graph(instance)
    ref = analysis.theorem5_reference_schedule(instance, M)
    ref_len = makespan(ref)
    lines = [
        f"# M={M} Q={fmt(Q)} delta={fmt(delta)} N={len(instance)}",
        f"L(S*) = {fmt(ref_len)}",
        f"len(G*) = {fmt(critical_path_length(graph))}",
        f"partitioned floor = {fmt(analysis.theorem5_partitioned_floor(M, Q, delta))}",
        "",
        "# schedules of G*",
        "policy,makespan,ratio,valid",
    ]
    for policy in Policy:
        sched = schedule(graph, M, policy)
        ok = not analysis.validate(sched, instance, graph)
        length = makespan(sched)
        lines.append(f"{policy.value},{fmt(length)},{float(length / ref_len):.6f},{str(ok).lower()}")
    lines += ["", "# instance", dumps_taskset(instance).rstrip("\n"), "", "# reference schedule"]
    text = "\n".join(lines) + "\n" + schedule_to_csv(ref, ref_graph)
    _emit(text, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        doc = json.loads(_read(args.config)) if args.config else {}
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.workers is not None:
            doc["workers"] = args.workers
        config = experiment.SweepConfig.from_dict(doc)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad sweep config: {exc}") from None
    result = experiment.run_sweep(config)
    _emit(result.to_csv(), args.out)
    if args.report:
        Path(args.report).write_text(result.report())
    return EXIT_OK


def cmd_plot_data(args) -> int:
    series = experiment.plot_series(_read(args.csv))
    _emit(json.dumps(series, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgasched", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--out", help="write here instead of stdout")
        return p

    def graph_flags(p):
        p.add_argument("--sequencer", choices=[s.value for s in Sequencer], default="potts")
        p.add_argument("--cap", type=int, default=DEFAULT_BRUTE_FORCE_CAP, help="brute-force job cap")

    p = command("generate", cmd_generate, "generate a random task set (JSON)")
    p.add_argument("--config", help="GenConfig JSON; flags override it")
    p.add_argument("--M", type=int)
    p.add_argument("--z", type=int)
    p.add_argument("--n-tasks", dest="n_tasks", type=int)
    p.add_argument("--beta-low")
    p.add_argument("--beta-high")
    p.add_argument("--cap", dest="per_task_cap", help="per-task utilization cap")
    p.add_argument("--seed", type=int)

    p = command("build-graph", cmd_build_graph, "order critical sections; print edges and len(G)")
    p.add_argument("taskset")
    graph_flags(p)

    p = command("schedule", cmd_schedule, "list-schedule a task set (CSV)")
    p.add_argument("taskset")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--policy", choices=POLICY_CHOICES, default=Policy.SEMI_PARTITIONED_P.value)
    graph_flags(p)

    p = command("validate", cmd_validate, "check a schedule CSV; exit 1 on violations")
    p.add_argument("taskset")
    p.add_argument("schedule")
    p.add_argument("--policy", choices=POLICY_CHOICES, help="override the policy in the CSV header")
    graph_flags(p)

    p = command("bounds", cmd_bounds, "lower bounds and achieved ratio (JSON)")
    p.add_argument("taskset")
    p.add_argument("schedule")
    graph_flags(p)

    p = command("theorem5", cmd_theorem5, "lower-bound instance family, S* and ratio table")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--Q", required=True)
    p.add_argument("--delta", required=True)

    p = command("sweep", cmd_sweep, "acceptance-ratio sweep (CSV)")
    p.add_argument("--config", help="SweepConfig JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--report", help="also write the curve report here")

    p = command("plot-data", cmd_plot_data, "per-curve series from a sweep CSV (JSON)")
    p.add_argument("csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"dgasched: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleParametersError, CapExceededError) as exc:
        print(f"dgasched: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"dgasched: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
