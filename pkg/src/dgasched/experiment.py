"""Acceptance-ratio sweeps over generated task sets.

Every task set of a parameter point is scheduled once per algorithm; the
resulting makespan is then compared against each deadline ``m * LB`` on
the grid, so curves are paired and monotone by construction.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .analysis import lemma8_bound, lower_bound_fast, validate
from .chain_builder import Sequencer, build_graph
from .generator import QUANTUM, GenConfig, generate_taskset
from .list_scheduler import schedule
from .model import Policy, TaskSet, format_time, makespan, ratio_str

ALL_ALGORITHMS = tuple(
    f"{seq}-{part}-{pre}" for seq in ("JKS", "POTTS") for part in ("SP", "P") for pre in ("P", "NP")
)
CSV_COLUMNS = ("algorithm", "M", "z", "beta_low", "beta_high", "multiplier", "accepted", "total", "ratio")

_SEQUENCERS = {"JKS": Sequencer.JKS, "POTTS": Sequencer.POTTS}
_POLICIES = {
    ("SP", "P"): Policy.SEMI_PARTITIONED_P,
    ("SP", "NP"): Policy.SEMI_PARTITIONED_NP,
    ("P", "P"): Policy.PARTITIONED_SIMPLE,
    ("P", "NP"): Policy.PARTITIONED_SIMPLE_NP,
}


def parse_algorithm(label: str) -> tuple[Sequencer, Policy]:
    """``"POTTS-SP-P"`` -> (Potts sequencer, semi-partitioned preemptive)."""
    try:
        seq, part, pre = label.upper().split("-")
        return _SEQUENCERS[seq], _POLICIES[(part, pre)]
    except (ValueError, KeyError):
        raise ValueError(f"bad algorithm label {label!r}; expected e.g. POTTS-SP-P") from None


def default_grid(step: Fraction = Fraction(1, 20)) -> tuple[Fraction, ...]:
    step = Fraction(step)
    count = int((Fraction(4, 5) / step))
    return tuple(1 + k * step for k in range(count + 1))


def num_str(x: Fraction) -> str:
    """Exact decimal when the value terminates, ``num/den`` otherwise."""
    out = format_time(x)
    return out if isinstance(out, str) else ratio_str(x)


@dataclass(frozen=True)
class SweepConfig:
    M: tuple[int, ...] = (8,)
    z: tuple[int, ...] = (8,)
    beta_ranges: tuple[tuple[Fraction, Fraction], ...] = ((Fraction(1, 10), Fraction(2, 5)),)
    task_sets_per_point: int = 200
    multipliers: tuple[Fraction, ...] = field(default_factory=default_grid)
    algorithms: tuple[str, ...] = ALL_ALGORITHMS
    seed: int = 2024
    tasks_per_processor: int = 10
    per_task_cap: Fraction = Fraction(1, 2)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "M", tuple(int(m) for m in self.M))
        object.__setattr__(self, "z", tuple(int(z) for z in self.z))
        object.__setattr__(
            self, "beta_ranges", tuple((Fraction(lo), Fraction(hi)) for lo, hi in self.beta_ranges)
        )
        grid = tuple(Fraction(m) for m in self.multipliers)
        if any(not 1 <= m <= Fraction(9, 5) for m in grid):
            raise ValueError("deadline multipliers must lie in [1, 1.8]")
        object.__setattr__(self, "multipliers", grid)
        for label in self.algorithms:
            parse_algorithm(label)
        object.__setattr__(self, "algorithms", tuple(a.upper() for a in self.algorithms))
        object.__setattr__(self, "per_task_cap", Fraction(self.per_task_cap))
        if self.task_sets_per_point < 1:
            raise ValueError("task_sets_per_point must be >= 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepConfig":
        doc = dict(doc)
        if "grid_step" in doc:
            doc["multipliers"] = default_grid(Fraction(str(doc.pop("grid_step"))))
        if "multipliers" in doc:
            doc["multipliers"] = tuple(Fraction(str(m)) for m in doc["multipliers"])
        if "beta_ranges" in doc:
            doc["beta_ranges"] = tuple((Fraction(str(lo)), Fraction(str(hi))) for lo, hi in doc["beta_ranges"])
        if "per_task_cap" in doc:
            doc["per_task_cap"] = Fraction(str(doc["per_task_cap"]))
        for key in ("M", "z", "algorithms"):
            if key in doc and not isinstance(doc[key], (list, tuple)):
                doc[key] = (doc[key],)
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "SweepConfig":
        return cls.from_dict(json.loads(text))

    def points(self) -> list[tuple[int, int, tuple[Fraction, Fraction]]]:
        return [(m, z, b) for m in self.M for z in self.z for b in self.beta_ranges]


@dataclass(frozen=True)
class ExperimentRow:
    algorithm: str
    M: int
    z: int
    beta_low: Fraction
    beta_high: Fraction
    multiplier: Fraction
    accepted: int
    n_sets: int

    @property
    def acceptance_ratio(self) -> Fraction:
        return Fraction(self.accepted, self.n_sets)

    def sort_key(self) -> tuple:
        return (self.algorithm, self.M, self.z, self.beta_low, self.beta_high, self.multiplier)

    def csv_row(self) -> list:
        return [
            self.algorithm,
            self.M,
            self.z,
            num_str(self.beta_low),
            num_str(self.beta_high),
            num_str(self.multiplier),
            self.accepted,
            self.n_sets,
            num_str(self.acceptance_ratio),
        ]


@dataclass(frozen=True)
class Outcome:
    """One task set under one algorithm."""

    makespan: Fraction
    valid: bool
    lemma8: Fraction


@dataclass(frozen=True)
class SetResult:
    lb: Fraction
    outcomes: dict[str, Outcome]

    def accepted(self, algorithm: str, multiplier: Fraction) -> bool:
        o = self.outcomes[algorithm]
        return o.valid and o.makespan <= multiplier * self.lb


def evaluate_taskset(tasks: TaskSet, M: int, algorithms: Sequence[str]) -> SetResult:
    graphs = {}
    outcomes = {}
    for label in algorithms:
        seq, policy = parse_algorithm(label)
        if seq not in graphs:
            graphs[seq] = build_graph(tasks, seq)
        graph = graphs[seq]
        sched = schedule(graph, M, policy)
        outcomes[label] = Outcome(
            makespan(sched), not validate(sched, tasks, graph), lemma8_bound(graph, M)
        )
    return SetResult(lower_bound_fast(tasks, M), outcomes)


def set_seed(seed: int, M: int, z: int, beta: tuple[Fraction, Fraction], index: int) -> np.random.Generator:
    lo, hi = (int(b * QUANTUM) for b in beta)
    return np.random.default_rng(np.random.SeedSequence([seed, M, z, lo, hi, index]))


def _evaluate_one(args) -> SetResult:
    seed, M, z, beta, index, config_n, cap, algorithms = args
    gen = GenConfig(M=M, z=z, beta_range=beta, n_tasks=config_n, per_task_cap=cap)
    tasks = generate_taskset(gen, set_seed(seed, M, z, beta, index))
    return evaluate_taskset(tasks, M, algorithms)


def evaluate_point(
    config: SweepConfig, M: int, z: int, beta: tuple[Fraction, Fraction], n_sets: int | None = None
) -> list[SetResult]:
    n_sets = config.task_sets_per_point if n_sets is None else n_sets
    if n_sets < 1:
        raise ValueError("a point needs at least one task set")
    jobs = [
        (config.seed, M, z, beta, idx, config.tasks_per_processor * M, config.per_task_cap, config.algorithms)
        for idx in range(n_sets)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            return list(pool.map(_evaluate_one, jobs, chunksize=8))
    return [_evaluate_one(j) for j in jobs]


def rows_for_point(
    config: SweepConfig, M: int, z: int, beta: tuple[Fraction, Fraction], results: Sequence[SetResult]
) -> list[ExperimentRow]:
    rows = []
    for label in config.algorithms:
        for mult in config.multipliers:
            accepted = sum(r.accepted(label, mult) for r in results)
            rows.append(ExperimentRow(label, M, z, beta[0], beta[1], mult, accepted, len(results)))
    return rows


def run_point(
    config: SweepConfig,
    algorithm: str,
    deadline_multiplier,
    point: tuple[int, int, tuple[Fraction, Fraction]] | None = None,
    n_sets: int | None = None,
) -> ExperimentRow:
    """Acceptance ratio of one algorithm at one deadline multiplier."""
    M, z, beta = point if point is not None else config.points()[0]
    algorithm = algorithm.upper()
    cfg = replace(
        config, M=(M,), z=(z,), beta_ranges=(beta,),
        multipliers=(Fraction(deadline_multiplier),), algorithms=(algorithm,),
    )
    results = evaluate_point(cfg, M, z, beta, n_sets)
    return rows_for_point(cfg, M, z, beta, results)[0]


@dataclass
class SweepResult:
    rows: list[ExperimentRow]
    sets: dict[tuple, list[SetResult]]

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)

    def curve_exceptions(self) -> list[dict]:
        """Curves below 1.0 at the largest multiplier, with their Lemma-8 evidence."""
        out = []
        top = {}
        for row in self.rows:
            key = (row.algorithm, row.M, row.z, row.beta_low, row.beta_high)
            if key not in top or row.multiplier > top[key].multiplier:
                top[key] = row
        for key, row in sorted(top.items()):
            if row.accepted == row.n_sets:
                continue
            algorithm, M, z, lo, hi = key
            results = self.sets[(M, z, lo, hi)]
            rejected = [r for r in results if not r.accepted(algorithm, row.multiplier)]
            out.append(
                {
                    "algorithm": algorithm,
                    "M": M,
                    "z": z,
                    "beta": (lo, hi),
                    "ratio_at_max": row.acceptance_ratio,
                    "rejected": len(rejected),
                    "invalid": sum(not r.outcomes[algorithm].valid for r in rejected),
                    "worst_makespan_over_lb": max(r.outcomes[algorithm].makespan / r.lb for r in rejected),
                    "worst_lemma8_over_lb": max(r.outcomes[algorithm].lemma8 / r.lb for r in rejected),
                }
            )
        return out

    def report(self) -> str:
        lines = []
        exceptions = self.curve_exceptions()
        if not exceptions:
            lines.append("all curves reach 1.0 by the largest multiplier")
        for e in exceptions:
            lines.append(
                f"{e['algorithm']} M={e['M']} z={e['z']} beta={num_str(e['beta'][0])}-{num_str(e['beta'][1])}: "
                f"ratio {float(e['ratio_at_max']):.3f} at max multiplier; {e['rejected']} rejected "
                f"({e['invalid']} invalid); worst makespan/LB {float(e['worst_makespan_over_lb']):.4f}, "
                f"worst Lemma-8 bound/LB {float(e['worst_lemma8_over_lb']):.4f}"
            )
        return "\n".join(lines) + "\n"


def run_sweep(config: SweepConfig) -> SweepResult:
    rows: list[ExperimentRow] = []
    sets = {}
    for M, z, beta in config.points():
        results = evaluate_point(config, M, z, beta)
        sets[(M, z, beta[0], beta[1])] = results
        rows.extend(rows_for_point(config, M, z, beta, results))
    rows.sort(key=ExperimentRow.sort_key)
    return SweepResult(rows, sets)


def rows_to_csv(rows: Iterable[ExperimentRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_row())
    return buf.getvalue()


def plot_series(csv_text: str) -> dict:
    """Per-curve ``{"x": multipliers, "y": ratios}`` keyed by curve label."""
    series: dict[str, dict[str, list[float]]] = {}
    for rec in csv.DictReader(io.StringIO(csv_text)):
        label = f"{rec['algorithm']} M={rec['M']} z={rec['z']} beta={rec['beta_low']}-{rec['beta_high']}"
        curve = series.setdefault(label, {"x": [], "y": []})
        curve["x"].append(float(Fraction(rec["multiplier"])))
        curve["y"].append(float(Fraction(rec["ratio"])))
    return series
