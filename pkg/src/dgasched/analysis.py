"""Lower bounds, list-schedule bounds and the schedule validator."""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .chain_builder import (
    DEFAULT_BRUTE_FORCE_CAP,
    CapExceededError,
    Sequencer,
    build_graph,
    critical_path_length,
)
from .model import (
    DependencyGraph,
    Policy,
    Schedule,
    Segment,
    SubjobKind,
    Task,
    TaskSet,
    format_time,
    makespan,
    total_work,
)

C1, A1, C2 = SubjobKind.FIRST, SubjobKind.CRITICAL, SubjobKind.SECOND


def lower_bound_exact(tasks: TaskSet, M: int, cap: int = DEFAULT_BRUTE_FORCE_CAP) -> Fraction:
    """``max(W / M, len(G*))`` with ``G*`` from exhaustive chain search."""
    for sem, group in tasks.by_semaphore().items():
        if len(group) > cap:
            raise CapExceededError(
                f"semaphore {sem} has {len(group)} tasks, above the cap of {cap}; use lower_bound_fast"
            )
    best = critical_path_length(build_graph(tasks, Sequencer.BRUTE_FORCE, cap))
    return max(total_work(tasks) / M, best)


def lower_bound_fast(tasks: TaskSet, M: int) -> Fraction:
    """``max(W / M, min c1 + min c2 + max per-semaphore critical work)``."""
    if len(tasks) == 0:
        raise ValueError("lower bound of an empty task set")
    critical = max(
        (sum((t.a1 for t in g), Fraction(0)) for g in tasks.by_semaphore().values()),
        default=Fraction(0),
    )
    path = min(t.c1 for t in tasks) + min(t.c2 for t in tasks) + critical
    return max(total_work(tasks) / M, path)


def lemma8_bound(graph: DependencyGraph, M: int) -> Fraction:
    """Makespan bound for any list schedule: ``(W - len(G)) / M + len(G)``."""
    length = critical_path_length(graph)
    return (total_work(graph.tasks) - length) / M + length


@dataclass(frozen=True)
class BoundsReport:
    lb_exact: Fraction | None
    lb_fast: Fraction
    lemma8_bound: Fraction
    achieved_makespan: Fraction
    ratio_vs_lb: Fraction
    ratio_basis: str

    def to_dict(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            out[key] = format_time(value) if isinstance(value, Fraction) else value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def bounds_report(
    tasks: TaskSet, graph: DependencyGraph, schedule: Schedule, cap: int = DEFAULT_BRUTE_FORCE_CAP
) -> BoundsReport:
    M = schedule.M
    try:
        exact = lower_bound_exact(tasks, M, cap)
    except CapExceededError:
        exact = None
    fast = lower_bound_fast(tasks, M)
    achieved = makespan(schedule)
    basis = exact if exact is not None else fast
    return BoundsReport(
        lb_exact=exact,
        lb_fast=fast,
        lemma8_bound=lemma8_bound(graph, M),
        achieved_makespan=achieved,
        ratio_vs_lb=achieved / basis if basis else Fraction(1),
        ratio_basis="lb_exact" if exact is not None else "lb_fast",
    )


# ------------------------------------------------------------------ validator


class ViolationKind(enum.Enum):
    OVERLAP = "Overlap"
    INTRA_TASK_PARALLEL = "IntraTaskParallel"
    PRECEDENCE_BROKEN = "PrecedenceBroken"
    MUTEX_BROKEN = "MutexBroken"
    POLICY_BROKEN = "PolicyBroken"
    WORK_MISMATCH = "WorkMismatch"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    detail: str

    def __str__(self) -> str:
        return f"{self.kind.value}: {self.detail}"


def _fmt(s: Segment) -> str:
    return f"{s.kind.label}[{s.task_id}]@P{s.processor}[{s.start},{s.end})"


def validate(
    schedule: Schedule, tasks: TaskSet, graph: DependencyGraph, policy: Policy | None = None
) -> list[Violation]:
    """Check a schedule against the task set, its graph and a policy.

    Zero-length subjobs have no segments; they complete at the latest finish
    of their predecessors.
    """
    policy = Policy(policy) if policy is not None else schedule.policy
    out: list[Violation] = []

    def flag(kind: ViolationKind, detail: str) -> None:
        out.append(Violation(kind, detail))

    # per-processor overlap
    for m, segs in schedule.by_processor().items():
        segs = sorted(segs, key=lambda s: (s.start, s.end))
        for x, y in zip(segs, segs[1:]):
            if y.start < x.end:
                flag(ViolationKind.OVERLAP, f"P{m}: {_fmt(x)} overlaps {_fmt(y)}")

    by_task: dict[int, list[Segment]] = defaultdict(list)
    by_subjob: dict[tuple[int, SubjobKind], list[Segment]] = defaultdict(list)
    for s in schedule.segments:
        by_task[s.task_id].append(s)
        by_subjob[(s.task_id, s.kind)].append(s)

    # same task on two processors at once
    for tid, segs in by_task.items():
        for x_idx, x in enumerate(segs):
            for y in segs[x_idx + 1:]:
                if x.processor != y.processor and x.start < y.end and y.start < x.end:
                    flag(ViolationKind.INTRA_TASK_PARALLEL, f"task {tid}: {_fmt(x)} and {_fmt(y)}")

    # scheduled work equals declared work
    known = {t.id for t in tasks}
    for (tid, kind), segs in sorted(by_subjob.items()):
        if tid not in known:
            flag(ViolationKind.WORK_MISMATCH, f"segments for unknown task {tid}")
    for t in tasks:
        for kind in SubjobKind:
            got = sum((s.length for s in by_subjob.get((t.id, kind), ())), Fraction(0))
            if got != t.duration(kind):
                flag(
                    ViolationKind.WORK_MISMATCH,
                    f"{kind.label}[{t.id}] scheduled {got}, declared {t.duration(kind)}",
                )

    finish: dict[tuple[int, SubjobKind], Fraction] = {}

    def start_of(tid: int, kind: SubjobKind) -> Fraction | None:
        segs = by_subjob.get((tid, kind))
        return min(s.start for s in segs) if segs else None

    def finish_of(tid: int, kind: SubjobKind) -> Fraction:
        key = (tid, kind)
        if key not in finish:
            segs = by_subjob.get(key)
            if segs:
                finish[key] = max(s.end for s in segs)
            else:
                preds = []
                if kind is not C1:
                    preds.append(finish_of(tid, SubjobKind(kind - 1)))
                if kind is A1:
                    p = graph.chain_predecessor(tid)
                    if p is not None:
                        preds.append(finish_of(p, A1))
                finish[key] = max(preds, default=Fraction(0))
        return finish[key]

    # intra-task precedence
    for t in tasks:
        for kind in (A1, C2):
            s = start_of(t.id, kind)
            if s is None:
                continue
            before = SubjobKind(kind - 1)
            if s < finish_of(t.id, before):
                flag(
                    ViolationKind.PRECEDENCE_BROKEN,
                    f"{kind.label}[{t.id}] starts at {s} before {before.label}[{t.id}] finishes at {finish_of(t.id, before)}",
                )

    # mutual exclusion and chain order
    for sem, order in graph.chains.items():
        segs = sorted(
            (s for tid in order for s in by_subjob.get((tid, A1), ())), key=lambda s: s.start
        )
        for x_idx, x in enumerate(segs):
            for y in segs[x_idx + 1:]:
                if y.start < x.end and x.task_id != y.task_id:
                    flag(ViolationKind.MUTEX_BROKEN, f"{sem}: {_fmt(x)} overlaps {_fmt(y)}")
        for i, j in zip(order, order[1:]):
            s = start_of(j, A1)
            if s is not None and s < finish_of(i, A1):
                flag(
                    ViolationKind.MUTEX_BROKEN,
                    f"{sem}: a1[{j}] starts at {s} before its chain predecessor a1[{i}] finishes",
                )

    # policy conformance
    for (tid, kind), segs in sorted(by_subjob.items()):
        if len(segs) > 1 and (kind is not C2 or not policy.second_preemptive):
            flag(ViolationKind.POLICY_BROKEN, f"{kind.label}[{tid}] is split into {len(segs)} pieces under {policy.value}")
    if policy.partitioned:
        for tid, segs in sorted(by_task.items()):
            procs = sorted({s.processor for s in segs})
            if len(procs) > 1:
                flag(ViolationKind.POLICY_BROKEN, f"task {tid} runs on processors {procs} under {policy.value}")
    return out


# ------------------------------------------------ lower-bound instance family


def theorem5_size(M: int) -> int:
    return M * M - M + 1


def build_theorem5_instance(M: int, Q, delta) -> TaskSet:
    """One semaphore, ``N = M^2 - M + 1`` tasks; one long task and N-1 tiny ones.

    Task 1 is ``(delta, Q - Q/M, Q/M + N delta)``; the others are
    ``(delta, delta, Q/M)``.  Requires ``0 < delta < Q / (M N)``.
    """
    Q, delta = Fraction(Q), Fraction(delta)
    if M < 2:
        raise ValueError("the instance needs M >= 2")
    n = theorem5_size(M)
    if not 0 < delta < Q / (M * n):
        raise ValueError(f"need 0 < delta < Q/(M N) = {Q / (M * n)}, got {delta}")
    tasks = [Task(1, delta, Q - Q / M, Q / M + n * delta, "s1")]
    tasks += [Task(i, delta, delta, Q / M, "s1") for i in range(2, n + 1)]
    return TaskSet(tuple(tasks))


def theorem5_optimal_graph(instance: TaskSet) -> DependencyGraph:
    """Minimum-critical-path graph: task 1's critical section goes first."""
    return DependencyGraph(instance, {"s1": tuple(range(1, len(instance) + 1))})


def theorem5_reference_graph(instance: TaskSet) -> DependencyGraph:
    """Chain in reversed index order, the one the reference schedule follows."""
    return DependencyGraph(instance, {"s1": tuple(range(len(instance), 0, -1))})


def theorem5_reference_schedule(instance: TaskSet, M: int) -> Schedule:
    """The partitioned reference schedule of makespan ``(2N + M) delta + Q``.

    Task 1 lives on processor M.  The other tasks are dealt round-robin to
    processors 1..M-1 (M each), critical sections run in reversed index
    order from ``M delta``, and from ``(M + N) delta`` on each of the first
    M-1 processors runs its second sections back to back while task 1's
    critical and second sections run on processor M.
    """
    n = len(instance)
    if n != theorem5_size(M):
        raise ValueError(f"instance has {n} tasks, expected {theorem5_size(M)} for M={M}")
    t1 = instance.task(1)
    delta = t1.c1
    segs: list[Segment] = [Segment(1, C1, M, Fraction(0), delta)]
    proc = {}
    for i in range(2, n + 1):
        slot, m = divmod(i - 2, M - 1)
        proc[i] = m + 1
        segs.append(Segment(i, C1, m + 1, slot * delta, (slot + 1) * delta))
    t = M * delta
    for i in range(n, 1, -1):
        a = instance.task(i).a1
        segs.append(Segment(i, A1, proc[i], t, t + a))
        t += a
    t = (M + n) * delta
    a_end = t + t1.a1
    segs.append(Segment(1, A1, M, t, a_end))
    segs.append(Segment(1, C2, M, a_end, a_end + t1.c2))
    cursor = {m: (M + n) * delta for m in range(1, M)}
    for i in range(2, n + 1):
        m = proc[i]
        c2 = instance.task(i).c2
        segs.append(Segment(i, C2, m, cursor[m], cursor[m] + c2))
        cursor[m] += c2
    return Schedule(tuple(segs), M, Policy.PARTITIONED_TIED)


def theorem5_reference_makespan(M: int, Q, delta) -> Fraction:
    return (2 * theorem5_size(M) + M) * Fraction(delta) + Fraction(Q)


def theorem5_partitioned_floor(M: int, Q, delta) -> Fraction:
    """Makespan floor for any (semi-)partitioned schedule of the optimal graph."""
    return Fraction(delta) + (2 - Fraction(1, M)) * Fraction(Q)
