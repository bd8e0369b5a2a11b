"""Per-semaphore critical-section ordering via the delivery-time reduction.

For each semaphore the tasks using it become single-machine jobs with
release ``c1``, processing ``a1`` and delivery ``c2``.  A sequence for
those jobs is a chain order in the dependency graph, and the latest
delivery of its earliest-start schedule equals the longest path of that
graph component.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .model import DependencyGraph, SubjobKind, SubjobRef, Task, TaskSet, tick_scale

DEFAULT_BRUTE_FORCE_CAP = 9


class CapExceededError(ValueError):
    """Raised when exhaustive search is requested on too many jobs."""


class Sequencer(enum.Enum):
    JKS = "jks"
    POTTS = "potts"
    BRUTE_FORCE = "brute"

    @property
    def alpha(self) -> Fraction:
        """Proven approximation factor for the critical path length."""
        return {"jks": Fraction(2), "potts": Fraction(3, 2), "brute": Fraction(1)}[self.value]


@dataclass(frozen=True)
class DeliveryJob:
    job_id: int
    r: Fraction
    p: Fraction
    q: Fraction


@dataclass(frozen=True)
class SingleMachineSchedule:
    order: tuple[int, ...]
    start: dict[int, Fraction]
    finish: dict[int, Fraction]
    delivered_by: Fraction


@dataclass(frozen=True)
class CriticalSequenceInfo:
    critical_job: int
    first_busy_job: int
    interference_job: int | None


def reduce_to_delivery(tasks: Sequence[Task]) -> list[DeliveryJob]:
    sems = {t.semaphore for t in tasks}
    if len(sems) > 1:
        raise ValueError(f"tasks use several semaphores: {sorted(map(str, sems))}")
    return [DeliveryJob(t.id, t.c1, t.a1, t.c2) for t in tasks]


class _Packed:
    """Jobs sorted by id and scaled to integer ticks for the kernels."""

    def __init__(self, jobs: Sequence[DeliveryJob], force_python: bool = False):
        self.jobs = sorted(jobs, key=lambda j: j.job_id)
        ids = [j.job_id for j in self.jobs]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate job ids in {ids}")
        self.scale = tick_scale(v for j in self.jobs for v in (j.r, j.p, j.q))
        s = self.scale
        self.r, self.p, self.q, self.kernels = _kernels.arrays(
            [j.r * s for j in self.jobs],
            [j.p * s for j in self.jobs],
            [j.q * s for j in self.jobs],
            force_python=force_python,
        )

    def index(self, order: Sequence[int]) -> list[int]:
        pos = {j.job_id: k for k, j in enumerate(self.jobs)}
        return [pos[i] for i in order]

    def schedule(self, positions) -> SingleMachineSchedule:
        """Earliest-start schedule of the jobs in the given positional order."""
        order = tuple(self.jobs[int(k)].job_id for k in positions)
        start: dict[int, Fraction] = {}
        finish: dict[int, Fraction] = {}
        t = Fraction(0)
        best = Fraction(0)
        for k in positions:
            j = self.jobs[int(k)]
            s = max(t, j.r)
            t = s + j.p
            start[j.job_id] = s
            finish[j.job_id] = t
            best = max(best, t + j.q)
        return SingleMachineSchedule(order, start, finish, best)


def _empty() -> SingleMachineSchedule:
    return SingleMachineSchedule((), {}, {}, Fraction(0))


def schedule_in_order(jobs: Sequence[DeliveryJob], order: Sequence[int]) -> SingleMachineSchedule:
    """Earliest-start schedule for an explicit id order."""
    if not jobs:
        return _empty()
    packed = _Packed(jobs)
    if sorted(order) != [j.job_id for j in packed.jobs]:
        raise ValueError("order must be a permutation of the job ids")
    return packed.schedule(packed.index(order))


def jks(jobs: Sequence[DeliveryJob]) -> SingleMachineSchedule:
    """Extended Jackson's rule; ties on delivery time go to the smaller id."""
    if not jobs:
        return _empty()
    packed = _Packed(jobs)
    return packed.schedule(packed.kernels["jks_order"](packed.r, packed.p, packed.q))


def potts(jobs: Sequence[DeliveryJob]) -> SingleMachineSchedule:
    if not jobs:
        return _empty()
    packed = _Packed(jobs)
    return packed.schedule(packed.kernels["potts_order"](packed.r, packed.p, packed.q))


def brute_force_optimal(
    jobs: Sequence[DeliveryJob], cap: int = DEFAULT_BRUTE_FORCE_CAP
) -> SingleMachineSchedule:
    """Optimal sequence by exhaustive branch and bound (first optimum in id order)."""
    if len(jobs) > cap:
        raise CapExceededError(f"{len(jobs)} jobs exceed the brute-force cap of {cap}")
    if not jobs:
        return _empty()
    packed = _Packed(jobs)
    return packed.schedule(packed.kernels["brute_force_order"](packed.r, packed.p, packed.q))


def critical_sequence(
    schedule: SingleMachineSchedule, jobs: Sequence[DeliveryJob]
) -> CriticalSequenceInfo | None:
    """Critical, first-busy and interference job of ``schedule.order``.

    Returns ``None`` for an empty schedule.  The order is re-simulated with
    earliest starts, so only ``schedule.order`` is consulted.
    """
    if not schedule.order:
        return None
    packed = _Packed(jobs)
    positions = packed.index(schedule.order)
    c, a, b = packed.kernels["critical_sequence"](
        packed.r, packed.p, packed.q, np.array(positions, np.int64)
    )
    ids = [j.job_id for j in packed.jobs]
    return CriticalSequenceInfo(ids[c], ids[a], None if b < 0 else ids[b])


def sequence(
    jobs: Sequence[DeliveryJob], sequencer: Sequencer, cap: int = DEFAULT_BRUTE_FORCE_CAP
) -> SingleMachineSchedule:
    if sequencer is Sequencer.JKS:
        return jks(jobs)
    if sequencer is Sequencer.POTTS:
        return potts(jobs)
    return brute_force_optimal(jobs, cap)


def build_graph(
    tasks: TaskSet, sequencer: Sequencer = Sequencer.POTTS, cap: int = DEFAULT_BRUTE_FORCE_CAP
) -> DependencyGraph:
    """Order every semaphore's critical sections with ``sequencer``."""
    sequencer = Sequencer(sequencer)
    chains = {
        sem: sequence(reduce_to_delivery(group), sequencer, cap).order
        for sem, group in tasks.by_semaphore().items()
    }
    return DependencyGraph(tasks, chains)


def longest_paths(graph: DependencyGraph) -> dict[SubjobRef, Fraction]:
    """Longest path length ending at (and including) each vertex."""
    preds = graph.predecessors()
    finish: dict[SubjobRef, Fraction] = {}
    for v in graph.topological_order():
        finish[v] = max((finish[u] for u in preds[v]), default=Fraction(0)) + graph.duration(v)
    return finish


def bottom_levels(graph: DependencyGraph) -> dict[SubjobRef, Fraction]:
    """Longest path length starting at (and including) each vertex."""
    succs = graph.successors()
    level: dict[SubjobRef, Fraction] = {}
    for v in reversed(graph.topological_order()):
        level[v] = max((level[w] for w in succs[v]), default=Fraction(0)) + graph.duration(v)
    return level


def critical_path_length(graph: DependencyGraph) -> Fraction:
    return max(longest_paths(graph).values(), default=Fraction(0))


def component_length(graph: DependencyGraph, semaphore: str) -> Fraction:
    """Longest path inside the component of ``semaphore``'s chain."""
    members = set(graph.chains[semaphore])
    finish = longest_paths(graph)
    return max(
        (finish[SubjobRef(i, SubjobKind.SECOND)] for i in members), default=Fraction(0)
    )
