"""Hand-built schedules with known validator verdicts.

Base task set: two tasks sharing semaphore ``s`` (chain 1 then 2) and one
independent task.  ``VALID`` entries must produce no violation; each
``INVALID`` entry breaks exactly one predicate.
"""

from fractions import Fraction

from dgasched.analysis import ViolationKind, build_theorem5_instance, theorem5_reference_graph, theorem5_reference_schedule
from dgasched.model import DependencyGraph, Policy, Schedule, Segment, SubjobKind, build_taskset

KINDS = {"c1": SubjobKind.FIRST, "a1": SubjobKind.CRITICAL, "c2": SubjobKind.SECOND}
h = Fraction(1, 2)

BASE = build_taskset([(1, 1, 1, "s"), (1, 1, 1, "s"), (1, 0, 2)])
BASE_GRAPH = DependencyGraph(BASE, {"s": (1, 2)})

# partitioned, one task per processor
DEDICATED = [
    ("c1", 1, 1, 0, 1), ("a1", 1, 1, 1, 2), ("c2", 1, 1, 2, 3),
    ("c1", 2, 2, 0, 1), ("a1", 2, 2, 2, 3), ("c2", 2, 2, 3, 4),
    ("c1", 3, 3, 0, 1), ("c2", 3, 3, 1, 3),
]


def build(rows, M, policy):
    return Schedule(tuple(Segment(t, KINDS[k], m, s, e) for k, t, m, s, e in rows), M, policy)


def replace(rows, old, *new):
    out = [r for r in rows if r[:2] != old]
    assert len(out) == len(rows) - 1
    return out + list(new)


def _zero_length_case():
    ts = build_taskset([(0, 1, 2, "s"), (1, 1, 0, "s")])
    g = DependencyGraph(ts, {"s": (1, 2)})
    rows = [("a1", 1, 1, 0, 1), ("c1", 2, 1, 1, 2), ("a1", 2, 1, 2, 3), ("c2", 1, 1, 3, 5)]
    return build(rows, 1, Policy.PARTITIONED_SIMPLE_NP), ts, g


def _theorem5_case():
    inst = build_theorem5_instance(2, 4, Fraction(1, 100))
    return theorem5_reference_schedule(inst, 2), inst, theorem5_reference_graph(inst)


def valid_cases():
    yield "dedicated-sp-np", build(DEDICATED, 3, Policy.SEMI_PARTITIONED_NP), BASE, BASE_GRAPH
    yield "dedicated-p-tied", build(DEDICATED, 3, Policy.PARTITIONED_TIED), BASE, BASE_GRAPH
    migrated = replace(DEDICATED, ("c2", 3), ("c2", 3, 3, 1, 2), ("c2", 3, 1, 3, 4))
    yield "sp-p-migrating-second-section", build(migrated, 3, Policy.SEMI_PARTITIONED_P), BASE, BASE_GRAPH
    split = replace(DEDICATED, ("c2", 3), ("c2", 3, 3, 1, 2), ("c2", 3, 3, 3, 4))
    yield "p-simple-split-second-section", build(split, 3, Policy.PARTITIONED_SIMPLE), BASE, BASE_GRAPH
    two = [
        ("c1", 1, 1, 0, 1), ("a1", 1, 1, 1, 2), ("c1", 3, 1, 2, 3), ("c2", 1, 1, 3, 4), ("c2", 3, 1, 4, 6),
        ("c1", 2, 2, 0, 1), ("a1", 2, 2, 2, 3), ("c2", 2, 2, 3, 4),
    ]
    yield "two-processor-p-tied", build(two, 2, Policy.PARTITIONED_TIED), BASE, BASE_GRAPH
    yield "zero-length-subjobs", *_zero_length_case()
    yield "theorem5-reference", *_theorem5_case()


def invalid_cases():
    """(name, schedule, tasks, graph, expected kind)."""
    yield (
        "overlap-on-processor",
        build(replace(DEDICATED, ("c2", 3), ("c2", 3, 1, 2 + h, 4 + h)), 3, Policy.SEMI_PARTITIONED_NP),
        BASE, BASE_GRAPH, ViolationKind.OVERLAP,
    )
    yield (
        "second-section-parallel-to-itself",
        build(replace(DEDICATED, ("c2", 3), ("c2", 3, 3, 1, 2), ("c2", 3, 2, 1, 2)), 3, Policy.SEMI_PARTITIONED_P),
        BASE, BASE_GRAPH, ViolationKind.INTRA_TASK_PARALLEL,
    )
    swapped = replace(replace(DEDICATED, ("c1", 3), ("c1", 3, 3, 2, 3)), ("c2", 3), ("c2", 3, 3, 0, 2))
    yield (
        "second-before-first",
        build(swapped, 3, Policy.SEMI_PARTITIONED_NP),
        BASE, BASE_GRAPH, ViolationKind.PRECEDENCE_BROKEN,
    )
    early = replace(replace(DEDICATED, ("a1", 2), ("a1", 2, 2, 1 + h, 2 + h)), ("c2", 2), ("c2", 2, 2, 2 + h, 3 + h))
    yield (
        "critical-sections-overlap",
        build(early, 3, Policy.SEMI_PARTITIONED_NP),
        BASE, BASE_GRAPH, ViolationKind.MUTEX_BROKEN,
    )
    yield (
        "short-second-section",
        build(replace(DEDICATED, ("c2", 3), ("c2", 3, 3, 1, 2 + h)), 3, Policy.SEMI_PARTITIONED_NP),
        BASE, BASE_GRAPH, ViolationKind.WORK_MISMATCH,
    )
    migrated = replace(DEDICATED, ("c2", 3), ("c2", 3, 1, 3, 5))
    yield (
        "partitioned-task-migrates",
        build(migrated, 3, Policy.PARTITIONED_TIED),
        BASE, BASE_GRAPH, ViolationKind.POLICY_BROKEN,
    )
    split = replace(DEDICATED, ("c2", 3), ("c2", 3, 3, 1, 2), ("c2", 3, 3, 3, 4))
    yield (
        "non-preemptive-split",
        build(split, 3, Policy.SEMI_PARTITIONED_NP),
        BASE, BASE_GRAPH, ViolationKind.POLICY_BROKEN,
    )
    late_chain = replace(
        replace(DEDICATED, ("a1", 1), ("a1", 1, 1, 3, 4)), ("c2", 1), ("c2", 1, 1, 4, 5)
    )
    yield (
        "chain-order-reversed",
        build(late_chain, 3, Policy.SEMI_PARTITIONED_NP),
        BASE, BASE_GRAPH, ViolationKind.MUTEX_BROKEN,
    )
