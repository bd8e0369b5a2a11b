"""Domain types for frame-based tasks sharing binary semaphores.

All time quantities are :class:`fractions.Fraction`; nothing in the core
rounds.  Schedulers and kernels work on integer ticks obtained from
:func:`tick_scale`, which is exact as well.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


Time = Fraction


def to_time(value) -> Fraction:
    """Parse a time value exactly.

    Accepts ints, Fractions, Decimals, decimal strings (``"0.01"``),
    ratio strings (``"1/3"``) and ``[num, den]`` pairs.  Floats are
    converted through their shortest repr, so ``0.1`` means one tenth.
    """
    if isinstance(value, Fraction):
        t = value
    elif isinstance(value, bool):
        raise TypeError("booleans are not time values")
    elif isinstance(value, int):
        t = Fraction(value)
    elif isinstance(value, (str, Decimal)):
        t = Fraction(str(value).strip())
    elif isinstance(value, float):
        t = Fraction(repr(value))
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        num, den = value
        if not isinstance(num, int) or not isinstance(den, int):
            raise TypeError(f"[num, den] must be integers, got {value!r}")
        t = Fraction(num, den)
    else:
        raise TypeError(f"cannot interpret {value!r} as a time value")
    if t < 0:
        raise ValueError(f"time values must be non-negative, got {t}")
    return t


def format_time(t: Fraction) -> str | list[int]:
    """Inverse of :func:`to_time`: a decimal string when exact, else ``[num, den]``."""
    t = Fraction(t)
    den = t.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return [t.numerator, t.denominator]
    digits = max(twos, fives)
    if digits == 0:
        return str(t.numerator)
    scaled = t * 10**digits
    assert scaled.denominator == 1
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def ratio_str(t: Fraction) -> str:
    """``num/den`` form used in CSV output."""
    t = Fraction(t)
    return str(t.numerator) if t.denominator == 1 else f"{t.numerator}/{t.denominator}"


def tick_scale(values: Iterable[Fraction]) -> int:
    """Least common denominator of ``values``; multiplying by it yields ints."""
    scale = 1
    for v in values:
        scale = math.lcm(scale, Fraction(v).denominator)
    return scale


class SubjobKind(enum.IntEnum):
    FIRST = 0
    CRITICAL = 1
    SECOND = 2

    @property
    def label(self) -> str:
        return ("c1", "a1", "c2")[self]

    @classmethod
    def parse(cls, text: str) -> "SubjobKind":
        key = text.strip().lower()
        for kind in cls:
            if key in (kind.label, kind.name.lower()):
                return kind
        if key in ("a", "cs", "critical"):
            return cls.CRITICAL
        raise ValueError(f"unknown subjob kind {text!r}")


class Policy(enum.Enum):
    SEMI_PARTITIONED_NP = "sp-np"
    SEMI_PARTITIONED_P = "sp-p"
    PARTITIONED_TIED = "p-tied"
    PARTITIONED_SIMPLE = "p-simple"
    PARTITIONED_SIMPLE_NP = "p-simple-np"

    @property
    def partitioned(self) -> bool:
        return self.value.startswith("p-")

    @property
    def second_preemptive(self) -> bool:
        """Whether second non-critical sections may be split into pieces."""
        return self in (
            Policy.SEMI_PARTITIONED_P,
            Policy.PARTITIONED_TIED,
            Policy.PARTITIONED_SIMPLE,
        )


@dataclass(frozen=True)
class Task:
    id: int
    c1: Fraction
    a1: Fraction
    c2: Fraction
    semaphore: str | None = None

    def __post_init__(self):
        for name in ("c1", "a1", "c2"):
            object.__setattr__(self, name, to_time(getattr(self, name)))
        if self.a1 == 0:
            # a zero-length critical section never contends for its semaphore
            object.__setattr__(self, "semaphore", None)
        elif self.semaphore is None:
            raise ValueError(f"task {self.id} has a critical section but no semaphore")
        else:
            object.__setattr__(self, "semaphore", str(self.semaphore))

    @property
    def total(self) -> Fraction:
        return self.c1 + self.a1 + self.c2

    def duration(self, kind: SubjobKind) -> Fraction:
        return (self.c1, self.a1, self.c2)[kind]


@dataclass(frozen=True)
class TaskSet:
    tasks: tuple[Task, ...]
    deadline: Fraction | None = None

    def __post_init__(self):
        tasks = tuple(sorted(self.tasks, key=lambda t: t.id))
        ids = [t.id for t in tasks]
        if ids != list(range(1, len(tasks) + 1)):
            raise ValueError(f"task ids must be 1..N without gaps, got {ids}")
        object.__setattr__(self, "tasks", tasks)
        if self.deadline is not None:
            object.__setattr__(self, "deadline", to_time(self.deadline))

    def __len__(self) -> int:
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    def task(self, task_id: int) -> Task:
        return self.tasks[task_id - 1]

    @property
    def semaphores(self) -> tuple[str, ...]:
        """Distinct semaphore ids in order of first use."""
        seen: dict[str, None] = {}
        for t in self.tasks:
            if t.semaphore is not None:
                seen.setdefault(t.semaphore, None)
        return tuple(seen)

    @property
    def z(self) -> int:
        return len(self.semaphores)

    def semaphore_index(self) -> dict[str, int]:
        return {s: k for k, s in enumerate(self.semaphores)}

    def by_semaphore(self) -> dict[str, list[Task]]:
        groups: dict[str, list[Task]] = {s: [] for s in self.semaphores}
        for t in self.tasks:
            if t.semaphore is not None:
                groups[t.semaphore].append(t)
        return groups

    def tick_scale(self) -> int:
        return tick_scale(v for t in self.tasks for v in (t.c1, t.a1, t.c2))


def total_work(tasks: Iterable[Task]) -> Fraction:
    return sum((t.total for t in tasks), Fraction(0))


@dataclass(frozen=True, order=True)
class SubjobRef:
    task_id: int
    kind: SubjobKind

    def __str__(self) -> str:
        return f"{self.kind.label}[{self.task_id}]"


@dataclass(frozen=True)
class DependencyGraph:
    """Subjob DAG: intra-task edges plus one chain per semaphore.

    ``chains`` maps each semaphore to its critical-section order as task ids.
    """

    tasks: TaskSet
    chains: Mapping[str, tuple[int, ...]]
    edges: frozenset[tuple[SubjobRef, SubjobRef]] = field(init=False)

    def __post_init__(self):
        groups = self.tasks.by_semaphore()
        chains = {s: tuple(self.chains.get(s, ())) for s in groups}
        for s, order in chains.items():
            expected = sorted(t.id for t in groups[s])
            if sorted(order) != expected:
                raise ValueError(f"chain for {s} must order tasks {expected}, got {list(order)}")
        extra = set(self.chains) - set(groups)
        if extra:
            raise ValueError(f"chains given for unused semaphores {sorted(extra)}")
        object.__setattr__(self, "chains", chains)
        edges = set()
        for t in self.tasks:
            c1 = SubjobRef(t.id, SubjobKind.FIRST)
            a1 = SubjobRef(t.id, SubjobKind.CRITICAL)
            c2 = SubjobRef(t.id, SubjobKind.SECOND)
            edges.add((c1, a1))
            edges.add((a1, c2))
        for order in chains.values():
            for i, j in zip(order, order[1:]):
                edges.add((SubjobRef(i, SubjobKind.CRITICAL), SubjobRef(j, SubjobKind.CRITICAL)))
        object.__setattr__(self, "edges", frozenset(edges))

    @property
    def vertices(self) -> list[SubjobRef]:
        return [SubjobRef(t.id, k) for t in self.tasks for k in SubjobKind]

    def duration(self, v: SubjobRef) -> Fraction:
        return self.tasks.task(v.task_id).duration(v.kind)

    def predecessors(self) -> dict[SubjobRef, list[SubjobRef]]:
        preds: dict[SubjobRef, list[SubjobRef]] = {v: [] for v in self.vertices}
        for u, v in sorted(self.edges):
            preds[v].append(u)
        return preds

    def successors(self) -> dict[SubjobRef, list[SubjobRef]]:
        succs: dict[SubjobRef, list[SubjobRef]] = {v: [] for v in self.vertices}
        for u, v in sorted(self.edges):
            succs[u].append(v)
        return succs

    def chain_predecessor(self, task_id: int) -> int | None:
        sem = self.tasks.task(task_id).semaphore
        if sem is None:
            return None
        order = self.chains[sem]
        pos = order.index(task_id)
        return order[pos - 1] if pos > 0 else None

    def topological_order(self) -> list[SubjobRef]:
        """Kahn's algorithm; raises ``ValueError`` on a cycle."""
        preds = self.predecessors()
        succs = self.successors()
        indeg = {v: len(ps) for v, ps in preds.items()}
        ready = sorted(v for v, d in indeg.items() if d == 0)
        out = []
        while ready:
            v = ready.pop(0)
            out.append(v)
            for w in succs[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        if len(out) != len(indeg):
            raise ValueError("dependency graph contains a cycle")
        return out

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except ValueError:
            return False
        return True

    def check(self) -> None:
        """Assert the structural invariants: acyclic, simple chains."""
        self.topological_order()
        outdeg: dict[SubjobRef, int] = {}
        indeg: dict[SubjobRef, int] = {}
        for u, v in self.edges:
            if u.kind is SubjobKind.CRITICAL and v.kind is SubjobKind.CRITICAL:
                outdeg[u] = outdeg.get(u, 0) + 1
                indeg[v] = indeg.get(v, 0) + 1
                su = self.tasks.task(u.task_id).semaphore
                sv = self.tasks.task(v.task_id).semaphore
                if su is None or su != sv:
                    raise ValueError(f"chain edge {u} -> {v} crosses semaphores")
        if any(d > 1 for d in outdeg.values()) or any(d > 1 for d in indeg.values()):
            raise ValueError("a semaphore chain branches")

    def edge_list(self) -> str:
        return "".join(f"{u} -> {v}\n" for u, v in sorted(self.edges))


@dataclass(frozen=True, order=True)
class Segment:
    task_id: int
    kind: SubjobKind
    processor: int
    start: Fraction
    end: Fraction

    def __post_init__(self):
        object.__setattr__(self, "kind", SubjobKind(self.kind))
        object.__setattr__(self, "start", to_time(self.start))
        object.__setattr__(self, "end", to_time(self.end))
        if not self.start < self.end:
            raise ValueError(f"segment must have start < end: {self}")

    @property
    def length(self) -> Fraction:
        return self.end - self.start


@dataclass(frozen=True)
class Schedule:
    """Execution segments of one frame on ``M`` processors (numbered 1..M).

    Overlap and precedence are *not* checked here; see
    :func:`dgasched.analysis.validate`.
    """

    segments: tuple[Segment, ...]
    M: int
    policy: Policy

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        segs = tuple(sorted(self.segments, key=lambda s: (s.start, s.processor, s.task_id, s.kind)))
        for s in segs:
            if not 1 <= s.processor <= self.M:
                raise ValueError(f"processor {s.processor} outside 1..{self.M}")
        object.__setattr__(self, "segments", segs)

    def by_processor(self) -> dict[int, list[Segment]]:
        out: dict[int, list[Segment]] = {m: [] for m in range(1, self.M + 1)}
        for s in self.segments:
            out[s.processor].append(s)
        return out

    def gantt(self) -> str:
        lines = []
        for m, segs in self.by_processor().items():
            cells = [f"[{ratio_str(s.start)},{ratio_str(s.end)}) {s.kind.label}[{s.task_id}]" for s in segs]
            lines.append(f"P{m}: " + "  ".join(cells))
        return "\n".join(lines) + "\n"


def makespan(schedule: Schedule) -> Fraction:
    return max((s.end for s in schedule.segments), default=Fraction(0))


# ---------------------------------------------------------------- JSON / CSV


def taskset_to_dict(tasks: TaskSet) -> dict:
    doc: dict = {
        "tasks": [
            {
                "id": t.id,
                "c1": format_time(t.c1),
                "a1": format_time(t.a1),
                "c2": format_time(t.c2),
                "semaphore": t.semaphore,
            }
            for t in tasks
        ]
    }
    if tasks.deadline is not None:
        doc["deadline"] = format_time(tasks.deadline)
    return doc


def taskset_from_dict(doc: Mapping) -> TaskSet:
    tasks = [
        Task(
            id=int(item["id"]),
            c1=to_time(item["c1"]),
            a1=to_time(item["a1"]),
            c2=to_time(item["c2"]),
            semaphore=item.get("semaphore"),
        )
        for item in doc["tasks"]
    ]
    deadline = doc.get("deadline")
    return TaskSet(tuple(tasks), None if deadline is None else to_time(deadline))


def dumps_taskset(tasks: TaskSet) -> str:
    return json.dumps(taskset_to_dict(tasks), indent=2) + "\n"


def loads_taskset(text: str) -> TaskSet:
    # JSON numbers such as 0.1 must not pass through binary floats
    return taskset_from_dict(json.loads(text, parse_float=Decimal))


SCHEDULE_COLUMNS = ("task", "kind", "processor", "start", "end")


def schedule_to_csv(schedule: Schedule, graph: DependencyGraph | None = None) -> str:
    """CSV export; metadata and chain orders ride along as ``#`` lines."""
    buf = io.StringIO()
    buf.write(f"# policy={schedule.policy.value} M={schedule.M}\n")
    if graph is not None:
        for sem, order in graph.chains.items():
            buf.write(f"# chain {sem}: {' '.join(map(str, order))}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCHEDULE_COLUMNS)
    for s in schedule.segments:
        writer.writerow([s.task_id, s.kind.label, s.processor, ratio_str(s.start), ratio_str(s.end)])
    return buf.getvalue()


def schedule_from_csv(text: str) -> tuple[Schedule, dict[str, tuple[int, ...]]]:
    meta: dict[str, str] = {}
    chains: dict[str, tuple[int, ...]] = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("chain "):
                sem, _, ids = body[len("chain "):].rpartition(":")
                chains[sem.strip()] = tuple(int(x) for x in ids.split())
            else:
                for item in body.split():
                    key, _, value = item.partition("=")
                    meta[key] = value
        elif line.strip():
            rows.append(line)
    reader = csv.DictReader(rows)
    if tuple(reader.fieldnames or ()) != SCHEDULE_COLUMNS:
        raise ValueError(f"schedule CSV must have columns {','.join(SCHEDULE_COLUMNS)}")
    segments = [
        Segment(
            int(r["task"]),
            SubjobKind.parse(r["kind"]),
            int(r["processor"]),
            Fraction(r["start"]),
            Fraction(r["end"]),
        )
        for r in reader
    ]
    if "M" not in meta or "policy" not in meta:
        raise ValueError("schedule CSV lacks the '# policy=... M=...' header")
    return Schedule(tuple(segments), int(meta["M"]), Policy(meta["policy"])), chains


def build_taskset(rows: Sequence[tuple], deadline=None) -> TaskSet:
    """Convenience constructor: ``rows`` of ``(c1, a1, c2[, semaphore])``, ids from 1."""
    tasks = []
    for i, row in enumerate(rows, start=1):
        c1, a1, c2, *rest = row
        tasks.append(Task(i, c1, a1, c2, rest[0] if rest else ("s1" if to_time(a1) > 0 else None)))
    return TaskSet(tuple(tasks), deadline)
