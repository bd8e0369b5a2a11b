"""Multiprocessor schedules for a dependency graph.

All schedulers are offline and deterministic.  They simulate on integer
ticks (the task set's common denominator) and emit exact segments.

Dispatch priority, wherever several subjobs compete for a processor:
critical sections first, the one whose semaphore chain has the most
unfinished critical-section work winning; then non-critical sections by
largest bottom level (longest path to a sink, own length included).
Remaining ties go to the smaller task id.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction

from .model import DependencyGraph, Policy, Schedule, Segment, SubjobKind

C1, A1, C2 = SubjobKind.FIRST, SubjobKind.CRITICAL, SubjobKind.SECOND


@dataclass(frozen=True)
class SchedulerConfig:
    M: int
    policy: Policy = Policy.SEMI_PARTITIONED_P
    priority_rule: str = "chain-first"

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        object.__setattr__(self, "policy", Policy(self.policy))
        if self.priority_rule != "chain-first":
            raise ValueError(f"unknown priority rule {self.priority_rule!r}")


class _Ticks:
    """Integer view of a graph: durations, chain links and static priorities."""

    def __init__(self, graph: DependencyGraph):
        tasks = graph.tasks
        self.graph = graph
        self.n = len(tasks)
        self.ids = [t.id for t in tasks]
        self.scale = tasks.tick_scale()
        s = self.scale
        self.dur = [[int(t.c1 * s), int(t.a1 * s), int(t.c2 * s)] for t in tasks]
        self.sem = [t.semaphore for t in tasks]
        self.chain_pred = [-1] * self.n
        self.chain_succ = [-1] * self.n
        for order in graph.chains.values():
            for i, j in zip(order, order[1:]):
                self.chain_pred[j - 1] = i - 1
                self.chain_succ[i - 1] = j - 1
        # unfinished critical-section work per semaphore
        self.chain_left = {sem: 0 for sem in graph.chains}
        for i in range(self.n):
            if self.sem[i] is not None:
                self.chain_left[self.sem[i]] += self.dur[i][1]
        # bottom levels, computed backwards along chains
        self.bottom = [[0, 0, 0] for _ in range(self.n)]
        for order in graph.chains.values():
            nxt = 0
            for tid in reversed(order):
                i = tid - 1
                d = self.dur[i]
                self.bottom[i][1] = d[1] + max(d[2], nxt)
                nxt = self.bottom[i][1]
        for i in range(self.n):
            d = self.dur[i]
            self.bottom[i][2] = d[2]
            if self.sem[i] is None:
                self.bottom[i][1] = d[1] + d[2]
            self.bottom[i][0] = d[0] + self.bottom[i][1]

    def priority(self, i: int, k: int) -> tuple:
        if k == 1:
            return (0, -self.chain_left.get(self.sem[i], 0), self.ids[i], k)
        return (1, -self.bottom[i][k], self.ids[i], k)

    def schedule(self, pieces: list[tuple[int, int, int, int, int]], M: int, policy: Policy) -> Schedule:
        """``pieces`` are ``(task_index, kind, processor0, start, end)`` in ticks."""
        pieces = sorted(p for p in pieces if p[4] > p[3])
        merged: list[list[int]] = []
        for i, k, m, s, e in sorted(pieces, key=lambda p: (p[0], p[1], p[2], p[3])):
            last = merged[-1] if merged else None
            if last and last[0] == i and last[1] == k and last[2] == m and last[4] == s:
                last[4] = e
            else:
                merged.append([i, k, m, s, e])
        scale = self.scale
        segs = tuple(
            Segment(self.ids[i], SubjobKind(k), m + 1, Fraction(s, scale), Fraction(e, scale))
            for i, k, m, s, e in merged
        )
        return Schedule(segs, M, policy)


def schedule_dedicated(graph: DependencyGraph, M: int, policy: Policy = Policy.PARTITIONED_TIED) -> Schedule:
    """Task ``i`` alone on processor ``i``, every subjob as early as possible."""
    n = len(graph.tasks)
    if M < n:
        raise ValueError(f"dedicated schedule needs M >= N ({M} < {n}); use a list policy")
    tk = _Ticks(graph)
    a_finish = [0] * n
    pieces = []
    for tid in _chain_topological(graph):
        i = tid - 1
        c1, a1, c2 = tk.dur[i]
        ready = c1
        if tk.chain_pred[i] >= 0:
            ready = max(ready, a_finish[tk.chain_pred[i]])
        a_finish[i] = ready + a1
        pieces += [(i, 0, i, 0, c1), (i, 1, i, ready, ready + a1), (i, 2, i, ready + a1, ready + a1 + c2)]
    return tk.schedule(pieces, M, Policy(policy))


def _chain_topological(graph: DependencyGraph) -> list[int]:
    """Task ids ordered so chain predecessors come first."""
    out = [t.id for t in graph.tasks if t.semaphore is None]
    for order in graph.chains.values():
        out.extend(order)
    return out


def schedule_semi_partitioned(graph: DependencyGraph, M: int, preempt_c2: bool = False) -> Schedule:
    """Event-driven list schedule; subjobs may land on different processors.

    With ``preempt_c2`` an eligible critical section that finds no idle
    processor preempts a running second non-critical section (the one with
    the most remaining work); the preempted piece rejoins the eligible pool
    and may resume anywhere.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    tk = _Ticks(graph)
    n = tk.n
    remaining = [list(d) for d in tk.dur]
    waiting = [[0, 1 + (tk.chain_pred[i] >= 0), 1] for i in range(n)]
    eligible: list[tuple[int, int]] = []
    running: list[list[int] | None] = [None] * M  # [i, k, start, end]
    pieces: list[tuple[int, int, int, int, int]] = []
    done = 0

    def complete(i: int, k: int) -> None:
        nonlocal done
        done += 1
        if k == 1 and tk.sem[i] is not None:
            tk.chain_left[tk.sem[i]] -= tk.dur[i][1]
        succ = []
        if k < 2:
            succ.append((i, k + 1))
        if k == 1 and tk.chain_succ[i] >= 0:
            succ.append((tk.chain_succ[i], 1))
        for j, kk in succ:
            waiting[j][kk] -= 1
            if waiting[j][kk] == 0:
                release(j, kk)

    def release(i: int, k: int) -> None:
        if remaining[i][k] == 0:
            complete(i, k)
        else:
            eligible.append((i, k))

    for i in range(n):
        release(i, 0)

    t = 0
    while done < 3 * n:
        if eligible:
            eligible.sort(key=lambda v: tk.priority(*v))
            for m in range(M):
                if running[m] is None and eligible:
                    i, k = eligible.pop(0)
                    running[m] = [i, k, t, t + remaining[i][k]]
            if preempt_c2:
                for v in [v for v in eligible if v[1] == 1]:
                    victims = [m for m in range(M) if running[m][1] == 2]
                    if not victims:
                        break
                    m = max(victims, key=lambda m: (running[m][3] - t, -m))
                    vi, _, vs, ve = running[m]
                    pieces.append((vi, 2, m, vs, t))
                    remaining[vi][2] = ve - t
                    eligible.remove(v)
                    eligible.append((vi, 2))
                    running[m] = [v[0], 1, t, t + remaining[v[0]][1]]
        busy = [r[3] for r in running if r is not None]
        if not busy:
            raise RuntimeError("list scheduler stalled; is the graph acyclic?")
        t = min(busy)
        for m in range(M):
            r = running[m]
            if r is not None and r[3] == t:
                i, k, s, _ = r
                pieces.append((i, k, m, s, t))
                remaining[i][k] = 0
                running[m] = None
                complete(i, k)
    policy = Policy.SEMI_PARTITIONED_P if preempt_c2 else Policy.SEMI_PARTITIONED_NP
    return tk.schedule(pieces, M, policy)


class _TiedSim:
    """Per-processor event simulation for partitioned schedules."""

    def __init__(self, tk: _Ticks, M: int):
        self.tk = tk
        self.M = M
        n = tk.n
        self.tied: list[list[int]] = [[] for _ in range(M)]
        self.where = [-1] * n
        self.finish = [[-1, -1, -1] for _ in range(n)]  # -1: not finished
        self.started = [[False, False, False] for _ in range(n)]
        self.running: list[list[int] | None] = [None] * M
        self.pieces: list[tuple[int, int, int, int, int]] = []

    def tie(self, i: int, m: int) -> None:
        self.tied[m].append(i)
        self.where[i] = m

    def a_eligible(self, i: int) -> bool:
        p = self.tk.chain_pred[i]
        return (
            not self.started[i][1]
            and self.finish[i][0] >= 0
            and (p < 0 or self.finish[p][1] >= 0)
        )

    def best_critical(self, m: int) -> int | None:
        cands = [i for i in self.tied[m] if self.a_eligible(i)]
        return min(cands, key=lambda i: self.tk.priority(i, 1)) if cands else None

    def start(self, i: int, k: int, m: int, t: int) -> bool:
        """Start a subjob; returns True if it completed instantly (zero length)."""
        self.started[i][k] = True
        d = self.tk.dur[i][k]
        if d == 0:
            self.finished(i, k, t)
            return True
        self.running[m] = [i, k, t, t + d]
        return False

    def finished(self, i: int, k: int, t: int) -> None:
        self.finish[i][k] = t
        if k == 1 and self.tk.sem[i] is not None:
            self.tk.chain_left[self.tk.sem[i]] -= self.tk.dur[i][1]

    def advance(self) -> int:
        busy = [r[3] for r in self.running if r is not None]
        if not busy:
            raise RuntimeError("partitioned scheduler stalled")
        t = min(busy)
        for m in range(self.M):
            r = self.running[m]
            if r is not None and r[3] == t:
                i, k, s, _ = r
                self.pieces.append((i, k, m, s, t))
                self.running[m] = None
                self.finished(i, k, t)
        return t

    def run(self, t: int, pick, until) -> int:
        """Event loop: ``pick(m, t)`` starts work on idle processor ``m``."""
        while True:
            changed = True
            while changed:
                changed = False
                for m in range(self.M):
                    while self.running[m] is None:
                        instant = pick(m, t)
                        if instant is None:
                            break
                        changed = changed or instant
            if until():
                return t
            t = self.advance()

    def pad_second_sections(self) -> None:
        """Fill idle time on each processor with its second sections, preemptively."""
        tk = self.tk
        for m in range(self.M):
            busy = sorted((s, e) for i, k, mm, s, e in self.pieces if mm == m)
            for i in sorted(self.tied[m], key=lambda i: (self.finish[i][1], tk.ids[i])):
                rel = self.finish[i][1]
                rem = tk.dur[i][2]
                t = rel
                if rem == 0:
                    self.finish[i][2] = rel
                    continue
                idx = bisect.bisect_left(busy, (t, t))
                if idx > 0 and busy[idx - 1][1] > t:
                    idx -= 1
                new = []
                while rem > 0:
                    if idx < len(busy) and busy[idx][1] <= t:
                        idx += 1
                        continue
                    if idx < len(busy) and busy[idx][0] <= t:
                        t = busy[idx][1]
                        idx += 1
                        continue
                    gap_end = busy[idx][0] if idx < len(busy) else t + rem
                    run = min(rem, gap_end - t)
                    new.append((t, t + run))
                    self.pieces.append((i, 2, m, t, t + run))
                    rem -= run
                    t += run
                self.finish[i][2] = t
                for iv in new:
                    bisect.insort(busy, iv)


def schedule_partitioned_tied(graph: DependencyGraph, M: int) -> Schedule:
    """Tied list scheduling with second sections padded in as background work.

    One task is seeded per processor; afterwards an idle processor runs an
    eligible critical section of one of its tasks, else an unfinished first
    section of one of its tasks, else pulls a fresh task.  Fresh tasks are
    taken largest total work first.  With ``N <= M`` this is the dedicated
    schedule.
    """
    n = len(graph.tasks)
    if n <= M:
        return schedule_dedicated(graph, M, Policy.PARTITIONED_TIED)
    tk = _Ticks(graph)
    sim = _TiedSim(tk, M)
    pool = sorted(range(n), key=lambda i: (-sum(tk.dur[i]), tk.ids[i]))

    def pick(m: int, t: int):
        i = sim.best_critical(m)
        if i is not None:
            return sim.start(i, 1, m, t)
        fresh = [i for i in sim.tied[m] if not sim.started[i][0]]
        if fresh:
            return sim.start(fresh[0], 0, m, t)
        if pool:
            i = pool.pop(0)
            sim.tie(i, m)
            return sim.start(i, 0, m, t)
        return None

    for m in range(M):
        i = pool.pop(0)
        sim.tie(i, m)
        sim.start(i, 0, m, 0)
    sim.run(0, pick, lambda: all(f[1] >= 0 for f in sim.finish))
    sim.pad_second_sections()
    return tk.schedule(sim.pieces, M, Policy.PARTITIONED_TIED)


def schedule_partitioned_simple(
    graph: DependencyGraph, M: int, preempt_c2: bool = True, barrier: str = "global"
) -> Schedule:
    """First sections list-scheduled up front; each task stays where its first section ran.

    Phase one assigns first sections, largest task first, to the processor
    that frees up earliest (ties: least tied work, then lowest index).  With
    ``barrier="global"`` no critical section starts before every first
    section has finished; with ``"processor"`` only the processor's own
    first sections must be done.  Second sections are then padded into idle
    time (``preempt_c2``) or dispatched non-preemptively after eligible
    critical sections.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if barrier not in ("global", "processor"):
        raise ValueError(f"unknown barrier {barrier!r}")
    tk = _Ticks(graph)
    n = tk.n
    sim = _TiedSim(tk, M)
    free = [0] * M
    load = [0] * M
    queue: list[list[int]] = [[] for _ in range(M)]
    for i in sorted(range(n), key=lambda i: (-sum(tk.dur[i]), tk.ids[i])):
        m = min(range(M), key=lambda m: (free[m], load[m], m))
        sim.tie(i, m)
        queue[m].append(i)
        free[m] += tk.dur[i][0]
        load[m] += sum(tk.dur[i])
    gate = max(free) if barrier == "global" else 0

    def pick(m: int, t: int):
        if queue[m]:
            return sim.start(queue[m].pop(0), 0, m, t)
        if t < gate:
            return None
        i = sim.best_critical(m)
        if i is not None:
            return sim.start(i, 1, m, t)
        if not preempt_c2:
            ready = [
                i for i in sim.tied[m] if sim.finish[i][1] >= 0 and not sim.started[i][2]
            ]
            if ready:
                i = min(ready, key=lambda i: (sim.finish[i][1], tk.ids[i]))
                return sim.start(i, 2, m, t)
        return None

    if preempt_c2:
        sim.run(0, pick, lambda: all(f[1] >= 0 for f in sim.finish))
        sim.pad_second_sections()
        policy = Policy.PARTITIONED_SIMPLE
    else:
        sim.run(0, pick, lambda: all(f[2] >= 0 for f in sim.finish))
        policy = Policy.PARTITIONED_SIMPLE_NP
    return tk.schedule(sim.pieces, M, policy)


def schedule(graph: DependencyGraph, config: SchedulerConfig | int, policy: Policy | str | None = None) -> Schedule:
    """Run the scheduler for ``config.policy``.

    With ``M >= N`` every policy uses the dedicated schedule, whose
    makespan equals the critical path length and which is partitioned and
    non-preemptive, hence conforming to all policies.
    """
    if not isinstance(config, SchedulerConfig):
        config = SchedulerConfig(config, Policy(policy) if policy is not None else Policy.SEMI_PARTITIONED_P)
    M, policy = config.M, config.policy
    if M >= len(graph.tasks):
        return schedule_dedicated(graph, M, policy)
    if policy is Policy.SEMI_PARTITIONED_NP:
        return schedule_semi_partitioned(graph, M, preempt_c2=False)
    if policy is Policy.SEMI_PARTITIONED_P:
        return schedule_semi_partitioned(graph, M, preempt_c2=True)
    if policy is Policy.PARTITIONED_TIED:
        return schedule_partitioned_tied(graph, M)
    if policy is Policy.PARTITIONED_SIMPLE:
        return schedule_partitioned_simple(graph, M, preempt_c2=True)
    return schedule_partitioned_simple(graph, M, preempt_c2=False)
