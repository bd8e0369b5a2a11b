from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import tasksets
from dgasched.analysis import build_theorem5_instance, lemma8_bound, theorem5_optimal_graph, validate
from dgasched.chain_builder import Sequencer, build_graph, critical_path_length
from dgasched.list_scheduler import (
    SchedulerConfig,
    schedule,
    schedule_dedicated,
    schedule_partitioned_simple,
    schedule_partitioned_tied,
    schedule_semi_partitioned,
)
from dgasched.model import DependencyGraph, Policy, SubjobKind, build_taskset, makespan, total_work

SCHEDULERS = [
    (Policy.SEMI_PARTITIONED_NP, lambda g, M: schedule_semi_partitioned(g, M, preempt_c2=False)),
    (Policy.SEMI_PARTITIONED_P, lambda g, M: schedule_semi_partitioned(g, M, preempt_c2=True)),
    (Policy.PARTITIONED_TIED, schedule_partitioned_tied),
    (Policy.PARTITIONED_SIMPLE, lambda g, M: schedule_partitioned_simple(g, M, preempt_c2=True)),
    (Policy.PARTITIONED_SIMPLE_NP, lambda g, M: schedule_partitioned_simple(g, M, preempt_c2=False)),
    (Policy.PARTITIONED_SIMPLE, lambda g, M: schedule_partitioned_simple(g, M, barrier="processor")),
]


def test_dedicated_examples():
    g = DependencyGraph(build_taskset([(1, 1, 1)] * 4), {"s1": (1, 2, 3, 4)})
    assert makespan(schedule_dedicated(g, 4)) == 6 == critical_path_length(g)
    assert makespan(schedule_dedicated(build_graph(build_taskset([(1, 2, 3)])), 1)) == 6
    inst = build_theorem5_instance(2, 4, Fraction(1, 100))
    assert makespan(schedule_dedicated(theorem5_optimal_graph(inst), 3)) == Fraction(404, 100)
    with pytest.raises(ValueError):
        schedule_dedicated(g, 3)


def test_semi_partitioned_balances_independent_tasks():
    g = build_graph(build_taskset([(2, 0, 0)] * 4))
    for preempt in (False, True):
        assert makespan(schedule_semi_partitioned(g, 2, preempt)) == 4


@pytest.mark.parametrize("policy, run", SCHEDULERS)
def test_theorem5_graph_forces_long_partitioned_schedules(policy, run):
    inst = build_theorem5_instance(2, 4, Fraction(1, 100))
    g = theorem5_optimal_graph(inst)
    sched = run(g, 2)
    assert makespan(sched) >= Fraction(601, 100)
    assert validate(sched, inst, g, policy) == []


def test_tied_with_n_equal_m_is_dedicated():
    g = build_graph(build_taskset([(1, 1, 1), (2, 1, 0), (0, 1, 3)]))
    assert schedule(g, 3, Policy.PARTITIONED_TIED) == schedule_dedicated(g, 3)


@pytest.mark.parametrize("policy, run", SCHEDULERS)
def test_single_processor_serializes(policy, run):
    g = build_graph(build_taskset([(1, 2, 1), (0, 1, 2), (2, 1, 0)]))
    assert makespan(run(g, 1)) == total_work(g.tasks) == 10


def test_simple_balances_equal_independent_tasks():
    g = build_graph(build_taskset([(1, 0, 2)] * 6))
    for preempt in (True, False):
        assert makespan(schedule_partitioned_simple(g, 3, preempt)) == 6


def test_simple_serializes_shared_semaphore():
    ts = build_taskset([(1, 3, 1), (1, 2, 1), (0, 4, 1)])
    g = build_graph(ts)
    assert makespan(schedule_partitioned_simple(g, 2)) >= 9


@given(tasksets(max_tasks=10, max_sems=3), st.integers(1, 4))
def test_second_section_preemption_is_idle_under_critical_first(ts, M):
    # each completion frees a processor and enables at most one critical
    # section, so no critical section ever waits behind second sections
    g = build_graph(ts)
    p = schedule_semi_partitioned(g, M, preempt_c2=True)
    np_ = schedule_semi_partitioned(g, M, preempt_c2=False)
    assert p.segments == np_.segments


def test_dispatcher_accepts_config_and_strings():
    g = build_graph(build_taskset([(1, 1, 1)] * 5))
    a = schedule(g, SchedulerConfig(2, "p-tied"))
    b = schedule(g, 2, "p-tied")
    assert a == b and a.policy is Policy.PARTITIONED_TIED
    with pytest.raises(ValueError):
        SchedulerConfig(0)
    with pytest.raises(ValueError):
        schedule_partitioned_simple(g, 2, barrier="nope")


@given(tasksets(max_tasks=9, max_sems=3), st.integers(1, 4), st.sampled_from(list(Policy)), st.sampled_from(list(Sequencer)))
def test_every_policy_yields_valid_schedules(ts, M, policy, seq):
    g = build_graph(ts, seq)
    sched = schedule(g, M, policy)
    assert validate(sched, ts, g, policy) == []
    assert makespan(sched) >= critical_path_length(g)
    assert makespan(sched) >= total_work(ts) / M


@given(tasksets(max_tasks=10, max_sems=3), st.integers(1, 4), st.booleans())
def test_semi_partitioned_meets_list_bound(ts, M, preempt):
    g = build_graph(ts, Sequencer.POTTS)
    assert makespan(schedule_semi_partitioned(g, M, preempt)) <= lemma8_bound(g, M)


@given(tasksets(max_tasks=6), st.sampled_from(list(Policy)))
def test_enough_processors_reach_the_critical_path(ts, policy):
    g = build_graph(ts)
    assert makespan(schedule(g, len(ts), policy)) == critical_path_length(g)


@given(tasksets(max_tasks=8), st.integers(1, 3), st.sampled_from(list(Policy)))
def test_schedulers_are_deterministic(ts, M, policy):
    g = build_graph(ts)
    assert schedule(g, M, policy) == schedule(g, M, policy)


def test_partitioned_tasks_stay_put():
    ts = build_taskset([(1, 1, 3), (2, 1, 1), (1, 2, 2), (3, 1, 1), (1, 1, 1)])
    g = build_graph(ts)
    for policy in (Policy.PARTITIONED_TIED, Policy.PARTITIONED_SIMPLE, Policy.PARTITIONED_SIMPLE_NP):
        sched = schedule(g, 2, policy)
        procs = {}
        for s in sched.segments:
            procs.setdefault(s.task_id, set()).add(s.processor)
        assert all(len(p) == 1 for p in procs.values())
        splits = [s for s in sched.segments if s.kind is not SubjobKind.SECOND]
        assert len(splits) == sum(1 for t in ts for k in (t.c1, t.a1) if k > 0)
