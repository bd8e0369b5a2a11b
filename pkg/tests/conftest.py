from __future__ import annotations

import sys
from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dgasched.chain_builder import DeliveryJob
from dgasched.model import Task, TaskSet

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

times = st.builds(Fraction, st.integers(0, 40), st.sampled_from([1, 2, 4, 10]))
positive_times = st.builds(Fraction, st.integers(1, 40), st.sampled_from([1, 2, 4, 10]))


@st.composite
def tasksets(draw, max_tasks: int = 8, max_sems: int = 3, zero_critical: bool = True):
    n = draw(st.integers(1, max_tasks))
    sems = draw(st.integers(1, max_sems))
    tasks = []
    for i in range(1, n + 1):
        a1 = draw(times if zero_critical else positive_times)
        sem = f"s{draw(st.integers(1, sems))}" if a1 > 0 else None
        tasks.append(Task(i, draw(times), a1, draw(times), sem))
    return TaskSet(tuple(tasks))


@st.composite
def delivery_jobs(draw, max_jobs: int = 7):
    n = draw(st.integers(1, max_jobs))
    return [DeliveryJob(i, draw(times), draw(times), draw(times)) for i in range(1, n + 1)]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(module.status_line(number))
