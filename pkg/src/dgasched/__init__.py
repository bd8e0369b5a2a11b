"""Dependency-graph scheduling of frame-based tasks that share semaphores."""

from .analysis import (
    BoundsReport,
    Violation,
    ViolationKind,
    bounds_report,
    lemma8_bound,
    lower_bound_exact,
    lower_bound_fast,
    validate,
)
from .chain_builder import CapExceededError, Sequencer, build_graph, critical_path_length
from .generator import GenConfig, InfeasibleParametersError, generate_taskset
from .list_scheduler import SchedulerConfig, schedule
from .model import (
    DependencyGraph,
    Policy,
    Schedule,
    Segment,
    SubjobKind,
    Task,
    TaskSet,
    makespan,
)

__version__ = "0.1.0"

__all__ = [
    "BoundsReport",
    "CapExceededError",
    "DependencyGraph",
    "GenConfig",
    "InfeasibleParametersError",
    "Policy",
    "Schedule",
    "SchedulerConfig",
    "Segment",
    "Sequencer",
    "SubjobKind",
    "Task",
    "TaskSet",
    "Violation",
    "ViolationKind",
    "bounds_report",
    "build_graph",
    "critical_path_length",
    "generate_taskset",
    "lemma8_bound",
    "lower_bound_exact",
    "lower_bound_fast",
    "makespan",
    "schedule",
    "validate",
]
