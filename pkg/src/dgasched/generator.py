"""Synthetic frame-based task sets.

Task totals come from Stafford's RandomFixedSum (uniform over the part of
the simplex inside the box), then every quantity is quantized to
multiples of ``1 / QUANTUM`` so the core stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import Task, TaskSet

QUANTUM = 10**6


class InfeasibleParametersError(ValueError):
    """Generation parameters admit no solution."""


def randfixedsum(n: int, total: float, lo: float, hi: float, rng: np.random.Generator) -> np.ndarray:
    """``n`` floats in ``[lo, hi]`` summing to ``total``, uniform on that polytope.

    Port of Roger Stafford's MATLAB ``randfixedsum`` for a single vector.
    """
    if n < 1:
        raise InfeasibleParametersError("n must be >= 1")
    if not (n * lo <= total <= n * hi) or hi < lo:
        raise InfeasibleParametersError(f"no {n} values in [{lo}, {hi}] sum to {total}")
    if n == 1 or hi == lo:
        return np.full(n, total / n)
    s = (total - n * lo) / (hi - lo)
    k = max(min(math.floor(s), n - 1), 0)
    s = max(min(s, k + 1), k)
    s1 = s - np.arange(k, k - n, -1, dtype=float)
    s2 = np.arange(k + n, k, -1, dtype=float) - s
    huge = np.finfo(float).max
    tiny = np.finfo(float).tiny
    w = np.zeros((n, n + 1))
    w[0, 1] = huge
    t = np.zeros((n - 1, n))
    for i in range(2, n + 1):
        tmp1 = w[i - 2, 1 : i + 1] * s1[:i] / i
        tmp2 = w[i - 2, :i] * s2[n - i : n] / i
        w[i - 1, 1 : i + 1] = tmp1 + tmp2
        tmp3 = w[i - 1, 1 : i + 1] + tiny
        tmp4 = s2[n - i : n] > s1[:i]
        t[i - 2, :i] = (tmp2 / tmp3) * tmp4 + (1 - tmp1 / tmp3) * (~tmp4)
    x = np.zeros(n)
    rt = rng.uniform(size=n - 1)
    rs = rng.uniform(size=n - 1)
    j = k + 1
    sm = 0.0
    pr = 1.0
    for i in range(n - 1, 0, -1):
        e = rt[n - i - 1] <= t[i - 1, j - 1]
        sx = rs[n - i - 1] ** (1.0 / i)
        sm += (1.0 - sx) * pr * s / (i + 1)
        pr *= sx
        x[n - i - 1] = sm + pr * e
        s -= e
        j -= e
    x[n - 1] = sm + pr * s
    x = x[rng.permutation(n)]
    return (hi - lo) * x + lo


def _quantize(values: np.ndarray, total_units: int) -> list[int]:
    """Integer units summing to ``total_units``, largest remainders rounded up."""
    scaled = values * QUANTUM
    units = np.floor(scaled).astype(np.int64)
    short = total_units - int(units.sum())
    if short < 0 or short > len(units):
        raise ArithmeticError("quantization drifted; inputs do not sum to the total")
    for idx in np.argsort(-(scaled - units), kind="stable")[:short]:
        units[idx] += 1
    return [int(u) for u in units]


def random_fixed_sum(n: int, total, cap, seed: int | np.random.Generator) -> list[Fraction]:
    """``n`` positive rationals in ``(0, cap]`` summing exactly to ``total``.

    ``total`` and ``cap`` must be multiples of ``1 / QUANTUM``.
    """
    total, cap = Fraction(total), Fraction(cap)
    if n < 1 or total <= 0 or cap <= 0 or n * cap < total:
        raise InfeasibleParametersError(f"cannot split {total} into {n} parts of at most {cap}")
    total_units, cap_units = total * QUANTUM, cap * QUANTUM
    if total_units.denominator != 1 or cap_units.denominator != 1:
        raise InfeasibleParametersError(f"total and cap must be multiples of 1/{QUANTUM}")
    if total_units < n:
        raise InfeasibleParametersError("total too small for positive quantized parts")
    rng = np.random.default_rng(seed)
    raw = randfixedsum(n, float(total), 0.0, float(cap), rng)
    raw = np.clip(raw, 0.0, float(cap))
    raw *= float(total) / raw.sum()
    units = _quantize(raw, int(total_units))
    # rounding may still leave an empty part or a hair over the cap; move single units
    cap_units = int(cap_units)
    for idx in range(n):
        while units[idx] > cap_units:
            units[idx] -= 1
            units[int(np.argmin(units))] += 1
    for idx in range(n):
        while units[idx] == 0:
            donor = int(np.argmax(units))
            units[donor] -= 1
            units[idx] += 1
    return [Fraction(u, QUANTUM) for u in units]


@dataclass(frozen=True)
class GenConfig:
    M: int
    z: int
    beta_range: tuple[Fraction, Fraction] = (Fraction(1, 10), Fraction(2, 5))
    n_tasks: int | None = None
    per_task_cap: Fraction = Fraction(1, 2)
    seed: int = 0

    def __post_init__(self):
        lo, hi = (Fraction(b) for b in self.beta_range)
        object.__setattr__(self, "beta_range", (lo, hi))
        object.__setattr__(self, "per_task_cap", Fraction(self.per_task_cap))
        if self.n_tasks is None:
            object.__setattr__(self, "n_tasks", 10 * self.M)
        if self.M < 1 or self.z < 1 or self.n_tasks < 1:
            raise InfeasibleParametersError("M, z and n_tasks must be positive")
        if not 0 <= lo <= hi <= 1:
            raise InfeasibleParametersError(f"beta range {lo}..{hi} outside [0, 1]")
        if self.per_task_cap * self.n_tasks < self.M:
            raise InfeasibleParametersError("per_task_cap * n_tasks must reach M")
        if self.z > self.n_tasks:
            raise InfeasibleParametersError("more semaphores than tasks")
        for b in (lo, hi):
            if (b * QUANTUM).denominator != 1:
                raise InfeasibleParametersError(f"beta bounds must be multiples of 1/{QUANTUM}")


def generate_taskset(config: GenConfig, seed: int | np.random.Generator | None = None) -> TaskSet:
    """Task set with total work exactly ``M`` and per-task totals at most the cap.

    Per task: critical share ``beta`` uniform on ``beta_range``; the rest is
    split with ``c1`` uniform on ``[0, rest]``.  Semaphores are dealt one
    per semaphore first (random tasks), the remainder uniformly at random.
    """
    rng = np.random.default_rng(config.seed if seed is None else seed)
    n = config.n_tasks
    totals = random_fixed_sum(n, config.M, config.per_task_cap, rng)
    lo, hi = (int(b * QUANTUM) for b in config.beta_range)
    sems = np.empty(n, np.int64)
    first = rng.permutation(n)[: config.z]
    sems[:] = rng.integers(0, config.z, size=n)
    sems[first] = np.arange(config.z)
    tasks = []
    for i, u in enumerate(totals):
        u_units = int(u * QUANTUM)
        beta = Fraction(int(rng.integers(lo, hi + 1)), QUANTUM)
        a_units = min(u_units, round(beta * u_units))
        rest = u_units - a_units
        c1_units = int(rng.integers(0, rest + 1))
        tasks.append(
            Task(
                i + 1,
                Fraction(c1_units, QUANTUM),
                Fraction(a_units, QUANTUM),
                Fraction(rest - c1_units, QUANTUM),
                f"s{sems[i] + 1}",
            )
        )
    return TaskSet(tuple(tasks))
