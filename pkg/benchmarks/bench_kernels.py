"""Compiled vs interpreted single-machine kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

Both tables come from the same source; the interpreted one is what
``DGASCHED_DISABLE_NUMBA=1`` selects.  Compilation happens (or is loaded
from cache) before timing starts.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dgasched import _kernels

WORKLOADS = [
    ("jks_order", 50),
    ("jks_order", 400),
    ("potts_order", 50),
    ("potts_order", 400),
    ("brute_force_order", 7),
    ("brute_force_order", 9),
]


def instance(n: int, rng: np.random.Generator):
    r = rng.integers(0, 20 * n, n)
    p = rng.integers(1, 40, n)
    q = rng.integers(0, 20 * n, n)
    return r, p, q


def best_of(fn, args, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if not _kernels.NUMBA_ENABLED:
        raise SystemExit("numba is disabled (DGASCHED_DISABLE_NUMBA set?); nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<20}{'n':>5}{'numba ms':>12}{'python ms':>12}{'speedup':>10}")
    for name, n in WORKLOADS:
        r, p, q = instance(n, rng)
        fast = _kernels.arrays(r, p, q)
        slow = _kernels.arrays(r, p, q, force_python=True)
        fast_order = fast[3][name](*fast[:3])  # warm-up and compile
        slow_order = slow[3][name](*slow[:3])
        assert [int(x) for x in fast_order] == [int(x) for x in slow_order]
        t_fast = best_of(fast[3][name], fast[:3], args.repeat)
        t_slow = best_of(slow[3][name], slow[:3], max(1, args.repeat // 2))
        print(f"{name:<20}{n:>5}{t_fast * 1e3:>12.3f}{t_slow * 1e3:>12.1f}{t_slow / t_fast:>9.0f}x")


if __name__ == "__main__":
    main()
