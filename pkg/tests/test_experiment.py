import csv
import io
from fractions import Fraction

import pytest

from dgasched.analysis import lower_bound_fast, validate
from dgasched.chain_builder import Sequencer, build_graph
from dgasched.experiment import (
    ALL_ALGORITHMS,
    CSV_COLUMNS,
    SweepConfig,
    default_grid,
    evaluate_point,
    parse_algorithm,
    plot_series,
    run_point,
    run_sweep,
    set_seed,
)
from dgasched.generator import GenConfig, generate_taskset
from dgasched.list_scheduler import schedule
from dgasched.model import Policy, makespan

SMALL = dict(M=(2,), z=(2,), task_sets_per_point=10, seed=5)


def test_algorithm_labels():
    assert len(ALL_ALGORITHMS) == 8
    assert parse_algorithm("POTTS-SP-P") == (Sequencer.POTTS, Policy.SEMI_PARTITIONED_P)
    assert parse_algorithm("jks-p-np") == (Sequencer.JKS, Policy.PARTITIONED_SIMPLE_NP)
    for bad in ("POTTS-SP", "BRUTE-SP-P", "POTTS-X-P"):
        with pytest.raises(ValueError):
            parse_algorithm(bad)


def test_default_grid_has_seventeen_points():
    grid = default_grid()
    assert len(grid) == 17 and grid[0] == 1 and grid[-1] == Fraction(9, 5)


def test_config_guards():
    with pytest.raises(ValueError):
        SweepConfig(multipliers=(Fraction(2),))
    with pytest.raises(ValueError):
        SweepConfig(algorithms=("NOPE",))
    with pytest.raises(ValueError):
        SweepConfig(task_sets_per_point=0)


def test_config_from_json():
    cfg = SweepConfig.from_json(
        '{"M": 4, "z": [2, 4], "beta_ranges": [["0.05", "0.5"]], "grid_step": "0.2", "algorithms": ["JKS-SP-NP"]}'
    )
    assert cfg.M == (4,) and cfg.z == (2, 4)
    assert cfg.beta_ranges == ((Fraction(1, 20), Fraction(1, 2)),)
    assert cfg.multipliers == (1, Fraction(6, 5), Fraction(7, 5), Fraction(8, 5), Fraction(9, 5))


def test_one_algorithm_one_point_gives_one_row_per_multiplier():
    cfg = SweepConfig(algorithms=("POTTS-SP-P",), **SMALL)
    rows = run_sweep(cfg).rows
    assert len(rows) == 17
    assert [r.multiplier for r in rows] == list(default_grid())
    assert all(r.n_sets == 10 for r in rows)


def test_run_point_matches_manual_protocol():
    cfg = SweepConfig(**SMALL)
    row = run_point(cfg, "JKS-P-NP", Fraction(13, 10))
    accepted = 0
    for idx in range(10):
        ts = generate_taskset(GenConfig(M=2, z=2), set_seed(5, 2, 2, cfg.beta_ranges[0], idx))
        g = build_graph(ts, Sequencer.JKS)
        s = schedule(g, 2, Policy.PARTITIONED_SIMPLE_NP)
        accepted += makespan(s) <= Fraction(13, 10) * lower_bound_fast(ts, 2) and not validate(s, ts, g)
    assert row.accepted == accepted and row.acceptance_ratio == Fraction(accepted, 10)


def test_run_point_needs_sets():
    with pytest.raises(ValueError):
        run_point(SweepConfig(**SMALL), "POTTS-SP-P", 1, n_sets=0)


def test_left_edge_rejects_and_lemma8_edge_accepts():
    cfg = SweepConfig(**SMALL)
    results = evaluate_point(cfg, 2, 2, cfg.beta_ranges[0])
    for label in ("POTTS-SP-P", "JKS-SP-NP"):
        worst = max(r.outcomes[label].lemma8 / r.lb for r in results)
        assert all(r.accepted(label, worst) for r in results)
    assert sum(r.accepted("POTTS-P-P", Fraction(1)) for r in results) <= 1


def test_curves_are_monotone_and_csv_sorted():
    result = run_sweep(SweepConfig(**SMALL))
    text = result.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    keys = [(r.algorithm, r.multiplier) for r in result.rows]
    assert keys == sorted(keys)
    by_algo = {}
    for r in result.rows:
        by_algo.setdefault(r.algorithm, []).append(r.accepted)
    for counts in by_algo.values():
        assert counts == sorted(counts)


def test_sweep_is_byte_identical_and_worker_independent():
    a = run_sweep(SweepConfig(**SMALL)).to_csv()
    b = run_sweep(SweepConfig(**SMALL)).to_csv()
    c = run_sweep(SweepConfig(workers=2, **SMALL)).to_csv()
    assert a == b == c


def test_report_and_plot_series():
    result = run_sweep(SweepConfig(algorithms=("POTTS-P-NP", "POTTS-SP-P"), multipliers=(1, Fraction(11, 10)), **SMALL))
    report = result.report()
    assert "POTTS-P-NP" in report and "Lemma-8" in report
    flagged = {e["algorithm"] for e in result.curve_exceptions()}
    assert "POTTS-P-NP" in flagged
    series = plot_series(result.to_csv())
    assert set(series) == {"POTTS-P-NP M=2 z=2 beta=0.1-0.4", "POTTS-SP-P M=2 z=2 beta=0.1-0.4"}
    assert series["POTTS-SP-P M=2 z=2 beta=0.1-0.4"]["x"] == [1.0, 1.1]
