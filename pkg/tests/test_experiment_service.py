import math
import pytest
from app.core.exceptions import InvalidParameterError
from app.schemas.optimizer import Algorithm
from app.services.experiment_service import (
    complexity_probe, generate_instance, greedy_worst_case, make_spec, optimal_worst_case,
    run_multi_root, run_sweep, summarize
)
from app.services.io_service import write_summary_csv, write_trials_csv
from app.services.optimizer_service import optimize_bnb

BOTH = [Algorithm.GREEDY, Algorithm.OPTIMAL]


def test_instance_flows_sum_to_total():
    _, flows, _ = generate_instance(make_spec(6, 3, 11))
    assert flows.total() == pytest.approx(1.0)
    assert len(flows) == 6 * 5
    _, scaled, _ = generate_instance(make_spec(6, 3, 11, total_flow=4.0))
    assert scaled.total() == pytest.approx(4.0)


def test_instance_is_deterministic_per_seed():
    first = generate_instance(make_spec(7, 4, 99))
    second = generate_instance(make_spec(7, 4, 99))
    assert first == second


def test_budgets_are_nested_across_h_max():
    low_tree, low_flows, low = generate_instance(make_spec(7, 1, 5))
    high_tree, high_flows, high = generate_instance(make_spec(7, 10, 5))
    assert low_tree == high_tree
    assert low_flows == high_flows
    assert all(low.hops(node) <= high.hops(node) <= 10 for node in range(7))
    assert all(low.hops(node) <= 1 for node in range(7))


def test_zero_hop_budget_keeps_initial_topology():
    initial, flows, budgets = generate_instance(make_spec(6, 0, 3))
    result = optimize_bnb(initial, flows, budgets)
    assert result.plan.is_empty()
    assert result.traffic == result.traffic_initial


def test_make_spec_rejects_tiny_networks():
    with pytest.raises(InvalidParameterError):
        make_spec(2, 1, 0)
    with pytest.raises(InvalidParameterError):
        make_spec(5, -1, 0)


def test_sweep_shape():
    rows = run_sweep([3, 4], [1, 3], 3, BOTH, seed=7)
    assert len(rows) == 2 * 2 * 3 * 2
    summaries = summarize(rows)
    assert len(summaries) == 8
    assert all(cell.trials == 3 for cell in summaries)
    # greedy rows come first whatever order algorithms are given in
    assert [row.algorithm for row in rows[:2]] == ["greedy", "optimal"]


def test_sweep_keeps_traffic_ordering():
    rows = run_sweep([4, 5], [2], 4, [Algorithm.OPTIMAL, Algorithm.GREEDY], seed=1)
    by_trial = {}
    for row in rows:
        by_trial.setdefault((row.spec.n, row.spec.seed), {})[row.algorithm] = row
    for pair in by_trial.values():
        assert pair["optimal"].traffic_final <= pair["greedy"].traffic_final + 1e-9
        assert pair["greedy"].traffic_final <= pair["greedy"].traffic_initial + 1e-9


def test_sweep_skips_optimal_above_ceiling():
    rows = run_sweep([3, 4], [2], 2, BOTH, optimal_max_n=3)
    assert {(row.spec.n, row.algorithm) for row in rows} == {(3, "greedy"), (3, "optimal"), (4, "greedy")}


def test_sweep_rejects_bad_counts():
    with pytest.raises(InvalidParameterError):
        run_sweep([3], [1], 0, BOTH)
    with pytest.raises(InvalidParameterError):
        run_sweep([], [1], 1, BOTH)
    with pytest.raises(InvalidParameterError):
        run_sweep([3], [1], 1, [])


def test_sweep_keeps_optimal_below_greedy_at_high_budget():
    rows = run_sweep([5], [10], 1, BOTH, seed=10017)
    traffic = {row.algorithm: row.traffic_final for row in rows}
    assert traffic["optimal"] <= traffic["greedy"] + 1e-9


def test_multi_root_rejects_too_many_roots():
    with pytest.raises(InvalidParameterError):
        run_multi_root(4, 2, [1, 5], 2, BOTH)
    with pytest.raises(InvalidParameterError):
        run_multi_root(4, 2, [0], 2, BOTH)


def test_multi_root_minimum_never_grows():
    rows = run_multi_root(5, 3, [1, 3, 5], 4, BOTH, seed=2)
    assert len(rows) == 4 * 3 * 2
    curves = {}
    for row in rows:
        curves.setdefault((row.spec.seed, row.algorithm), []).append((row.roots_considered, row.traffic_final))
    for curve in curves.values():
        values = [traffic for _, traffic in sorted(curve)]
        assert all(a >= b for a, b in zip(values, values[1:]))


def test_worst_case_formulas():
    assert [greedy_worst_case(n) for n in range(3, 9)] == [4, 10, 20, 35, 56, 84]
    assert [optimal_worst_case(n) for n in range(3, 7)] == [4, 36, 576, 14400]


def test_complexity_probe_hits_worst_case_counts():
    rows = complexity_probe([3, 4, 5, 6], optimal_max_n=6, oracle_max_n=6)
    assert [row.greedy_evaluations for row in rows] == [4, 10, 20, 35]
    for row in rows:
        assert row.greedy_evaluations == row.greedy_worst_case
        assert row.oracle_leaves == math.factorial(row.n - 1) ** 2
        assert row.bnb_leaves <= row.optimal_worst_case


def test_complexity_probe_skips_searches_above_ceilings():
    rows = complexity_probe([7, 8], optimal_max_n=0, oracle_max_n=0)
    assert [row.greedy_evaluations for row in rows] == [56, 84]
    assert all(row.bnb_leaves is None and row.oracle_leaves is None for row in rows)
    with pytest.raises(InvalidParameterError):
        complexity_probe([2])


def test_csv_output_is_reproducible(tmp_path):
    first = run_sweep([3, 4], [1, 3], 2, BOTH, seed=4)
    second = run_sweep([3, 4], [1, 3], 2, BOTH, seed=4)
    write_trials_csv(tmp_path / "a.csv", first)
    write_trials_csv(tmp_path / "b.csv", second)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    write_summary_csv(tmp_path / "a_summary.csv", summarize(first))
    write_summary_csv(tmp_path / "b_summary.csv", summarize(second))
    assert (tmp_path / "a_summary.csv").read_bytes() == (tmp_path / "b_summary.csv").read_bytes()


def test_timing_column_is_empty_by_default(tmp_path):
    rows = run_sweep([3], [1], 1, [Algorithm.GREEDY])
    path = write_trials_csv(tmp_path / "trials.csv", rows)
    lines = path.read_text().splitlines()
    assert lines[1].endswith(",")
    timed = write_trials_csv(tmp_path / "timed.csv", rows, timings=True)
    assert not timed.read_text().splitlines()[1].endswith(",")


@pytest.mark.slow
def test_larger_budgets_lower_mean_traffic():
    rows = run_sweep([7], [1, 10], 50, BOTH, seed=0)
    cells = {(cell.h_max, cell.algorithm): cell for cell in summarize(rows)}
    for algorithm in ("greedy", "optimal"):
        tight = cells[(1, algorithm)]
        loose = cells[(10, algorithm)]
        assert loose.mean_traffic_final < tight.mean_traffic_final <= tight.mean_traffic_initial
    assert cells[(10, "optimal")].mean_traffic_final <= cells[(10, "greedy")].mean_traffic_final


@pytest.mark.slow
@pytest.mark.parametrize("h_max", [1, 3, 10])
def test_more_roots_lower_mean_traffic(h_max):
    trials = 50
    rows = run_multi_root(5, h_max, [1, 2, 3, 4, 5], trials, BOTH, seed=0)
    cells = {(cell.roots_considered, cell.algorithm): cell for cell in summarize(rows)}
    for algorithm in ("greedy", "optimal"):
        curve = [cells[(k, algorithm)] for k in range(1, 6)]
        for fewer, more in zip(curve, curve[1:]):
            pooled = math.sqrt((fewer.std_traffic_final ** 2 + more.std_traffic_final ** 2) / (2 * trials))
            assert more.mean_traffic_final <= fewer.mean_traffic_final + pooled


@pytest.mark.slow
def test_default_sweep_reproduces_budget_curve():
    rows = run_sweep([3, 4, 5, 6, 7], [1, 3, 10], 50, BOTH, seed=0)
    cells = {(cell.n, cell.h_max, cell.algorithm): cell for cell in summarize(rows)}
    assert sum(1 for key in cells if key[2] == "greedy") == 15
    assert sum(1 for key in cells if key[2] == "optimal") == 15
    assert cells[(7, 1, "optimal")].mean_traffic_final == pytest.approx(2.0, abs=0.3)
    assert cells[(7, 10, "optimal")].mean_traffic_final == pytest.approx(1.6, abs=0.3)
