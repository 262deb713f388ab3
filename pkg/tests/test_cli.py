import csv
import io
import json
import pytest
from app.core.config import settings
from app.main import main

WORKED_EDGES = [(0, 1), (0, 2), (0, 3), (1, 4), (4, 5), (2, 6)]
WORKED_DESIRED_EDGES = [(0, 1), (0, 2), (0, 3), (2, 4), (4, 5), (2, 6)]

CHAIN_TOPOLOGY = {"root": 0, "edges": [[0, 1], [1, 2]]}
CHAIN_FLOWS = {"flows": [{"src": 2, "dst": 0, "mbps": 1.0}]}
CHAIN_BUDGETS = {"budgets": [{"node": 0, "hops": 0}, {"node": 1, "hops": 3}, {"node": 2, "hops": 2}]}


@pytest.fixture
def chain_files(write_json):
    return (
        write_json("topology.json", CHAIN_TOPOLOGY),
        write_json("flows.json", CHAIN_FLOWS),
        write_json("budgets.json", CHAIN_BUDGETS),
    )


def _optimize(files, out, *extra):
    topology, flows, budgets = files
    return main(["optimize", "--topology", str(topology), "--flows", str(flows),
                 "--budgets", str(budgets), "--out", str(out), *extra])


def test_optimize_chain(chain_files, tmp_path, capsys):
    out = tmp_path / "out"
    assert _optimize(chain_files, out) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["algorithm"] == "optimal"
    assert summary["traffic_initial"] == pytest.approx(2.0)
    assert summary["traffic_final"] == pytest.approx(1.0)

    final = json.loads((out / "final_topology.json").read_text())
    assert [0, 2] in final["edges"]
    plan = json.loads((out / "plan.json").read_text())
    moving = [entry for entry in plan["entries"] if entry["moving"]]
    assert [(entry["node"], entry["move_distance"]) for entry in moving] == [(2, 1)]
    assert (out / "summary.json").exists()


def test_optimized_plan_simulates_cleanly(chain_files, tmp_path, capsys):
    out = tmp_path / "out"
    assert _optimize(chain_files, out, "--algorithm", "greedy") == 0
    capsys.readouterr()
    code = main(["simulate", "--topology", str(chain_files[0]), "--plan", str(out / "plan.json"),
                 "--out", str(out)])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1
    assert "node=2 1->0" in lines[0] and "connected" in lines[0]
    trace = json.loads((out / "trace.json").read_text())
    assert trace["steps"][0]["from"] == 1
    assert trace["steps"][0]["to"] == 0


def test_empty_flows_leave_topology_alone(chain_files, write_json, tmp_path, capsys):
    files = (chain_files[0], write_json("empty.json", {"flows": []}), chain_files[2])
    assert _optimize(files, tmp_path / "out") == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["traffic_initial"] == 0.0
    assert summary["traffic_final"] == 0.0


def test_malformed_topology_reports_position(chain_files, write_json, tmp_path, caplog):
    broken = write_json("topology.json", '{\n  "root": 0,\n  "edges": [[0, 1],,]\n}\n')
    assert _optimize((broken, *chain_files[1:]), tmp_path / "out") == 1
    assert "topology.json:3:" in caplog.text


def test_wrong_shape_is_an_input_error(chain_files, write_json, tmp_path):
    shapeless = write_json("topology.json", {"edges": [[0, 1]]})
    assert _optimize((shapeless, *chain_files[1:]), tmp_path / "out") == 1


def test_non_tree_topology_is_an_invariant_error(chain_files, write_json, tmp_path):
    cyclic = write_json("topology.json", {"root": 0, "edges": [[0, 1], [2, 1]]})
    assert _optimize((cyclic, *chain_files[1:]), tmp_path / "out") == 2


def test_unknown_flow_endpoint(chain_files, write_json, tmp_path):
    flows = write_json("flows.json", {"flows": [{"src": 2, "dst": 9, "mbps": 1.0}]})
    assert _optimize((chain_files[0], flows, chain_files[2]), tmp_path / "out") == 2


def test_negative_values_are_invariant_errors(chain_files, write_json, tmp_path):
    budgets = write_json("budgets.json", {"budgets": [{"node": 2, "hops": -1}]})
    assert _optimize((*chain_files[:2], budgets), tmp_path / "out") == 2
    flows = write_json("flows.json", {"flows": [{"src": 2, "dst": 0, "mbps": -0.5}]})
    assert _optimize((chain_files[0], flows, chain_files[2]), tmp_path / "out") == 2


def test_oracle_refuses_large_instance(write_json, tmp_path):
    n = 8
    topology = write_json("star.json", {"root": 0, "edges": [[0, v] for v in range(1, n)]})
    flows = write_json("flows.json", {"flows": [
        {"src": u, "dst": v, "mbps": 1.0} for u in range(n) for v in range(n) if u != v
    ]})
    budgets = write_json("budgets.json", {"budgets": [{"node": v, "hops": 2 * n} for v in range(n)]})
    assert _optimize((topology, flows, budgets), tmp_path / "out", "--algorithm", "oracle") == 1


def test_missing_inputs(chain_files, tmp_path):
    assert main(["optimize", "--flows", str(chain_files[1]), "--budgets", str(chain_files[2]),
                 "--out", str(tmp_path)]) == 1
    missing = tmp_path / "nowhere.json"
    assert _optimize((missing, *chain_files[1:]), tmp_path / "out") == 1


def test_usage_errors_exit_with_input_status(chain_files):
    with pytest.raises(SystemExit) as caught:
        main(["optimize", "--algorithm", "fastest"])
    assert caught.value.code == 1
    with pytest.raises(SystemExit) as caught:
        main([])
    assert caught.value.code == 1


def test_unknown_log_level(chain_files, tmp_path):
    assert main(["--log-level", "CHATTY", "bench", "--sizes", "3", "--out", str(tmp_path)]) == 1


@pytest.fixture
def worked_files(write_json, monkeypatch):
    monkeypatch.setattr(settings, "LABEL_FIRST_SUFFIX", 1)
    return (
        write_json("initial.json", {"root": 0, "edges": [list(edge) for edge in WORKED_EDGES]}),
        write_json("desired.json", {"root": 0, "edges": [list(edge) for edge in WORKED_DESIRED_EDGES]}),
    )


def test_worked_example_plan_and_simulation(worked_files, write_json, tmp_path, capsys):
    initial, desired = worked_files
    budgets = write_json("budgets.json", {"budgets": [{"node": 4, "hops": 2}, {"node": 5, "hops": 4}]})
    out = tmp_path / "out"
    assert main(["plan", "--topology", str(initial), "--desired", str(desired),
                 "--budgets", str(budgets), "--out", str(out)]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record == {"moving": [4, 5], "total_move_distance": 6, "feasible": True}

    plan = json.loads((out / "plan.json").read_text())
    assert plan["label_first_suffix"] == 1
    labels = {entry["node"]: entry["desired_label"] for entry in plan["entries"] if entry["moving"]}
    assert labels == {4: "0.2.2", 5: "0.2.2.1"}

    assert main(["simulate", "--topology", str(initial), "--plan", str(out / "plan.json"),
                 "--out", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 6
    assert all(" connected" in line for line in lines)
    assert lines[0].split()[1:4] == ["node=5", "4->1", "evacuate"]
    assert lines[-1].endswith("relabel=0.2.2.1")


def test_corrupted_plan_fails_with_trace(worked_files, tmp_path, capsys):
    initial, desired = worked_files
    out = tmp_path / "out"
    assert main(["plan", "--topology", str(initial), "--desired", str(desired), "--out", str(out)]) == 0
    plan_path = out / "plan.json"
    plan = json.loads(plan_path.read_text())
    plan["entries"] = [entry if entry["node"] != 5 else {"node": 5, "moving": False} for entry in plan["entries"]]
    plan_path.write_text(json.dumps(plan))
    capsys.readouterr()

    assert main(["simulate", "--topology", str(initial), "--plan", str(plan_path), "--out", str(out)]) == 2
    assert "DISCONNECTED" in capsys.readouterr().out
    trace = json.loads((out / "trace.json").read_text())
    assert len(trace["steps"]) == 1
    assert trace["steps"][0]["connected"] is False


def test_empty_plan_simulates_to_nothing(worked_files, tmp_path, capsys):
    initial, _ = worked_files
    out = tmp_path / "out"
    assert main(["plan", "--topology", str(initial), "--desired", str(initial), "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["simulate", "--topology", str(initial), "--plan", str(out / "plan.json"), "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""


def test_plan_for_different_network(worked_files, write_json, tmp_path):
    initial, _ = worked_files
    other = write_json("other.json", {"root": 0, "edges": [[0, 1]]})
    assert main(["plan", "--topology", str(initial), "--desired", str(other), "--out", str(tmp_path)]) == 2


def _experiment(out, *extra):
    return main(["experiment", "--sizes", "3,4", "--h-max", "1,2", "--trials", "2", "--seed", "3",
                 "--out", str(out), *extra])


def test_experiment_is_deterministic(tmp_path, capsys):
    assert _experiment(tmp_path / "a") == 0
    first = capsys.readouterr().out
    assert _experiment(tmp_path / "b") == 0
    assert capsys.readouterr().out == first
    for name in ("trials.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = list(csv.DictReader(io.StringIO(first)))
    assert len(rows) == 2 * 2 * 2


def test_experiment_rejects_bad_parameters(tmp_path):
    assert main(["experiment", "--roots", "1,5", "--n", "4", "--h-max", "1", "--trials", "1",
                 "--out", str(tmp_path)]) == 1
    assert _experiment(tmp_path, "--trials", "0") == 1
    assert main(["experiment", "--roots", "1,2", "--trials", "1", "--out", str(tmp_path)]) == 1
    assert _experiment(tmp_path, "--sizes", "three") == 1


def test_experiment_high_budget_cell_succeeds(tmp_path, capsys):
    assert main(["experiment", "--sizes", "5", "--h-max", "10", "--trials", "1", "--seed", "10017",
                 "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert {row["algorithm"] for row in rows} == {"greedy", "optimal"}


def test_experiment_runs_greedy_alone_above_optimal_ceiling(tmp_path, capsys):
    assert main(["experiment", "--sizes", "7..8", "--h-max", "1", "--trials", "1", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert {(row["n"], row["algorithm"]) for row in rows} == {("7", "greedy"), ("7", "optimal"), ("8", "greedy")}


def test_multi_root_experiment(tmp_path, capsys):
    assert main(["experiment", "--roots", "1,3", "--n", "4", "--h-max", "2", "--trials", "2",
                 "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert {row["roots_considered"] for row in rows} == {"1", "3"}


def test_bench_prints_worst_case_counts(tmp_path, capsys):
    assert main(["bench", "--sizes", "3..6", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [row["greedy_evaluations"] for row in rows] == ["4", "10", "20", "35"]
    assert [row["optimal_worst_case"] for row in rows] == ["4", "36", "576", "14400"]
    assert (tmp_path / "complexity.csv").exists()
