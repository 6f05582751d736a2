import json
import math

import pytest

import fabolas


def test_synthetic_optimum():
    loss, cost = fabolas.synthetic_eval([-math.pi, 12.275], 1.0)
    assert loss == pytest.approx(fabolas.SYNTHETIC_OPTIMUM, abs=1e-9)
    assert cost > 0


def test_expected_improvement_closed_form():
    assert fabolas.expected_improvement(0.2, 0.0, 0.5) == pytest.approx(0.3)
    assert fabolas.expected_improvement(0.5, 1.0, 0.5) == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_hyperband_reference_brackets():
    brackets = fabolas.hyperband_brackets(81, 3)
    assert [b["n_configs"] for b in brackets] == [81, 34, 15, 8, 5]
    assert [b["initial_resource"] for b in brackets] == [1, 3, 9, 27, 81]


def test_config_errors_name_field():
    with pytest.raises(fabolas.ConfigError, match="budget.total_seconds"):
        fabolas.normalize_config(json.dumps({"budget": {"total_seconds": -1}}))


def test_run_read_report(tmp_path):
    config = {
        "strategy": "random",
        "objective": {"kind": "synthetic", "noisy": False},
        "budget": {"total_seconds": 25, "fixed_overhead_seconds": 0},
        "seeds": [1, 2],
        "output_dir": str(tmp_path),
    }
    files = fabolas.run_experiment(json.dumps(config))
    assert len(files) == 2
    record = fabolas.read_record(files[0])
    assert record["strategy"] == "random"
    assert record["seed"] == 1
    elapsed = [r["elapsed_seconds"] for r in record["rows"]]
    assert elapsed == sorted(elapsed)
    csv = fabolas.report_csv(files, grid_points=4)
    assert csv.splitlines()[0] == "strategy,time,median,q25,q75"
    assert len(csv.splitlines()) == 5


def test_surrogate_file(tmp_path):
    path = tmp_path / "svm.csv"
    fabolas.make_surrogate(str(path), seed=0)
    lines = path.read_text().splitlines()
    assert lines[0] == "x1,x2,s,repeat,loss,cost"
    assert len(lines) == 1 + 400 * 10 * 10
