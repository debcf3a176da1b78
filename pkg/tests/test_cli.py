import json
from pathlib import Path

import pytest

from ucp2d.cli import ScenarioFileError, load_scenario, main, scenario_dir

BASE = {
    "schema_version": 1,
    "tensor": {
        "a1111": "3", "a1112": "0", "a1122": "1",
        "a1212": "1", "a1222": "0", "a2222": "3",
    },
    "point": [0.0, 0.0],
    "omega": {"center": [0.0, 0.0], "halfwidths": [0.3, 0.3]},
    "grid": {"n": 25},
    "tasks": ["conditions", "reduce"],
}


def write_scenario(tmp_path, name="case.json", **overrides):
    doc = json.loads(json.dumps(BASE))
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_golden_files_all_load():
    files = sorted(scenario_dir().glob("*.json"))
    names = {f.stem for f in files}
    assert names == {
        "lame_constant", "example_4_1_a", "example_4_1_b", "example_exp",
        "example_b221_expy", "example_xy", "example_c22_xy",
        "orthotropic_convex_counterexample",
    }
    for f in files:
        sc = load_scenario(f)
        assert sc.expect, f"golden {f.stem} must carry expectations"


def test_quick_golden_run_exits_zero(tmp_path):
    golden = scenario_dir() / "orthotropic_convex_counterexample.json"
    code = main(["run", "--scenario", str(golden), "--out", str(tmp_path)])
    assert code == 0
    report = json.loads(
        (tmp_path / "orthotropic_convex_counterexample.report.json").read_text()
    )
    assert report["verdict"]["passed"]
    assert report["conditions"]["delta_min"] == 0.0
    assert report["conditions"]["convexity_margin"] > 0


def test_missing_file_exits_two(tmp_path, capsys):
    code = main(["run", "--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    path = write_scenario(tmp_path, bogus_key=1)
    assert main(["run", "--scenario", str(path), "--out", str(tmp_path)]) == 2
    assert "bogus_key" in capsys.readouterr().err


def test_wrong_schema_version_rejected(tmp_path, capsys):
    path = write_scenario(tmp_path, schema_version=7)
    assert main(["run", "--scenario", str(path), "--out", str(tmp_path)]) == 2
    assert "schema_version" in capsys.readouterr().err


def test_missing_tensor_component_rejected(tmp_path, capsys):
    doc = json.loads(json.dumps(BASE))
    del doc["tensor"]["a1222"]
    path = tmp_path / "case.json"
    path.write_text(json.dumps(doc))
    assert main(["run", "--scenario", str(path), "--out", str(tmp_path)]) == 2
    assert "a1222" in capsys.readouterr().err


def test_malformed_expression_rejected(tmp_path, capsys):
    doc = json.loads(json.dumps(BASE))
    doc["tensor"]["a1111"] = "3 +* x"
    path = tmp_path / "case.json"
    path.write_text(json.dumps(doc))
    assert main(["run", "--scenario", str(path), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "tensor" in err


def test_four_value_data_requires_second_marker(tmp_path):
    path = write_scenario(tmp_path, point_data=[0, 0, 0, 0])
    with pytest.raises(ScenarioFileError):
        load_scenario(path)
    path = write_scenario(tmp_path, point_data=[0, 0, 0, 0], point_data_second="uxy")
    with pytest.raises(ScenarioFileError):
        load_scenario(path)
    path = write_scenario(tmp_path, point_data=[0, 0, 0, 0], point_data_second="uyy")
    sc = load_scenario(path)
    assert set(sc.point_data) == {"u", "ux", "uy", "uyy"}


def test_hyperbolicity_violation_exits_two(tmp_path, capsys):
    # mu + lam = 0 puts Delta = 0 everywhere
    path = write_scenario(
        tmp_path,
        tensor={
            "a1111": "1", "a1112": "0", "a1122": "-1",
            "a1212": "1", "a1222": "0", "a2222": "1",
        },
        tasks=["conditions", "reduce", "ucp"],
        point_data=[0.0, 0.0, 0.0, 0.0, 0.0],
    )
    assert main(["run", "--scenario", str(path), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "characteristics" in err and "hyperbolicity" in err


def test_expectation_mismatch_exits_one(tmp_path, capsys):
    path = write_scenario(tmp_path, expect={"rank_at_point": 1})
    assert main(["run", "--scenario", str(path), "--out", str(tmp_path)]) == 1
    out = capsys.readouterr().out
    assert "expectation mismatch" in out


def test_check_flags_reduced_data_degeneracy(tmp_path):
    path = write_scenario(
        tmp_path,
        tensor={
            "a1111": "100", "a1112": "0", "a1122": "0",
            "a1212": "2", "a1222": "1", "a2222": "1",
        },
        point_data=[0.0, 0.0, 0.0, 0.0],
        point_data_second="uxx",
        expect={"reduced_data_degenerate": True},
    )
    assert main(["check", "--scenario", str(path), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "case.report.json").read_text())
    assert report["reduced_data_degenerate"] is True
    assert report["random_sweep"]["margins_are_lower_bounds"]


def test_riemann_subcommand_with_csv(tmp_path):
    path = write_scenario(
        tmp_path, tasks=["conditions"], grid={"n": 33},
        expect={"riemann_residual_max": 1e-10},
    )
    code = main([
        "riemann", "--scenario", str(path), "--out", str(tmp_path),
        "--format", "csv",
    ])
    assert code == 0
    report = json.loads((tmp_path / "case.report.json").read_text())
    assert report["value_at_parameter"] == 1.0
    csv_path = tmp_path / "case.riemann.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 1 + report["nodes_per_axis"] ** 2


def test_dump_writes_component_grids(tmp_path):
    path = write_scenario(tmp_path, grid={"n": 9})
    assert main(["dump", "--scenario", str(path), "--out", str(tmp_path)]) == 0
    written = sorted(p.name for p in tmp_path.glob("case.*.csv"))
    assert "case.delta.csv" in written
    assert "case.a1212.csv" in written
    lines = (tmp_path / "case.delta.csv").read_text().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 1 + 81
    # 17 significant digits survive a parse round-trip
    x, y, v = lines[1].split(",")
    assert float(v) == 4.0  # (1+1)^2 for the stored tensor


def test_run_csv_format_writes_discriminant_grid(tmp_path):
    path = write_scenario(tmp_path, grid={"n": 9})
    assert main([
        "run", "--scenario", str(path), "--out", str(tmp_path), "--format", "csv",
    ]) == 0
    lines = (tmp_path / "case.delta.csv").read_text().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 1 + 81


def test_reports_are_jobs_invariant(tmp_path):
    path = write_scenario(
        tmp_path,
        tasks=["conditions", "reduce", "characteristics", "riemann", "ucp"],
        point_data=[0.0, 0.0, 0.0, 0.0, 0.0],
        grid={"n": 25},
    )
    out1, out8 = tmp_path / "j1", tmp_path / "j8"
    assert main(["run", "--scenario", str(path), "--out", str(out1), "--jobs", "1"]) == 0
    assert main(["run", "--scenario", str(path), "--out", str(out8), "--jobs", "8"]) == 0
    b1 = (out1 / "case.report.json").read_bytes()
    b8 = (out8 / "case.report.json").read_bytes()
    assert b1 == b8


def test_seed_changes_sweep_but_not_verdict(tmp_path):
    path = write_scenario(tmp_path)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["check", "--scenario", str(path), "--out", str(out_a), "--seed", "1"]) == 0
    assert main(["check", "--scenario", str(path), "--out", str(out_b), "--seed", "2"]) == 0
    ra = json.loads((out_a / "case.report.json").read_text())
    rb = json.loads((out_b / "case.report.json").read_text())
    assert ra["random_sweep"]["seed"] == 1
    assert rb["random_sweep"]["seed"] == 2
    assert ra["verdict"] == rb["verdict"]
