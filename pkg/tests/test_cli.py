import json
import os

import numpy as np
import pytest

from sqplan.cli import (EXIT_NO_PATH, EXIT_OK, EXIT_VALIDATION, main)
from sqplan.scenario import load_scenario


def test_demo_then_plan(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["demo", "--name", "narrow2d", "--out", out]) == EXIT_OK
    scenario_path = os.path.join(out, "narrow2d.json")
    assert os.path.exists(scenario_path)
    load_scenario(scenario_path)  # validates

    run = os.path.join(out, "run")
    code = main(["plan", "--scenario", scenario_path, "--out", run, "--plot"])
    assert code == EXIT_OK
    for name in ("trajectory.csv", "metrics.json", "geometry.json",
                 "scene.svg"):
        assert os.path.exists(os.path.join(run, name)), name
    with open(os.path.join(run, "metrics.json")) as f:
        metrics = json.load(f)
    assert metrics["success"] is True
    assert metrics["min_distance_m"] > 0.01
    out_text = capsys.readouterr().out
    assert "success" in out_text


def test_plan_3d_writes_obj(tmp_path):
    out = str(tmp_path)
    main(["demo", "--name", "pillars3d", "--out", out])
    run = os.path.join(out, "run")
    code = main(["plan", "--scenario", os.path.join(out, "pillars3d.json"),
                 "--out", run, "--plot"])
    assert code == EXIT_OK
    assert os.path.exists(os.path.join(run, "scene.obj"))
    assert os.path.exists(os.path.join(run, "scene_topdown.svg"))


def test_plan_invalid_scenario_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "version": 1, "dim": 2,
        "world": {"min": [0, 0], "max": [1, 1]},
        "robot": {"eps": [0.5], "axes": [0.02, 0.06],
                  "position": [0, 0], "rotation": [0]},
        "obstacles": [{"eps": [1.0], "axes": [0.1, -0.1],
                       "position": [0.5, 0.5], "rotation": [0]}],
        "start": {"position": [0.1, 0.1], "rotation": [0]},
        "goal": {"position": [0.9, 0.9], "rotation": [0]},
    }))
    code = main(["plan", "--scenario", str(bad), "--out", str(tmp_path / "o")])
    assert code == EXIT_VALIDATION
    assert "obstacles[0]" in capsys.readouterr().err


def test_plan_blocked_scenario_exits_3(tmp_path):
    blocked = tmp_path / "blocked.json"
    # a wall sealing the world between start and goal
    blocked.write_text(json.dumps({
        "version": 1, "dim": 2,
        "world": {"min": [0, 0], "max": [0.5, 0.5]},
        "robot": {"eps": [0.5], "axes": [0.02, 0.06],
                  "position": [0, 0], "rotation": [0]},
        "obstacles": [
            {"eps": [0.2], "axes": [0.13, 0.02],
             "position": [0.125, 0.25], "rotation": [0]},
            {"eps": [0.2], "axes": [0.13, 0.02],
             "position": [0.375, 0.25], "rotation": [0]},
        ],
        "start": {"position": [0.25, 0.1], "rotation": [0]},
        "goal": {"position": [0.25, 0.4], "rotation": [0]},
    }))
    out = str(tmp_path / "o")
    code = main(["plan", "--scenario", str(blocked), "--out", out])
    assert code == EXIT_NO_PATH
    with open(os.path.join(out, "metrics.json")) as f:
        metrics = json.load(f)
    assert metrics["success"] is False
    assert metrics["reason"] == "no-feasible-passage"


def test_bench_2d_table_and_results(tmp_path, capsys):
    out = str(tmp_path)
    code = main(["bench", "--suite", "2d", "--runs", "1", "--out", out])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    for name in ("narrow2d", "t_block", "u_block"):
        assert name in text
    with open(os.path.join(out, "results.json")) as f:
        results = json.load(f)
    assert results["suite"] == "2d"
    assert len(results["benchmarks"]) == 3
    for entry in results["benchmarks"]:
        assert len(entry["runs"]) == 1
        assert entry["runs"][0]["success"] is True
        run, mean = entry["runs"][0], entry["mean"]
        assert np.isclose(run["arc_length_m"], mean["arc_length_m"])
        assert np.isclose(run["min_distance_m"], mean["min_distance_m"])


def test_unknown_demo_name_rejected(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["demo", "--name", "nope", "--out", str(tmp_path)])
    assert exc.value.code != 0
    assert "narrow2d" in capsys.readouterr().err  # lists valid names
