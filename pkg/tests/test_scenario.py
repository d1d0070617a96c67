import json
import os

import numpy as np
import pytest

from sqplan.dmp import PoseTrajectory
from sqplan.geometry import Superquadric, expand, inside_outside
from sqplan.proximity import closest_pair, overlaps
from sqplan.scenario import (BENCHMARK_NAMES, Scenario, ScenarioError,
                             compute_metrics, generate_benchmark,
                             load_scenario, load_trajectory,
                             min_trajectory_distance, save_scenario,
                             save_trajectory, scenario_from_dict,
                             scenario_to_dict)


def minimal_dict():
    return {
        "version": 1,
        "dim": 2,
        "world": {"min": [0.0, 0.0], "max": [1.0, 1.0]},
        "robot": {"eps": [0.5], "axes": [0.02, 0.06],
                  "position": [0.0, 0.0], "rotation": [0.0]},
        "obstacles": [{"eps": [1.0], "axes": [0.1, 0.1],
                       "position": [0.5, 0.5], "rotation": [0.0]}],
        "start": {"position": [0.1, 0.1], "rotation": [0.0]},
        "goal": {"position": [0.9, 0.9], "rotation": [0.0]},
    }


def test_minimal_scenario_gets_defaults():
    scn = scenario_from_dict(minimal_dict())
    assert scn.dim == 2
    assert scn.params["dmp_basis"] == 25
    assert scn.params["bridging"] is True
    assert scn.params["h"] is None


def test_load_error_names_obstacle_index():
    data = minimal_dict()
    data["obstacles"][0]["axes"] = [0.1, -0.1]
    with pytest.raises(ScenarioError, match="obstacles\\[0\\]"):
        scenario_from_dict(data)


def test_load_error_start_inside_obstacle():
    data = minimal_dict()
    data["start"]["position"] = [0.5, 0.5]
    with pytest.raises(ScenarioError, match="start"):
        scenario_from_dict(data)


def test_load_error_start_outside_world():
    data = minimal_dict()
    data["goal"]["position"] = [1.5, 0.5]
    with pytest.raises(ScenarioError, match="goal"):
        scenario_from_dict(data)


def test_load_error_unknown_param_and_version():
    data = minimal_dict()
    data["params"] = {"bogus": 1}
    with pytest.raises(ScenarioError, match="bogus"):
        scenario_from_dict(data)
    data = minimal_dict()
    data["version"] = 99
    with pytest.raises(ScenarioError, match="version"):
        scenario_from_dict(data)


def test_scenario_roundtrip_byte_identical(tmp_path):
    scn = generate_benchmark("narrow2d")
    p1 = str(tmp_path / "a.json")
    p2 = str(tmp_path / "b.json")
    save_scenario(scn, p1)
    save_scenario(load_scenario(p1), p2)
    with open(p1, "rb") as f1, open(p2, "rb") as f2:
        assert f1.read() == f2.read()


def test_trajectory_roundtrip(tmp_path):
    rng = np.random.default_rng(13)
    traj = PoseTrajectory(np.sort(rng.uniform(0, 5, 40)),
                          rng.normal(size=(40, 3)),
                          rng.normal(size=(40, 3)))
    p1 = str(tmp_path / "t.csv")
    p2 = str(tmp_path / "t2.csv")
    save_trajectory(traj, p1)
    back = load_trajectory(p1)
    assert np.allclose(back.times, traj.times, atol=1e-12)
    assert np.allclose(back.positions, traj.positions, atol=1e-12)
    assert np.allclose(back.orientations, traj.orientations, atol=1e-12)
    save_trajectory(back, p2)
    with open(p1, "rb") as f1, open(p2, "rb") as f2:
        assert f1.read() == f2.read()


def test_benchmarks_deterministic():
    for name in BENCHMARK_NAMES:
        a = scenario_to_dict(generate_benchmark(name, seed=3))
        b = scenario_to_dict(generate_benchmark(name, seed=3))
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    a = scenario_to_dict(generate_benchmark("moderate3d", seed=1))
    b = scenario_to_dict(generate_benchmark("moderate3d", seed=2))
    assert json.dumps(a, sort_keys=True) != json.dumps(b, sort_keys=True)


def test_unknown_benchmark_errors():
    with pytest.raises(ScenarioError, match="narrow2d"):
        generate_benchmark("nope")


def test_u_block_trap_forms_one_cluster():
    scn = generate_benchmark("u_block")
    margin = float(scn.robot.axes[0])
    grown = [expand(o, margin) for o in scn.obstacles]
    for i in range(len(grown)):
        for j in range(i + 1, len(grown)):
            assert overlaps(grown[i], grown[j], closest_pair(grown[i], grown[j]))


def test_pillars3d_exactly_one_feasible_gap():
    scn = generate_benchmark("pillars3d")
    a1, a3 = float(scn.robot.axes[0]), float(scn.robot.axes[-1])
    pillars = sorted(scn.obstacles, key=lambda o: o.center[0])
    feasible = 0
    for left, right in zip(pillars, pillars[1:]):
        pair = closest_pair(left, right)
        gap = pair.distance
        if 2.0 * a1 < gap < 2.0 * a3:
            feasible += 1
        else:
            assert gap <= 2.0 * a1  # all other gaps too narrow
    assert feasible == 1


def test_arc_length_straight_line():
    traj = PoseTrajectory(np.linspace(0, 1, 50),
                          np.linspace([0, 0], [0.6, 0.8], 50),
                          np.zeros((50, 1)))
    assert np.isclose(traj.arc_length(), 1.0, atol=1e-12)


def test_min_distance_circle_robot_passing_obstacle():
    robot = Superquadric.create([1.0], [1.0, 1.0], [0.0, 0.0])
    obstacle = Superquadric.create([1.0], [1.0, 1.0], [0.0, 3.0])
    xs = np.linspace(-5.0, 5.0, 41)
    traj = PoseTrajectory(np.linspace(0, 1, 41),
                          np.stack([xs, np.zeros(41)], axis=-1),
                          np.zeros((41, 1)))
    d = min_trajectory_distance(traj, robot, [obstacle])
    assert abs(d - 1.0) <= 1e-6


def test_min_distance_zero_on_contact():
    robot = Superquadric.create([1.0], [0.5, 0.5], [0.0, 0.0])
    obstacle = Superquadric.create([1.0], [0.5, 0.5], [0.0, 0.8])
    traj = PoseTrajectory(np.array([0.0, 1.0]),
                          np.array([[0.0, 0.0], [1.0, 0.0]]),
                          np.zeros((2, 1)))
    assert min_trajectory_distance(traj, robot, [obstacle]) == 0.0


def test_metrics_report_fields():
    scn = generate_benchmark("narrow2d")
    traj = PoseTrajectory(np.linspace(0, 1, 20),
                          np.linspace(scn.start.position,
                                      scn.start.position + [0.0, 0.02], 20),
                          np.zeros((20, 1)))
    report = compute_metrics(traj, scn, {"query_s": 0.5, "precompute_s": 1.0,
                                         "success": True, "fallback": False})
    assert report.planning_time_s == 0.5
    assert report.precompute_time_s == 1.0
    assert np.isclose(report.arc_length_m, 0.02, atol=1e-12)
    assert report.min_distance_m > 0.0
    assert report.success and not report.fallback
