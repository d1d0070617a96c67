"""Command-line interface: plan scenarios, run benchmark suites, emit demos.

Exit codes: 0 success; 2 scenario validation error; 3 no feasible passage;
4 internal error. Log verbosity comes from the SQPLAN_LOG environment
variable (debug/info/warning/error).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import pipeline, plots, scenario as scn_io
from .roadmap import graph_to_dict
from .scenario import (BENCHMARK_NAMES, Scenario, ScenarioError,
                       compute_metrics, generate_benchmark, load_scenario,
                       metrics_to_dict, save_scenario, save_trajectory)
from .voronoi import diagram_to_dict

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_PATH = 3
EXIT_INTERNAL = 4

SUITES = {"2d": ("narrow2d", "t_block", "u_block"),
          "3d": ("pillars3d", "moderate3d", "dense3d"),
          "all": BENCHMARK_NAMES}

log = logging.getLogger("sqplan")


def _setup_logging():
    level = os.environ.get("SQPLAN_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    if getattr(args, "h", None) is not None:
        if args.h < 0:
            raise ScenarioError("--h must be non-negative")
        scenario.params["h"] = args.h
    if getattr(args, "dmp_basis", None) is not None:
        if args.dmp_basis < 2:
            raise ScenarioError("--dmp-basis must be at least 2")
        scenario.params["dmp_basis"] = args.dmp_basis
    if getattr(args, "dt", None) is not None:
        if args.dt <= 0:
            raise ScenarioError("--dt must be positive")
        scenario.params["dt"] = args.dt
    if getattr(args, "seed", None) is not None:
        scenario.params["seed"] = args.seed
    return scenario


def _write_json(path: str, payload: dict) -> None:
    scn_io._atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _run_one(scenario: Scenario, pre=None):
    result = pipeline.plan(scenario, pre)
    metrics = None
    if result.success:
        metrics = compute_metrics(result.trajectory, scenario, result.timings)
    return result, metrics


def cmd_plan(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    os.makedirs(args.out, exist_ok=True)
    result, metrics = _run_one(scenario)
    if not result.success:
        _write_json(os.path.join(args.out, "metrics.json"),
                    {"success": False, "reason": result.reason})
        print(f"planning failed: {result.reason}", file=sys.stderr)
        return EXIT_NO_PATH
    save_trajectory(result.trajectory,
                    os.path.join(args.out, "trajectory.csv"))
    _write_json(os.path.join(args.out, "metrics.json"),
                metrics_to_dict(metrics))
    _write_json(os.path.join(args.out, "geometry.json"),
                {"diagram": diagram_to_dict(result.diagram),
                 "graph": graph_to_dict(result.graph)})
    if args.plot:
        if scenario.dim == 2:
            scn_io._atomic_write(os.path.join(args.out, "scene.svg"),
                                 plots.scene_svg_2d(scenario, result))
        else:
            scn_io._atomic_write(os.path.join(args.out, "scene.obj"),
                                 plots.scene_obj_3d(scenario, result))
            scn_io._atomic_write(os.path.join(args.out, "scene_topdown.svg"),
                                 plots.topdown_svg_3d(scenario, result))
    print(f"success: arc_length={metrics.arc_length_m:.4f} m  "
          f"min_distance={metrics.min_distance_m * 1000.0:.2f} mm  "
          f"query={metrics.planning_time_s:.3f} s  "
          f"precompute={metrics.precompute_time_s:.3f} s"
          + ("  (fell back to raw demonstration)" if metrics.fallback else ""))
    return EXIT_OK


def cmd_bench(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    names = SUITES[args.suite]
    rows = []
    results = {"suite": args.suite, "runs": args.runs, "seed": args.seed,
               "benchmarks": []}
    for name in names:
        scenario = generate_benchmark(name, args.seed)
        log.info("benchmark %s: %d obstacles", name, len(scenario.obstacles))
        entry = {"name": name, "runs": []}
        pre = None
        failures = 0
        for run in range(args.runs):
            try:
                if pre is None:
                    pre = pipeline.precompute(scenario)
                result, metrics = _run_one(scenario, pre)
            except Exception as exc:  # record and continue with the suite
                log.error("benchmark %s run %d failed: %s", name, run, exc)
                entry["runs"].append({"success": False, "error": str(exc)})
                failures += 1
                continue
            if not result.success:
                entry["runs"].append({"success": False,
                                      "reason": result.reason})
                failures += 1
                continue
            entry["runs"].append(metrics_to_dict(metrics))
        ok = [r for r in entry["runs"] if r.get("success")]
        if ok:
            mean = {
                "planning_time_s": sum(r["timing"]["planning_time_s"]
                                       for r in ok) / len(ok),
                "precompute_time_s": sum(r["timing"]["precompute_time_s"]
                                         for r in ok) / len(ok),
                "arc_length_m": sum(r["arc_length_m"] for r in ok) / len(ok),
                "min_distance_m": sum(r["min_distance_m"] for r in ok) / len(ok),
            }
            entry["mean"] = {"arc_length_m": mean["arc_length_m"],
                             "min_distance_m": mean["min_distance_m"],
                             "timing": {
                                 "planning_time_s": mean["planning_time_s"],
                                 "precompute_time_s": mean["precompute_time_s"]}}
            rows.append((name, mean["planning_time_s"], mean["arc_length_m"],
                         mean["min_distance_m"], failures))
        else:
            rows.append((name, None, None, None, failures))
        results["benchmarks"].append(entry)
    _write_json(os.path.join(args.out, "results.json"), results)

    header = f"{'scenario':<12} {'plan time (s)':>14} {'arc length (m)':>15} {'min dist (mm)':>14}"
    print(header)
    print("-" * len(header))
    for name, t, arc, dist, failures in rows:
        if t is None:
            print(f"{name:<12} {'failed':>14}")
        else:
            suffix = f"  ({failures} failed)" if failures else ""
            print(f"{name:<12} {t:>14.3f} {arc:>15.3f} "
                  f"{dist * 1000.0:>14.2f}{suffix}")
    return EXIT_OK


def cmd_demo(args) -> int:
    scenario = generate_benchmark(args.name, args.seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.name}.json")
    save_scenario(scenario, path)
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqplan",
        description="Maximum-clearance planning for superquadric robots.",
        epilog="exit codes: 0 ok, 2 validation error, 3 no feasible passage, "
               "4 internal error")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan a scenario file")
    p.add_argument("--scenario", required=True, help="scenario JSON path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--plot", action="store_true", help="write plot files")
    p.add_argument("--h", type=float, help="bridging distance override (m)")
    p.add_argument("--dmp-basis", type=int, dest="dmp_basis",
                   help="DMP basis functions per degree of freedom")
    p.add_argument("--dt", type=float, help="rollout time step (s)")
    p.add_argument("--seed", type=int, help="random seed override")
    p.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", choices=sorted(SUITES), default="all")
    b.add_argument("--runs", type=int, default=5, help="runs per scenario")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("demo", help="write a benchmark scenario file")
    d.add_argument("--name", required=True, choices=BENCHMARK_NAMES)
    d.add_argument("--out", required=True, help="output directory")
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - defensive
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
