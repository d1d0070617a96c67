"""End-to-end planning pipeline: diagram, roadmap, poses, smoothing.

Timing is split into a precompute phase (all-pairs proximity, Voronoi cells,
roadmap construction — reusable across queries in a static scene) and a query
phase (terminal projection, graph search, pose planning, DMP smoothing,
validation).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .dmp import (Demonstration, PoseTrajectory, ValidationReport,
                  demonstration_trajectory, fit_lwr, interpolate_waypoints,
                  rollout, validate_and_finalize)
from .poses import PoseWaypoint, plan_poses
from .roadmap import RoadmapGraph, build_graph, project_terminal, shortest_path
from .scenario import Scenario
from .voronoi import Diagram, build_diagram

NO_FEASIBLE_PASSAGE = "no-feasible-passage"


@dataclass
class PlanResult:
    success: bool
    reason: str | None
    diagram: Diagram
    graph: RoadmapGraph
    path: list[int] | None
    waypoints: list[PoseWaypoint] | None
    demonstration: Demonstration | None
    trajectory: PoseTrajectory | None
    validation: ValidationReport | None
    timings: dict

    @property
    def raw_trajectory(self) -> PoseTrajectory | None:
        if self.demonstration is None:
            return None
        return demonstration_trajectory(self.demonstration)


@dataclass
class Precomputed:
    diagram: Diagram
    graph: RoadmapGraph
    seconds: float


def default_bridging_distance(scenario: Scenario) -> float:
    return 0.02 * scenario.world_diagonal


def precompute(scenario: Scenario) -> Precomputed:
    """Build the Voronoi diagram and roadmap graph for a scenario."""
    t0 = time.perf_counter()
    diagram = build_diagram(scenario.robot, scenario.obstacles,
                            scenario.world_lo, scenario.world_hi)
    h = scenario.params.get("h")
    if h is None:
        h = default_bridging_distance(scenario)
    if not scenario.params.get("bridging", True):
        h = 0.0
    graph = build_graph(diagram, float(h))
    return Precomputed(diagram, graph, time.perf_counter() - t0)


def plan(scenario: Scenario, pre: Precomputed | None = None) -> PlanResult:
    """Run the full pipeline on a scenario.

    A shared Precomputed structure lets repeated queries on the same scene
    skip the diagram/graph construction; the graph is copied implicitly by
    projecting terminals onto a fresh shallow clone of the edge lists.
    """
    if pre is None:
        pre = precompute(scenario)
    diagram, graph = pre.diagram, _clone_graph(pre.graph)
    timings = {"precompute_s": pre.seconds, "success": False, "fallback": False}

    t0 = time.perf_counter()
    start_node = project_terminal(scenario.start.position, graph)
    goal_node = project_terminal(scenario.goal.position, graph)
    path = shortest_path(graph, start_node, goal_node)
    if path is None:
        timings["query_s"] = time.perf_counter() - t0
        return PlanResult(False, NO_FEASIBLE_PASSAGE, diagram, graph, None,
                          None, None, None, None, timings)

    if len(path) == 1:
        waypoints = _degenerate_waypoints(scenario, graph, path[0])
    else:
        try:
            waypoints = plan_poses(path, graph, scenario.robot)
        except ValueError:
            waypoints = _degenerate_waypoints(scenario, graph, path[0])

    n_samples = scenario.params.get("n_samples")
    if n_samples is None:
        n_samples = max(400, 100 * len(waypoints))
    demo = interpolate_waypoints(waypoints, n_samples=int(n_samples))
    model = fit_lwr(demo, p=int(scenario.params.get("dmp_basis", 25)))
    dt = scenario.params.get("dt")
    if dt is None:
        dt = demo.times[-1] / 400.0
    smoothed = rollout(model, float(dt))
    trajectory, report = validate_and_finalize(smoothed, demo, scenario.robot,
                                               scenario.obstacles)
    timings["query_s"] = time.perf_counter() - t0
    timings["success"] = True
    timings["fallback"] = report.fallback
    return PlanResult(True, None, diagram, graph, path, waypoints, demo,
                      trajectory, report, timings)


def _clone_graph(graph: RoadmapGraph) -> RoadmapGraph:
    return RoadmapGraph(graph.dim, list(graph.nodes), list(graph.node_kinds),
                        list(graph.edges),
                        {k: dict(v) for k, v in graph.adjacency.items()})


def _degenerate_waypoints(scenario: Scenario, graph: RoadmapGraph,
                          node: int) -> list[PoseWaypoint]:
    """Start and goal collapse onto one graph node: go there directly."""
    a = np.asarray(scenario.start.position, dtype=float)
    b = np.asarray(scenario.goal.position, dtype=float)
    if np.linalg.norm(b - a) < 1e-12:
        b = b + 1e-9  # zero-length demonstrations are rejected downstream
    mid = graph.nodes[node]
    pts = [a] + ([mid] if np.linalg.norm(mid - a) > 1e-12
                 and np.linalg.norm(mid - b) > 1e-12 else []) + [b]
    dim = scenario.dim
    ori = np.zeros(1) if dim == 2 else np.zeros(3)
    return [PoseWaypoint(np.asarray(p, dtype=float), ori.copy(), k)
            for k, p in enumerate(pts)]
