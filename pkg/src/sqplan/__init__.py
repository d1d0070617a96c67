"""Maximum-clearance motion planning for superquadric robots.

Obstacles are expanded by the robot's minor semi-axis, grouped into clusters,
and separated by maximum-margin hyperplanes whose intersection cells form a
generalized Voronoi diagram. Paths run along the diagram's edge skeleton,
poses align the robot with travel direction and passage normals, and dynamic
movement primitives smooth the result.
"""

from .geometry import RigidPose, Superquadric, expand, inside_outside
from .pipeline import PlanResult, plan, precompute
from .scenario import (Scenario, generate_benchmark, load_scenario,
                       compute_metrics, save_trajectory)

__all__ = [
    "RigidPose", "Superquadric", "expand", "inside_outside",
    "PlanResult", "plan", "precompute",
    "Scenario", "generate_benchmark", "load_scenario",
    "compute_metrics", "save_trajectory",
]

__version__ = "0.1.0"
