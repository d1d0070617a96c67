"""Minimum-distance queries between superquadrics.

Distances are found by minimizing the squared distance between surface
parametrizations with a multi-start adaptive gradient descent; gradients
come from central finite differences in angle space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Superquadric, inside_outside, surface_point, surface_samples

FD_STEP = 1e-6
GRAD_TOL = 1e-9
STEP_TOL = 1e-10
MAX_ITER = 200
OVERLAP_TOL = 1e-6  # slack on the implicit function when testing containment

N_SEEDS_2D = 8  # omega seeds per shape
N_SEEDS_3D = 4  # per-angle seeds per shape (4x4 grid)


@dataclass
class ClosestPair:
    """Closest surface points between two shapes and their distance."""

    p_i: np.ndarray
    p_j: np.ndarray
    distance: float
    converged: bool


def _n_params(sq: Superquadric) -> int:
    return 1 if sq.dim == 2 else 2


def _points_from_params(sq: Superquadric, params: np.ndarray) -> np.ndarray:
    """params: (S,) in 2D or (S, 2) in 3D -> world points (S, dim)."""
    if sq.dim == 2:
        return surface_point(sq, params[..., 0] if params.ndim > 1 else params)
    return surface_point(sq, params)


def _seeds(sq: Superquadric) -> np.ndarray:
    """Uniform angular seed grid, (S, n_params)."""
    if sq.dim == 2:
        om = np.linspace(-np.pi, np.pi, N_SEEDS_2D, endpoint=False)
        return om[:, None]
    eta = np.linspace(-np.pi / 2.0, np.pi / 2.0, N_SEEDS_3D + 2)[1:-1]
    om = np.linspace(-np.pi, np.pi, N_SEEDS_3D, endpoint=False)
    ee, oo = np.meshgrid(eta, om, indexing="ij")
    return np.stack([ee.ravel(), oo.ravel()], axis=-1)


def _descend(f, x0: np.ndarray):
    """Minimize f over a batch of starts; f maps (S, P) -> (S,).

    Adaptive-step gradient descent with backtracking; returns (x, fx, converged).
    """
    x = x0.copy()
    fx = f(x)
    s, p = x.shape
    alpha = np.full(s, 0.1)
    done = np.zeros(s, dtype=bool)
    for _ in range(MAX_ITER):
        act = ~done
        if not act.any():
            break
        xa = x[act]
        g = np.empty_like(xa)
        for k in range(p):
            dx = np.zeros(p)
            dx[k] = FD_STEP
            g[:, k] = (f(xa + dx) - f(xa - dx)) / (2.0 * FD_STEP)
        gn = np.linalg.norm(g, axis=1)
        aa, fa = alpha[act], fx[act]
        accepted = np.zeros(len(xa), dtype=bool)
        for _ in range(40):
            trial = ~accepted & (aa * gn >= STEP_TOL) & (gn >= GRAD_TOL)
            if not trial.any():
                break
            cand = xa - aa[:, None] * g
            fc = f(cand)
            ok = trial & (fc < fa - 1e-4 * aa * gn**2)
            xa[ok] = cand[ok]
            fa[ok] = fc[ok]
            accepted |= ok
            aa[trial & ~ok] *= 0.5
        aa[accepted] *= 1.3
        x[act], fx[act], alpha[act] = xa, fa, aa
        sub_done = (gn < GRAD_TOL) | (aa * gn < STEP_TOL)
        idx = np.flatnonzero(act)
        done[idx[sub_done]] = True
    return x, fx, done


def closest_pair(sq_i: Superquadric, sq_j: Superquadric,
                 starts: np.ndarray | None = None) -> ClosestPair:
    """Closest points between two superquadric surfaces (multi-start).

    `starts` optionally replaces the default seed grid with explicit rows of
    concatenated angle parameters [params_i, params_j], e.g. taken from a
    coarse sampling stage that already localized the minimum.
    """
    if sq_i.dim != sq_j.dim:
        raise ValueError("shapes must have the same dimension")
    pi, pj = _n_params(sq_i), _n_params(sq_j)
    if starts is None:
        si, sj = _seeds(sq_i), _seeds(sq_j)
        ii, jj = np.meshgrid(np.arange(len(si)), np.arange(len(sj)), indexing="ij")
        x0 = np.concatenate([si[ii.ravel()], sj[jj.ravel()]], axis=1)
    else:
        x0 = np.asarray(starts, dtype=float).reshape(-1, pi + pj)

    def objective(x):
        a = _points_from_params(sq_i, x[:, :pi])
        b = _points_from_params(sq_j, x[:, pi:pi + pj])
        return np.sum((a - b) ** 2, axis=1)

    x, fx, done = _descend(objective, x0)
    best = int(np.argmin(fx))
    p_i = _points_from_params(sq_i, x[best:best + 1, :pi])[0]
    p_j = _points_from_params(sq_j, x[best:best + 1, pi:pi + pj])[0]
    d = float(np.linalg.norm(p_i - p_j))
    return ClosestPair(p_i, p_j, d, bool(done[best]))


def overlaps(sq_i: Superquadric, sq_j: Superquadric, pair: ClosestPair) -> bool:
    """True when the shapes touch or interpenetrate.

    Containment is tested in both directions so a small shape swallowed by a
    large one still registers as an overlap. The witness test alone can miss
    genuine interpenetration when the closest-pair descent settles in a
    nonzero local minimum (flat faces of boxy shapes), so dense surface
    samples and the centers are checked as well.
    """
    if (inside_outside(sq_i, pair.p_j) <= OVERLAP_TOL
            or inside_outside(sq_j, pair.p_i) <= OVERLAP_TOL):
        return True
    if pair_lower_bound(sq_i, sq_j) > 0.0:
        return False
    n = 64 if sq_i.dim == 2 else 16
    return bool(
        inside_outside(sq_i, sq_j.center) <= OVERLAP_TOL
        or inside_outside(sq_j, sq_i.center) <= OVERLAP_TOL
        or np.any(inside_outside(sq_i, surface_samples(sq_j, n)) <= OVERLAP_TOL)
        or np.any(inside_outside(sq_j, surface_samples(sq_i, n)) <= OVERLAP_TOL)
    )


def point_distance(point, sq: Superquadric):
    """Closest surface point to a world point and the distance to it.

    Points inside the shape report distance 0 together with the nearest
    boundary point.
    """
    q = np.asarray(point, dtype=float)
    x0 = _seeds(sq)

    def objective(x):
        pts = _points_from_params(sq, x)
        return np.sum((pts - q) ** 2, axis=1)

    x, fx, _ = _descend(objective, x0)
    best = int(np.argmin(fx))
    surf = _points_from_params(sq, x[best:best + 1])[0]
    d = float(np.sqrt(fx[best]))
    if inside_outside(sq, q) < 0.0:
        d = 0.0
    return surf, d


def pair_lower_bound(sq_i: Superquadric, sq_j: Superquadric) -> float:
    """Cheap lower bound on surface distance from bounding spheres."""
    c = float(np.linalg.norm(sq_i.center - sq_j.center))
    return c - sq_i.bounding_radius() - sq_j.bounding_radius()


def batch_closest_pairs(shapes: list[Superquadric], prune_above: float | None = None):
    """Closest pairs over all index pairs, as {(i, j): ClosestPair} with i < j.

    When prune_above is set, pairs whose bounding-sphere lower bound exceeds
    it are skipped. The result is independent of evaluation order.
    """
    out = {}
    n = len(shapes)
    for i in range(n):
        for j in range(i + 1, n):
            if prune_above is not None and pair_lower_bound(shapes[i], shapes[j]) > prune_above:
                continue
            out[(i, j)] = closest_pair(shapes[i], shapes[j])
    return out
