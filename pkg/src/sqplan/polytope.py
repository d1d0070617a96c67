"""Convex polytope clipping against halfspaces, keeping edge/face provenance.

Halfspaces are kept-side oriented: a point x survives the clip when
n . x >= b. Tags identify the generating plane: non-negative integers are
hyperplane ids, negative integers encode world-box sides (-1-side_index).
"""

from __future__ import annotations

import numpy as np

GEOM_TOL = 1e-9


class EmptyIntersectionError(RuntimeError):
    pass


class ClippingError(RuntimeError):
    pass


def box_side_tag(side: int) -> int:
    return -1 - side


# ---------------------------------------------------------------- 2D polygons


def box_polygon(lo, hi):
    """Counter-clockwise rectangle with box-side edge tags."""
    x0, y0 = lo
    x1, y1 = hi
    verts = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    tags = [box_side_tag(s) for s in range(4)]
    return verts, tags


def clip_polygon(verts, tags, n, b, hp_tag, tol=GEOM_TOL):
    """Clip a convex polygon to n.x >= b.

    Returns (verts, tags, changed); verts is None when the result is empty.
    Vertices within tol of the plane are snapped onto it.
    """
    v = np.asarray(verts, dtype=float)
    s = v @ n - b
    snap = np.abs(s) <= tol
    if snap.any():
        v = v.copy()
        v[snap] -= s[snap, None] * n
        s = s.copy()
        s[snap] = 0.0
    if np.all(s >= 0.0):
        return v, list(tags), False
    if np.all(s <= 0.0):
        return None, None, True
    out_v, out_t = [], []
    m = len(v)
    for k in range(m):
        a, b_pt = v[k], v[(k + 1) % m]
        sa, sb = s[k], s[(k + 1) % m]
        ta = tags[k]
        if sa >= 0.0:
            out_v.append(a)
            out_t.append(ta)
            if sb < 0.0 and sa > 0.0:
                t = sa / (sa - sb)
                out_v.append(a + t * (b_pt - a))
                out_t.append(hp_tag)  # edge leaving along the cut
            elif sb < 0.0:
                out_t[-1] = hp_tag  # vertex already on the plane starts the cut
        elif sb > 0.0:
            t = sa / (sa - sb)
            out_v.append(a + t * (b_pt - a))
            out_t.append(ta)
    # drop duplicate consecutive vertices introduced by snapping
    keep_v, keep_t = [], []
    for k in range(len(out_v)):
        if keep_v and np.linalg.norm(out_v[k] - keep_v[-1]) <= tol:
            continue
        keep_v.append(out_v[k])
        keep_t.append(out_t[k])
    if len(keep_v) > 1 and np.linalg.norm(keep_v[0] - keep_v[-1]) <= tol:
        keep_v.pop()
        keep_t.pop()
    if len(keep_v) < 3:
        return None, None, True
    return np.array(keep_v), keep_t, True


# ------------------------------------------------------------- 3D polyhedra


def box_polyhedron(lo, hi):
    """Axis-aligned box with outward-oriented faces tagged by side.

    Sides are ordered (x-, x+, y-, y+, z-, z+).
    """
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    verts = [
        np.array([x0, y0, z0]), np.array([x1, y0, z0]),
        np.array([x1, y1, z0]), np.array([x0, y1, z0]),
        np.array([x0, y0, z1]), np.array([x1, y0, z1]),
        np.array([x1, y1, z1]), np.array([x0, y1, z1]),
    ]
    loops = [
        [0, 3, 7, 4],  # x-
        [1, 5, 6, 2],  # x+
        [0, 4, 5, 1],  # y-
        [2, 6, 7, 3],  # y+
        [0, 1, 2, 3],  # z-
        [4, 7, 6, 5],  # z+
    ]
    faces = [(loop, box_side_tag(s)) for s, loop in enumerate(loops)]
    return verts, faces


def _newell_normal(pts):
    n = np.zeros(3)
    m = len(pts)
    for i in range(m):
        a, b = pts[i], pts[(i + 1) % m]
        n += np.cross(a, b)
    return n


def clip_polyhedron(vertices, faces, n, b, hp_tag, tol=GEOM_TOL):
    """Clip a convex polyhedron to n.x >= b.

    vertices: list of 3-vectors; faces: list of (vertex-index loop, tag).
    Returns (vertices, faces, changed); vertices is None when empty.
    """
    verts = [np.asarray(v, dtype=float) for v in vertices]
    s = np.array([v @ n - b for v in verts])
    snap = np.abs(s) <= tol
    for i in np.flatnonzero(snap):
        verts[i] = verts[i] - s[i] * n
        s[i] = 0.0
    if np.all(s >= 0.0):
        return verts, [(list(loop), t) for loop, t in faces], False
    if np.all(s <= 0.0):
        return None, None, True

    cut_cache: dict[tuple[int, int], int] = {}

    def cut_point(i, j):
        key = (i, j) if i < j else (j, i)
        if key not in cut_cache:
            t = s[i] / (s[i] - s[j])
            verts.append(verts[i] + t * (verts[j] - verts[i]))
            cut_cache[key] = len(verts) - 1
        return cut_cache[key]

    on_plane = {int(i) for i in np.flatnonzero(s == 0.0)}
    new_faces = []
    boundary_pairs: list[tuple[int, int]] = []
    for loop, tag in faces:
        m = len(loop)
        out = []
        for k in range(m):
            u, v = loop[k], loop[(k + 1) % m]
            su, sv = s[u], s[v]
            if su >= 0.0:
                out.append(u)
                if sv < 0.0 < su:
                    out.append(cut_point(u, v))
            elif sv > 0.0:
                out.append(cut_point(u, v))
        dedup = [x for k, x in enumerate(out) if x != out[k - 1]] if out else []
        if len(dedup) >= 3:
            new_faces.append((dedup, tag))
            flags = [x in on_plane or x in cut_cache.values() for x in dedup]
            for k in range(len(dedup)):
                if flags[k] and flags[(k + 1) % len(dedup)]:
                    boundary_pairs.append((dedup[k], dedup[(k + 1) % len(dedup)]))

    # edges appearing once bound the cut region; shared on-plane edges do not
    count: dict[tuple[int, int], int] = {}
    for u, v in boundary_pairs:
        key = (u, v) if u < v else (v, u)
        count[key] = count.get(key, 0) + 1
    ring = [key for key, c in count.items() if c == 1]
    if ring:
        cut_loop = _chain_loop(ring)
        pts = [verts[i] for i in cut_loop]
        if _newell_normal(pts) @ n > 0.0:
            cut_loop.reverse()
        new_faces.append((cut_loop, hp_tag))
    return verts, new_faces, True


def _chain_loop(edges):
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    if any(len(nb) != 2 for nb in adj.values()):
        raise ClippingError("cut boundary does not form a simple cycle")
    start = min(adj)
    loop = [start, adj[start][0]]
    while True:
        prev, cur = loop[-2], loop[-1]
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        if nxt == start:
            break
        loop.append(nxt)
        if len(loop) > len(edges):
            raise ClippingError("cut boundary walk did not close")
    return loop


def compact_polyhedron(vertices, faces):
    """Drop vertices not referenced by any face, remapping face loops."""
    used = sorted({i for loop, _ in faces for i in loop})
    remap = {old: new for new, old in enumerate(used)}
    verts = np.array([vertices[i] for i in used])
    new_faces = [([remap[i] for i in loop], tag) for loop, tag in faces]
    return verts, new_faces


def polyhedron_edges(faces):
    """Undirected edges with the tags of their adjacent faces."""
    edges: dict[tuple[int, int], list[int]] = {}
    for loop, tag in faces:
        m = len(loop)
        for k in range(m):
            u, v = loop[k], loop[(k + 1) % m]
            key = (u, v) if u < v else (v, u)
            edges.setdefault(key, []).append(tag)
    return edges


def euler_characteristic(n_vertices, faces) -> int:
    return n_vertices - len(polyhedron_edges(faces)) + len(faces)
