"""Geodesic tubes around great arcs, meshed ring by ring.

Every cross-section ring of a tube is a small circle of S^3, so its image
under projection is an exact round circle; the mesh vertices are placed on
those circles rather than approximating a Euclidean tube.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import AtPole, PoleCollision
from .meshkit import TriMesh, signed_volumes
from .polytope4 import GreatArc, design_scale_range
from .s3geom import CANONICAL, CircleS3, ProjectionFrame, circumcircle, project_circle

CHORD_TOL = 0.002
POLE_CLEARANCE = 1e-6
MAX_SEGMENTS = 512


class CapStyle(str, enum.Enum):
    SPHERICAL_CAP = "SphericalCap"
    FLAT_DISK = "FlatDisk"


@dataclass(frozen=True)
class TubeSpec:
    radius_s3: float
    segments_along: int = 2
    segments_around: int = 24
    cap_style: CapStyle = CapStyle.SPHERICAL_CAP

    def __post_init__(self):
        object.__setattr__(self, "cap_style", CapStyle(self.cap_style))
        if not 0.0 < self.radius_s3 < math.pi / 4.0:
            raise ValueError("radius_s3 must lie in (0, pi/4)")
        if self.segments_along < 2:
            raise ValueError("segments_along must be >= 2")
        if self.segments_around < 3:
            raise ValueError("segments_around must be >= 3")


def max_workers() -> int:
    env = os.environ.get("S3FORGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def normal_plane(arc: GreatArc) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of the 2-plane orthogonal to the arc's great circle.

    The plane is the same at every point of the arc, so rings built on it
    never twist.
    """
    u, v = arc.circle.u, arc.circle.v
    proj = np.eye(4) - np.outer(u, u) - np.outer(v, v)
    w, vecs = np.linalg.eigh(proj)
    w1, w2 = vecs[:, 2], vecs[:, 3]
    return w1, w2


def tube_circle(arc: GreatArc, t: float, spec: TubeSpec) -> CircleS3:
    """Ring of points at geodesic distance ``radius_s3`` from ``p(t)``."""
    if not arc.t_start - 1e-12 <= t <= arc.t_end + 1e-12:
        raise ValueError("t outside the arc")
    eps = spec.radius_s3
    w1, w2 = normal_plane(arc)
    p = arc.circle.points(t)
    return CircleS3(math.cos(eps) * p, w1, w2, math.sin(eps))


def _pole_distance(arc: GreatArc, f: ProjectionFrame) -> float:
    hi = arc.height_range(f)[1]
    return math.acos(min(1.0, hi))


def check_pole(arc: GreatArc, spec: TubeSpec, f: ProjectionFrame) -> None:
    if _pole_distance(arc, f) - spec.radius_s3 < POLE_CLEARANCE:
        raise PoleCollision("tube around this arc reaches the projection point")


def segments_for_arc(arc: GreatArc, spec: TubeSpec, f: ProjectionFrame = CANONICAL) -> int:
    """Segments so the projected core's chord error stays under 0.2% of the local diameter."""
    n = spec.segments_along
    image = project_circle(arc.circle, f)
    if image.kind == "line":
        return n
    lam_min = design_scale_range([arc], f)[0]
    tol = CHORD_TOL * 2.0 * math.sin(spec.radius_s3) * lam_min
    R = image.radius
    if tol >= R:
        return n
    samples = f.project(arc.points(65))
    length = float(np.linalg.norm(np.diff(samples, axis=0), axis=1).sum())
    step = 2.0 * math.acos(1.0 - tol / R)
    return int(min(MAX_SEGMENTS, max(n, math.ceil(length / R / step))))


def tube_geometry(arc: GreatArc, spec: TubeSpec, n_along: int | None = None):
    """4D vertices, triangles and ring layout of one capped tube.

    Returns ``(points4, triangles, ring_slices)`` where ``ring_slices`` lists
    the vertex ranges of the rings along the arc body (caps excluded).
    """
    eps = spec.radius_s3
    m = spec.segments_around
    n_along = n_along or spec.segments_along
    w1, w2 = normal_plane(arc)
    s = np.arange(m) * (2.0 * math.pi / m)
    circ = np.cos(s)[:, None] * w1 + np.sin(s)[:, None] * w2
    ts = np.linspace(arc.t_start, arc.t_end, n_along + 1)
    cores = arc.circle.points(ts)
    pts = [math.cos(eps) * c + math.sin(eps) * circ for c in cores]
    ring_slices = [(k * m, (k + 1) * m) for k in range(len(ts))]

    tris = []

    def band(r0, r1):
        a = r0 * m + np.arange(m)
        b = r0 * m + (np.arange(m) + 1) % m
        c = r1 * m + (np.arange(m) + 1) % m
        d = r1 * m + np.arange(m)
        tris.append(np.stack([a, b, c], axis=1))
        tris.append(np.stack([a, c, d], axis=1))

    for k in range(len(ts) - 1):
        band(k, k + 1)

    def cap(end_ring: int, core: np.ndarray, outward: np.ndarray, forward: bool):
        # rings are joined in the direction of increasing arc parameter
        def join(r_old, r_new):
            band(r_old, r_new) if forward else band(r_new, r_old)

        first = len(pts)
        prev = end_ring
        if spec.cap_style is CapStyle.SPHERICAL_CAP:
            n_cap = max(2, m // 4)
            betas = np.linspace(math.pi / 2.0, 0.0, n_cap + 1)[1:-1]
            for j, beta in enumerate(betas):
                direction = math.cos(beta) * outward + math.sin(beta) * circ
                pts.append(math.cos(eps) * core + math.sin(eps) * direction)
                join(prev, first + j)
                prev = first + j
            apex = math.cos(eps) * core + math.sin(eps) * outward
        else:
            apex = core
        pts.append(np.tile(apex, (m, 1)))  # only the first copy is referenced
        tip = (len(pts) - 1) * m
        a = prev * m + np.arange(m)
        b = prev * m + (np.arange(m) + 1) % m
        fan = np.stack([a, b, np.full(m, tip)], axis=1)
        tris.append(fan if forward else fan[:, ::-1])

    cap(len(ts) - 1, cores[-1], arc.circle.tangents(arc.t_end), True)
    cap(0, cores[0], -arc.circle.tangents(arc.t_start), False)

    points4 = np.vstack(pts)
    triangles = np.vstack(tris)
    # drop the unused copies of each apex
    used = np.zeros(len(points4), dtype=bool)
    used[triangles.reshape(-1)] = True
    new_index = np.cumsum(used) - 1
    return points4[used], new_index[triangles], ring_slices


def _orient_outward(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    m = TriMesh(vertices, triangles)
    if signed_volumes(m)[0] < 0:
        return triangles[:, ::-1].copy()
    return triangles


def mesh_tube(arc: GreatArc, spec: TubeSpec, f: ProjectionFrame = CANONICAL, n_along: int | None = None) -> TriMesh:
    """Closed, outward-oriented genus-0 mesh of the capped tube around ``arc``.

    ``feature_lengths`` holds the exact projected diameter of every body ring.
    """
    check_pole(arc, spec, f)
    points4, tris, ring_slices = tube_geometry(arc, spec, n_along)
    try:
        verts = f.project(points4)
    except AtPole as exc:
        raise PoleCollision(str(exc)) from exc
    tris = _orient_outward(verts, tris)
    m = spec.segments_around
    idx = np.array([0, m // 3, (2 * m) // 3])
    diam = []
    for a, _ in ring_slices:
        ring = verts[a + idx]
        diam.append(2.0 * circumcircle(*ring).radius)
    lam_lo, lam_hi = design_scale_range([arc], f)
    return TriMesh(verts, tris, [(0, len(tris))], np.array(diam), lam_hi / lam_lo)


def euclidean_tube_ratio(design: list[GreatArc], spec: TubeSpec, f: ProjectionFrame = CANONICAL) -> float:
    """Thickest over thinnest projected diameter of the intrinsic tubes.

    A tube of constant Euclidean radius would have to cover this range,
    which is why thickening is done in S^3 instead.
    """
    if not design:
        raise ValueError("empty design")
    lam_min, lam_max = design_scale_range(design, f)
    if math.isinf(lam_max):
        raise AtPole("the design passes through the projection point")
    # diameters 2 sin(eps) lambda share the factor 2 sin(eps)
    return lam_max / lam_min


def _core_samples(arcs: list[GreatArc], spec: TubeSpec, f: ProjectionFrame, spacing: float):
    """Projected core samples, their tube radii and owning arc.

    ``spacing`` is a fraction of the local tube diameter, so thick outer
    tubes get as many samples per diameter as thin inner ones.
    """
    pts, rad, owner = [], [], []
    s = math.sin(spec.radius_s3)
    for k, arc in enumerate(arcs):
        lam_lo, lam_hi = design_scale_range([arc], f)
        # projected length is at most length * lam_hi; local diameter is at least 2 s lam_lo
        n = int(min(256, max(2, math.ceil(arc.length * lam_hi / (spacing * 2.0 * s * lam_lo)))))
        core = arc.circle.points(np.linspace(arc.t_start, arc.t_end, n + 1))
        pts.append(f.project(core))
        rad.append(s * f.scale(core))
        owner.append(np.full(n + 1, k))
    return np.vstack(pts), np.concatenate(rad), np.concatenate(owner)


def tube_clearances(arcs: list[GreatArc], spec: TubeSpec, f: ProjectionFrame = CANONICAL) -> np.ndarray:
    """Gaps between tubes of arcs that share no polytope vertex.

    Only gaps narrower than the thinnest tube diameter are returned, since
    wider ones cannot set the minimum feature size.
    """
    if len(arcs) < 2:
        return np.zeros(0)
    lam_min = design_scale_range(arcs, f)[0]
    min_diam = 2.0 * math.sin(spec.radius_s3) * lam_min
    pts, rad, owner = _core_samples(arcs, spec, f, 0.25)
    # samples are grouped in octaves of tube radius; each pair of groups is
    # searched with the largest reach that group pair can need
    band = np.floor(np.log2(rad / rad.min())).astype(int)
    groups = [np.nonzero(band == b)[0] for b in np.unique(band)]
    trees = [cKDTree(pts[g]) for g in groups]
    found = []
    for a in range(len(groups)):
        for b in range(a, len(groups)):
            reach = min_diam + rad[groups[a]].max() + rad[groups[b]].max()
            m = trees[a].sparse_distance_matrix(trees[b], reach, output_type="ndarray")
            if len(m):
                found.append(np.stack([groups[a][m["i"]], groups[b][m["j"]]], axis=1))
    if not found:
        return np.zeros(0)
    pairs = np.vstack(found)
    ends = np.array([a.ends for a in arcs])
    oa, ob = owner[pairs[:, 0]], owner[pairs[:, 1]]
    ea, eb = ends[oa], ends[ob]
    share = np.zeros(len(pairs), dtype=bool)
    for x in range(2):
        for y in range(2):
            share |= (ea[:, x] == eb[:, y]) & (ea[:, x] >= 0)
    keep = (oa != ob) & ~share
    if not np.any(keep):
        return np.zeros(0)
    p = pairs[keep]
    gap = np.linalg.norm(pts[p[:, 0]] - pts[p[:, 1]], axis=1) - rad[p[:, 0]] - rad[p[:, 1]]
    return gap[gap < min_diam]


def mesh_design(arcs: list[GreatArc], spec: TubeSpec, f: ProjectionFrame = CANONICAL, adaptive: bool = True) -> TriMesh:
    """One closed shell per arc, concatenated in input order."""
    for arc in arcs:
        check_pole(arc, spec, f)

    def one(arc):
        n = segments_for_arc(arc, spec, f) if adaptive else spec.segments_along
        return mesh_tube(arc, spec, f, n)

    workers = max_workers()
    if workers > 1 and len(arcs) > 16:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            meshes = list(pool.map(one, arcs))
    else:
        meshes = [one(a) for a in arcs]
    mesh = TriMesh.concatenate(meshes)
    mesh.feature_lengths = np.concatenate([mesh.feature_lengths, tube_clearances(arcs, spec, f)])
    lam_lo, lam_hi = design_scale_range(arcs, f)
    mesh.feature_ratio = lam_hi / lam_lo
    return mesh
