"""The six regular 4-polytopes, their 1-skeleta as great-arc designs on S^3."""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import ConvexHull

from ._validation import as_vec4
from .errors import AntipodalEdge
from .quat import UnitQuaternion, left_matrix, mover
from .s3geom import CANONICAL, CircleS3, ProjectionFrame

PHI = (1.0 + math.sqrt(5.0)) / 2.0
EDGE_TOL = 1e-9


class Kind(str, enum.Enum):
    SIMPLEX5 = "Simplex5"
    TESSERACT8 = "Tesseract8"
    CROSS16 = "Cross16"
    CELL24 = "Cell24"
    CELL120 = "Cell120"
    CELL600 = "Cell600"


# (vertices, edges, cells)
COUNTS = {
    Kind.SIMPLEX5: (5, 10, 5),
    Kind.TESSERACT8: (16, 32, 8),
    Kind.CROSS16: (8, 24, 16),
    Kind.CELL24: (24, 96, 24),
    Kind.CELL120: (600, 1200, 120),
    Kind.CELL600: (120, 720, 600),
}


@dataclass(frozen=True)
class Polytope4:
    kind: Kind
    vertices: np.ndarray
    edges: np.ndarray

    @property
    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        return np.linalg.norm(v[self.edges[:, 0]] - v[self.edges[:, 1]], axis=1)

    def transformed(self, matrix: np.ndarray) -> "Polytope4":
        return Polytope4(self.kind, self.vertices @ matrix.T, self.edges)


@dataclass(frozen=True)
class GreatArc:
    """Arc ``circle.points(t)`` for ``t`` in ``[t_start, t_end]`` of a great circle.

    ``ends`` records the polytope vertex indices at each end (``-1`` once an
    end has been cut away), which the meshing code uses to tell adjacent
    tubes apart.
    """

    circle: CircleS3
    t_start: float
    t_end: float
    ends: tuple[int, int] = (-1, -1)

    def __post_init__(self):
        if not self.circle.is_great:
            raise ValueError("GreatArc needs a great circle")
        span = self.t_end - self.t_start
        if not 0.0 < span < math.pi:
            raise ValueError(f"arc span must lie in (0, pi), got {span}")

    @property
    def length(self) -> float:
        return self.t_end - self.t_start

    def points(self, n: int) -> np.ndarray:
        return self.circle.points(np.linspace(self.t_start, self.t_end, n))

    def height_coeffs(self, f: ProjectionFrame) -> tuple[float, float]:
        """``(A, B)`` with frame height ``x3(t) = A cos t + B sin t``."""
        row = f.matrix[3]
        return float(row @ self.circle.u), float(row @ self.circle.v)

    def height_range(self, f: ProjectionFrame, pad: float = 0.0) -> tuple[float, float]:
        """Exact min and max of the frame height over ``[t_start - pad, t_end + pad]``."""
        A, B = self.height_coeffs(f)
        lo, hi = self.t_start - pad, self.t_end + pad
        cand = [lo, hi]
        crit = math.atan2(B, A)
        for c in (crit, crit + math.pi):
            # shift the critical angle into the window if a 2pi multiple lands there
            k = math.ceil((lo - c) / (2.0 * math.pi))
            c = c + 2.0 * math.pi * k
            if lo <= c <= hi:
                cand.append(c)
        vals = [A * math.cos(t) + B * math.sin(t) for t in cand]
        return min(vals), max(vals)


def _even_permutations(n: int):
    for p in itertools.permutations(range(n)):
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if p[a] > p[b])
        if inversions % 2 == 0:
            yield p


def _signed(values) -> list[tuple[float, ...]]:
    """All sign choices of the nonzero entries."""
    nz = [i for i, x in enumerate(values) if x != 0]
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=len(nz)):
        v = list(values)
        for i, s in zip(nz, signs):
            v[i] = s * v[i]
        out.append(tuple(v))
    return out


def _unique_rows(rows) -> np.ndarray:
    arr = np.array(rows, dtype=float)
    _, idx = np.unique(np.round(arr, 9), axis=0, return_index=True)
    return arr[np.sort(idx)]


def _cross16() -> np.ndarray:
    return np.vstack([np.eye(4), -np.eye(4)])


def _tesseract8() -> np.ndarray:
    return np.array(list(itertools.product((0.5, -0.5), repeat=4)))


def _simplex5() -> np.ndarray:
    # standard basis of R^5, centred, expressed in an orthonormal basis of sum(x) = 0
    pts = np.eye(5) - 0.2
    basis = np.linalg.svd(pts)[2][:4]
    v = pts @ basis.T
    return v / np.linalg.norm(v, axis=1)[:, None]


def _cell24() -> np.ndarray:
    rows = []
    for pos in itertools.combinations(range(4), 2):
        base = [0.0] * 4
        for p in pos:
            base[p] = 1.0
        rows.extend(_signed(base))
    return np.array(rows) / math.sqrt(2.0)


def _cell600() -> np.ndarray:
    rows = [tuple(r) for r in _cross16()] + [tuple(r) for r in _tesseract8()]
    base = (PHI / 2.0, 0.5, 1.0 / (2.0 * PHI), 0.0)
    for perm in _even_permutations(4):
        for signed in _signed(base):
            v = [0.0] * 4
            for src, dst in enumerate(perm):
                v[dst] = signed[src]
            rows.append(tuple(v))
    return _unique_rows(rows)


def min_distance_edges(vertices: np.ndarray, tol: float = EDGE_TOL) -> np.ndarray:
    """All index pairs ``i < j`` at the minimal inter-vertex distance."""
    d = np.linalg.norm(vertices[:, None, :] - vertices[None, :, :], axis=2)
    iu = np.triu_indices(len(vertices), k=1)
    dist = d[iu]
    dmin = dist.min()
    keep = np.abs(dist - dmin) <= tol
    return np.stack([iu[0][keep], iu[1][keep]], axis=1)


def _tetrahedra(vertices: np.ndarray, edges: np.ndarray) -> list[tuple[int, ...]]:
    nbrs = [set() for _ in range(len(vertices))]
    for i, j in edges:
        nbrs[i].add(int(j))
        nbrs[j].add(int(i))
    tets = set()
    for i, j in edges:
        common = nbrs[i] & nbrs[j]
        for k in common:
            for m in common & nbrs[k]:
                tets.add(tuple(sorted((int(i), int(j), k, m))))
    return sorted(tets)


def _cell120() -> np.ndarray:
    v600 = _cell600()
    tets = _tetrahedra(v600, min_distance_edges(v600))
    centers = np.array([v600[list(t)].mean(axis=0) for t in tets])
    return centers / np.linalg.norm(centers, axis=1)[:, None]


_BUILDERS = {
    Kind.SIMPLEX5: _simplex5,
    Kind.TESSERACT8: _tesseract8,
    Kind.CROSS16: _cross16,
    Kind.CELL24: _cell24,
    Kind.CELL120: _cell120,
    Kind.CELL600: _cell600,
}


@lru_cache(maxsize=None)
def _build_cached(kind: Kind) -> Polytope4:
    v = _BUILDERS[kind]()
    v = v / np.linalg.norm(v, axis=1)[:, None]
    v.setflags(write=False)
    e = min_distance_edges(v)
    e.setflags(write=False)
    return Polytope4(kind, v, e)


def build(kind) -> Polytope4:
    """Canonical vertices on S^3 and the minimal-distance edge graph."""
    return _build_cached(Kind(kind))


def cell_centers(p: Polytope4) -> np.ndarray:
    """Unit directions of the centroids of the 3-dimensional cells.

    Cells are the facets of the convex hull; triangulated pieces of one
    facet share a hyperplane and are merged by their outward normal.
    """
    hull = ConvexHull(p.vertices)
    normals = _unique_rows(hull.equations[:, :4])
    return normals / np.linalg.norm(normals, axis=1)[:, None]


def skeleton_arcs(p: Polytope4) -> list[GreatArc]:
    """One great arc per edge, from the lower to the higher vertex index."""
    arcs = []
    for i, j in p.edges:
        a, b = p.vertices[i], p.vertices[j]
        cos_ab = float(np.clip(a @ b, -1.0, 1.0))
        if cos_ab <= -1.0 + 1e-12:
            raise AntipodalEdge(f"edge ({i}, {j}) joins antipodal vertices")
        w = b - cos_ab * a
        w = w / np.linalg.norm(w)
        circle = CircleS3(np.zeros(4), a, w, 1.0)
        arcs.append(GreatArc(circle, 0.0, math.acos(cos_ab), (int(i), int(j))))
    return arcs


class Orientation(str, enum.Enum):
    VERTEX_CENTERED = "VertexCentered"
    CELL_CENTERED = "CellCentered"
    GENERIC = "Generic"


def _pick_target(candidates: np.ndarray) -> np.ndarray:
    # deterministic: the candidate closest to k, ties broken by order
    idx = int(np.argmax(np.round(candidates[:, 3], 12)))
    return candidates[idx]


def orient(p: Polytope4, mode, f: ProjectionFrame = CANONICAL, q=None) -> Polytope4:
    """Rotate ``p`` by a left isometry relative to the frame's pole.

    ``VertexCentered`` carries a vertex to the pole, ``CellCentered`` a cell
    centroid direction; ``Generic`` applies ``q`` directly.  Both centred
    modes pick the candidate nearest ``k``, so a vertex-centred 600-cell and
    a cell-centred 120-cell land in dual position.
    """
    mode = Orientation(mode)
    if mode is Orientation.GENERIC:
        if q is None:
            raise ValueError("Generic orientation needs a unit quaternion q")
        rot = q if isinstance(q, UnitQuaternion) else UnitQuaternion.from_array(as_vec4(q))
        return p.transformed(left_matrix(rot))
    if mode is Orientation.VERTEX_CENTERED:
        target = _pick_target(p.vertices)
    else:
        target = _pick_target(cell_centers(p))
    rot = mover(UnitQuaternion.normalized(target), f.pole)
    return p.transformed(left_matrix(rot))


def half_cut(arcs: list[GreatArc], f: ProjectionFrame = CANONICAL, tol: float = 1e-12) -> list[GreatArc]:
    """Keep the parts of ``arcs`` in the southern half (frame height <= 0)."""
    out = []
    for arc in arcs:
        A, B = arc.height_coeffs(f)
        lo, hi = arc.height_range(f)
        if hi <= tol:
            out.append(arc)
            continue
        if lo > tol:
            continue
        # height = R cos(t - delta) vanishes at delta +- pi/2; the span is < pi so one crossing
        delta = math.atan2(B, A)
        crossings = []
        for base in (delta + math.pi / 2.0, delta - math.pi / 2.0):
            k = math.ceil((arc.t_start - base) / (2.0 * math.pi))
            t = base + 2.0 * math.pi * k
            if arc.t_start < t < arc.t_end:
                crossings.append(t)
        if not crossings:
            continue
        t_cross = crossings[0]
        start_height = A * math.cos(arc.t_start) + B * math.sin(arc.t_start)
        if start_height <= 0.0:
            new = (arc.t_start, t_cross, (arc.ends[0], -1))
        else:
            new = (t_cross, arc.t_end, (-1, arc.ends[1]))
        if new[1] - new[0] > 1e-12:
            out.append(GreatArc(arc.circle, new[0], new[1], new[2]))
    return out


def design_scale_range(arcs: list[GreatArc], f: ProjectionFrame = CANONICAL) -> tuple[float, float]:
    """Exact min and max of the conformal scale over a set of arcs."""
    lo = min(a.height_range(f)[0] for a in arcs)
    hi = max(a.height_range(f)[1] for a in arcs)
    if 1.0 - hi <= 1e-12:
        return 1.0 / (1.0 - lo), math.inf
    return 1.0 / (1.0 - lo), 1.0 / (1.0 - hi)


def feature_ratio(arcs: list[GreatArc], f: ProjectionFrame = CANONICAL) -> float:
    """Largest over smallest conformal scale along the design."""
    lam_min, lam_max = design_scale_range(arcs, f)
    return lam_max / lam_min
