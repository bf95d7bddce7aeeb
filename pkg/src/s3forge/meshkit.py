"""Indexed triangle meshes: welding, validation, scaling and file export."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.sparse import coo_matrix
from scipy.spatial import cKDTree

from .errors import IoFailure

STL_HEADER = b"s3forge binary STL"
STL_RECORD = np.dtype(
    [("normal", "<f4", (3,)), ("verts", "<f4", (3, 3)), ("attr", "<u2")]
)


@dataclass
class TriMesh:
    """Triangle mesh made of one or more closed shells.

    ``shells`` holds ``(start, stop)`` triangle ranges.  ``feature_lengths``
    are the generator-reported local feature sizes (tube diameters, strut
    widths, clearances) in the same units as ``vertices``; ``feature_ratio``
    is the scale-free max/min conformal magnification of the design.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    shells: list = field(default_factory=list)
    feature_lengths: np.ndarray = field(default_factory=lambda: np.zeros(0))
    feature_ratio: float = 1.0

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.feature_lengths = np.asarray(self.feature_lengths, dtype=float).reshape(-1)
        if not self.shells and len(self.triangles):
            self.shells = [(0, len(self.triangles))]
        if len(self.triangles) and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise ValueError("triangle index out of range")

    @classmethod
    def empty(cls) -> "TriMesh":
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), [])

    @classmethod
    def concatenate(cls, meshes) -> "TriMesh":
        """Stack meshes in order; each input shell stays a separate shell."""
        meshes = list(meshes)
        if not meshes:
            return cls.empty()
        verts, tris, shells, feats = [], [], [], []
        v_off = t_off = 0
        for m in meshes:
            verts.append(m.vertices)
            tris.append(m.triangles + v_off)
            shells.extend((a + t_off, b + t_off) for a, b in m.shells)
            feats.append(m.feature_lengths)
            v_off += len(m.vertices)
            t_off += len(m.triangles)
        return cls(
            np.vstack(verts),
            np.vstack(tris),
            shells,
            np.concatenate(feats),
            max(m.feature_ratio for m in meshes),
        )

    def shell_ids(self) -> np.ndarray:
        ids = np.full(len(self.triangles), -1, dtype=np.int64)
        for k, (a, b) in enumerate(self.shells):
            ids[a:b] = k
        return ids

    def bbox(self) -> np.ndarray:
        if not len(self.vertices):
            return np.zeros(3)
        return self.vertices.max(axis=0) - self.vertices.min(axis=0)

    def flipped(self) -> "TriMesh":
        return replace(self, triangles=self.triangles[:, ::-1].copy())


@dataclass
class Diagnostics:
    watertight: list
    euler_characteristic: list
    volume_mm3: float
    bbox_mm: list
    min_feature_mm: float
    feature_ratio: float
    shell_volumes: list = field(default_factory=list)

    @property
    def all_watertight(self) -> bool:
        return bool(self.watertight) and all(self.watertight)

    def to_dict(self) -> dict:
        return {
            "watertight": [bool(x) for x in self.watertight],
            "euler": [int(x) for x in self.euler_characteristic],
            "volume_mm3": _json_float(self.volume_mm3),
            "bbox_mm": [_json_float(x) for x in self.bbox_mm],
            "min_feature_mm": _json_float(self.min_feature_mm),
            "feature_ratio": _json_float(self.feature_ratio),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _json_float(x):
    # JSON has no infinity or NaN; those are reported as null
    x = float(x)
    return x if math.isfinite(x) else None


def triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    v = vertices[triangles]
    return 0.5 * np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)


def weld(m: TriMesh, tol_mm: float = 0.0, min_area: float = 1e-12) -> TriMesh:
    """Merge vertices closer than ``tol_mm``; drop triangles that collapse.

    Each cluster of vertices linked by pairwise distances <= tol is merged
    into its lowest-index member, so the result depends only on input order.
    """
    if tol_mm < 0:
        raise ValueError("tolerance must be non-negative")
    n = len(m.vertices)
    if n == 0:
        return replace(m)
    if tol_mm == 0.0:
        _, first, inverse = np.unique(m.vertices, axis=0, return_index=True, return_inverse=True)
        rep = first[inverse.reshape(-1)]
    else:
        pairs = cKDTree(m.vertices).query_pairs(tol_mm, output_type="ndarray")
        if len(pairs):
            graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
            _, labels = connected_components(graph, directed=False)
            rep_of_label = np.full(labels.max() + 1, n, dtype=np.int64)
            np.minimum.at(rep_of_label, labels, np.arange(n))
            rep = rep_of_label[labels]
        else:
            rep = np.arange(n)
    keep = np.unique(rep)
    new_index = np.full(n, -1, dtype=np.int64)
    new_index[keep] = np.arange(len(keep))
    verts = m.vertices[keep]
    tris = new_index[rep[m.triangles]]
    ok = (tris[:, 0] != tris[:, 1]) & (tris[:, 1] != tris[:, 2]) & (tris[:, 0] != tris[:, 2])
    ok &= triangle_areas(verts, tris) > min_area
    shell_ids = m.shell_ids()[ok]
    tris = tris[ok]
    shells = []
    for k in range(len(m.shells)):
        idx = np.nonzero(shell_ids == k)[0]
        if len(idx):
            shells.append((int(idx[0]), int(idx[-1]) + 1))
    return replace(m, vertices=verts, triangles=tris, shells=shells)


def _edge_table(m: TriMesh):
    tris = m.triangles
    sid = np.repeat(m.shell_ids(), 3)
    a = tris.reshape(-1)
    b = tris[:, [1, 2, 0]].reshape(-1)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    sign = np.where(a < b, 1, -1)
    keys = np.stack([sid, lo, hi], axis=1)
    uniq, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    signsum = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(signsum, inverse.reshape(-1), sign)
    return uniq, counts, signsum


def signed_volumes(m: TriMesh) -> np.ndarray:
    """Per-shell signed volume by the divergence theorem."""
    v = m.vertices[m.triangles]
    tet = np.einsum("ij,ij->i", v[:, 0], np.cross(v[:, 1], v[:, 2])) / 6.0
    out = np.zeros(len(m.shells))
    for k, (a, b) in enumerate(m.shells):
        out[k] = tet[a:b].sum()
    return out


def validate(m: TriMesh) -> Diagnostics:
    """Watertightness, Euler characteristic, volume and feature report.

    Never raises on bad geometry; problems show up in the returned fields.
    """
    n_shells = len(m.shells)
    if n_shells == 0:
        return Diagnostics([], [], 0.0, [0.0, 0.0, 0.0], math.nan, m.feature_ratio, [])
    uniq, counts, signsum = _edge_table(m)
    bad = (counts != 2) | (signsum != 0)
    bad_per_shell = np.bincount(uniq[:, 0], weights=bad, minlength=n_shells)
    edges_per_shell = np.bincount(uniq[:, 0], minlength=n_shells)
    sid = m.shell_ids()
    faces_per_shell = np.bincount(sid, minlength=n_shells)
    sv = np.unique(np.stack([np.repeat(sid, 3), m.triangles.reshape(-1)], axis=1), axis=0)
    verts_per_shell = np.bincount(sv[:, 0], minlength=n_shells)
    euler = (verts_per_shell - edges_per_shell + faces_per_shell).astype(int)
    vols = signed_volumes(m)
    min_feature = float(m.feature_lengths.min()) if len(m.feature_lengths) else math.nan
    return Diagnostics(
        watertight=[bool(x == 0) for x in bad_per_shell],
        euler_characteristic=[int(x) for x in euler],
        volume_mm3=float(vols.sum()),
        bbox_mm=[float(x) for x in m.bbox()],
        min_feature_mm=min_feature,
        feature_ratio=float(m.feature_ratio),
        shell_volumes=[float(x) for x in vols],
    )


def scale_to(m: TriMesh, target_bbox_mm) -> TriMesh:
    """Uniformly scale so the largest bbox extent equals the largest target extent."""
    if not len(m.vertices):
        raise ValueError("cannot scale an empty mesh")
    target = np.asarray(target_bbox_mm, dtype=float).reshape(3)
    s = float(target.max() / m.bbox().max())
    return replace(m, vertices=m.vertices * s, feature_lengths=m.feature_lengths * s)


def face_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    v = vertices[triangles]
    n = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    norm = np.linalg.norm(n, axis=1)
    out = np.zeros_like(n)
    nz = norm > 0
    out[nz] = n[nz] / norm[nz, None]
    return out


def export_stl(m: TriMesh, path) -> None:
    """Binary STL: 80-byte header, uint32 count, 50 bytes per triangle."""
    rec = np.zeros(len(m.triangles), dtype=STL_RECORD)
    if len(m.triangles):
        rec["normal"] = face_normals(m.vertices, m.triangles)
        rec["verts"] = m.vertices[m.triangles]
    header = STL_HEADER.ljust(80, b"\0")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.uint32(len(rec)).astype("<u4").tobytes())
            fh.write(rec.tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_stl(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(normals, triangle_vertices)`` of shapes (m, 3) and (m, 3, 3)."""
    try:
        data = open(path, "rb").read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
    if len(data) != 84 + 50 * count:
        raise ValueError(f"STL size {len(data)} does not match triangle count {count}")
    rec = np.frombuffer(data, dtype=STL_RECORD, count=count, offset=84)
    return rec["normal"].astype(float), rec["verts"].astype(float)


def export_obj(m: TriMesh, path) -> None:
    lines = ["# s3forge mesh"]
    lines += ["v %.9g %.9g %.9g" % tuple(v) for v in m.vertices]
    lines += ["f %d %d %d" % tuple(t + 1) for t in m.triangles]
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_obj(path) -> TriMesh:
    verts, tris = [], []
    try:
        fh = open(path, encoding="ascii")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    with fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                tris.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return TriMesh(np.array(verts).reshape(-1, 3), np.array(tris, dtype=np.int64).reshape(-1, 3))

