import math

import numpy as np
import pytest

from s3forge.errors import AtPole, PoleCollision
from s3forge.meshkit import validate
from s3forge.polytope4 import GreatArc, Kind, build, half_cut, orient, skeleton_arcs
from s3forge.s3geom import CANONICAL, CircleS3, frame_from_pole, project_circle
from s3forge.tubes import (
    CapStyle,
    TubeSpec,
    euclidean_tube_ratio,
    max_workers,
    mesh_design,
    mesh_tube,
    normal_plane,
    segments_for_arc,
    tube_circle,
    tube_clearances,
    tube_geometry,
)


def geodesic(a, b):
    # stable for tiny angles, unlike arccos
    return math.atan2(np.linalg.norm(b - (a @ b) * a), a @ b)


def southern_arc():
    c = CircleS3.great([0.6, 0, 0, -0.8], [0, 1, 0, 0])
    return GreatArc(c, 0.1, 1.2, (0, 1))


def test_spec_validation():
    with pytest.raises(ValueError):
        TubeSpec(0.0)
    with pytest.raises(ValueError):
        TubeSpec(1.0)
    with pytest.raises(ValueError):
        TubeSpec(0.1, segments_around=2)
    with pytest.raises(ValueError):
        TubeSpec(0.1, cap_style="Pointy")
    assert TubeSpec(0.1, cap_style="FlatDisk").cap_style is CapStyle.FLAT_DISK


def test_rings_are_at_constant_geodesic_distance():
    arc = southern_arc()
    spec = TubeSpec(0.07)
    w1, w2 = normal_plane(arc)
    for w in (w1, w2):
        assert abs(w @ arc.circle.u) < 1e-12 and abs(w @ arc.circle.v) < 1e-12
    for t in np.linspace(arc.t_start, arc.t_end, 7):
        ring = tube_circle(arc, t, spec)
        core = arc.circle.points(t)
        for s in np.linspace(0, 2 * math.pi, 9):
            x = ring.points(s)
            assert abs(x @ x - 1) < 1e-12
            assert abs(geodesic(core, x) - 0.07) < 1e-12
        # each ring projects to a round circle whose diameter is the exact feature size
        image = project_circle(ring)
        assert image.kind == "circle"
    with pytest.raises(ValueError):
        tube_circle(arc, 2.0, spec)


@pytest.mark.parametrize("cap", list(CapStyle))
def test_single_tube_closed_and_outward(cap):
    arc = southern_arc()
    m = mesh_tube(arc, TubeSpec(0.05, 4, 12, cap))
    d = validate(m)
    assert d.watertight == [True]
    assert d.euler_characteristic == [2]
    assert d.volume_mm3 > 0
    # ring diameters are bounded by the conformal scale at the arc ends
    lam = 1 / (1 - CANONICAL.to_frame(arc.points(200))[:, 3])
    lo, hi = 2 * math.sin(0.05) * lam.min(), 2 * math.sin(0.05) * lam.max()
    assert np.all(m.feature_lengths > 0.9 * lo) and np.all(m.feature_lengths < 1.1 * hi)


def test_geometry_layout():
    arc = southern_arc()
    pts, tris, rings = tube_geometry(arc, TubeSpec(0.05, 3, 10))
    assert len(rings) == 4
    assert np.allclose(np.linalg.norm(pts, axis=1), 1, atol=1e-12)
    assert tris.max() < len(pts)


def test_pole_collision():
    c = CircleS3.great([1, 0, 0, 0], [0, 0, 0, 1])
    near = GreatArc(c, 0.2, math.pi / 2 - 0.01, (0, 1))
    with pytest.raises(PoleCollision):
        mesh_tube(near, TubeSpec(0.05))
    with pytest.raises(AtPole):
        euclidean_tube_ratio([GreatArc(c, 0.2, math.pi / 2, (0, 1))], TubeSpec(0.05))


def test_adaptive_segments_grow_with_curvature():
    arc = southern_arc()
    spec = TubeSpec(0.01, 2, 8)
    assert segments_for_arc(arc, spec) > segments_for_arc(arc, TubeSpec(0.2, 2, 8))
    assert segments_for_arc(arc, spec) >= 2


def test_design_shells_and_thread_determinism(monkeypatch):
    f = CANONICAL
    arcs = half_cut(skeleton_arcs(orient(build(Kind.CELL24), "CellCentered", f)), f)
    spec = TubeSpec(0.07, 2, 12)
    monkeypatch.setenv("S3FORGE_THREADS", "1")
    assert max_workers() == 1
    serial = mesh_design(arcs, spec, f)
    monkeypatch.setenv("S3FORGE_THREADS", "4")
    parallel = mesh_design(arcs, spec, f)
    assert np.array_equal(serial.vertices, parallel.vertices)
    assert np.array_equal(serial.triangles, parallel.triangles)
    d = validate(serial)
    assert len(serial.shells) == len(arcs)
    assert all(d.watertight) and d.euler_characteristic == [2] * len(arcs)
    assert math.isclose(serial.feature_ratio, euclidean_tube_ratio(arcs, spec, f))
    monkeypatch.setenv("S3FORGE_THREADS", "junk")
    assert max_workers() >= 1


def test_clearances_only_between_disjoint_arcs():
    f = frame_from_pole(np.array([0.1, 0.2, 0.3, 0.9]) / math.sqrt(0.95))
    arcs = half_cut(skeleton_arcs(orient(build(Kind.CELL600), "VertexCentered", f)), f)
    spec = TubeSpec(0.03, 2, 8)
    gaps = tube_clearances(arcs, spec, f)
    lam_min = min(1 / (1 - f.to_frame(a.points(3))[:, 3].min()) for a in arcs)
    assert np.all(gaps < 2 * math.sin(0.03) * lam_min + 1e-12)
    assert tube_clearances(arcs[:1], spec, f).size == 0
