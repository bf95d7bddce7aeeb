"""Stereographic projection S^3 -> R^3 from an arbitrary projection point.

Projection from a pole ``P`` is realized by first moving the design with the
left isometry that carries ``P`` to the north pole ``k = (0, 0, 0, 1)`` and
then applying the canonical map ``x -> (x0, x1, x2) / (1 - x3)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._validation import as_vec4, check_points
from .errors import AtPole, DegenerateCircle, NotIncident
from .quat import K, ONE, UnitQuaternion, left_matrix, mover

POLE_EPS = 1e-12
LINE_TOL = 1e-9
NORTH = np.array([0.0, 0.0, 0.0, 1.0])


def stereo(x) -> np.ndarray:
    """Project one point of S^3 minus the north pole to R^3."""
    x = as_vec4(x)
    denom = 1.0 - x[3]
    if denom <= POLE_EPS:
        raise AtPole(f"point {x} is at the projection point")
    return x[:3] / denom


def stereo_inv(y) -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(3)
    s = float(y @ y)
    return np.concatenate([2.0 * y, [s - 1.0]]) / (s + 1.0)


def stereo_array(X: np.ndarray) -> np.ndarray:
    """Vectorized :func:`stereo` over rows of an (n, 4) array."""
    X = np.asarray(X, dtype=float)
    denom = 1.0 - X[..., 3]
    if np.any(denom <= POLE_EPS):
        raise AtPole("at least one point is at the projection point")
    return X[..., :3] / denom[..., None]


def stereo_inv_array(Y: np.ndarray) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    s = np.sum(Y * Y, axis=-1)
    out = np.concatenate([2.0 * Y, (s - 1.0)[..., None]], axis=-1)
    return out / (s + 1.0)[..., None]


def stereo_differential(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Derivative of the canonical projection at ``x`` applied to tangent ``w``."""
    denom = 1.0 - x[..., 3]
    return w[..., :3] / denom[..., None] + x[..., :3] * (w[..., 3] / denom**2)[..., None]


@dataclass(frozen=True)
class ProjectionFrame:
    """Projection point together with the isometry that moves it to ``k``.

    ``image_rotation`` is an optional rotation of the projected image, given
    as a unit quaternion acting on ``R^3`` by conjugation (``x0, x1, x2``
    playing the roles of ``i, j, k``).  In ``S^3`` it is the rotation of the
    first three coordinates, which fixes the north pole.
    """

    pole: UnitQuaternion
    pre_rotation: UnitQuaternion
    image_rotation: UnitQuaternion = ONE
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mat = np.eye(4)
        mat[:3, :3] = _rotation3(self.image_rotation)
        mat = mat @ left_matrix(self.pre_rotation)
        moved = mat @ self.pole.as_array()
        if np.max(np.abs(moved - NORTH)) > 1e-12:
            raise ValueError("pre_rotation does not carry the pole to (0, 0, 0, 1)")
        object.__setattr__(self, "matrix", mat)

    def to_frame(self, X: np.ndarray) -> np.ndarray:
        """Express design points (rows) in the canonical frame."""
        return np.asarray(X, dtype=float) @ self.matrix.T

    def project(self, X: np.ndarray) -> np.ndarray:
        return stereo_array(self.to_frame(X))

    def scale(self, X: np.ndarray) -> np.ndarray:
        """Conformal scale factor at each design point."""
        h = self.to_frame(X)[..., 3]
        if np.any(1.0 - h <= POLE_EPS):
            raise AtPole("conformal scale is infinite at the projection point")
        return 1.0 / (1.0 - h)


def _rotation3(q: UnitQuaternion) -> np.ndarray:
    a, b, c, d = q.as_array()
    return np.array([
        [1 - 2 * (c * c + d * d), 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), 1 - 2 * (b * b + d * d), 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), 1 - 2 * (b * b + c * c)],
    ])


def frame_from_pole(pole, image_rotation=None) -> ProjectionFrame:
    if not isinstance(pole, UnitQuaternion):
        pole = UnitQuaternion.from_array(as_vec4(pole))
    if image_rotation is None:
        image_rotation = ONE
    elif not isinstance(image_rotation, UnitQuaternion):
        image_rotation = UnitQuaternion.from_array(as_vec4(image_rotation))
    return ProjectionFrame(pole=pole, pre_rotation=mover(pole, K), image_rotation=image_rotation)


CANONICAL = frame_from_pole(K)


@dataclass(frozen=True)
class CircleS3:
    """Circle in S^3: ``plane_center + radius (cos t u + sin t v)``."""

    plane_center: np.ndarray
    u: np.ndarray
    v: np.ndarray
    radius: float

    def __post_init__(self):
        c, u, v = (np.asarray(a, dtype=float).reshape(4) for a in (self.plane_center, self.u, self.v))
        object.__setattr__(self, "plane_center", c)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "radius", float(self.radius))
        if not 0.0 < self.radius <= 1.0 + 1e-12:
            if self.radius <= 1e-12:
                raise DegenerateCircle(f"circle radius {self.radius} is degenerate")
            raise ValueError(f"circle radius must lie in (0, 1], got {self.radius}")
        checks = (u @ v, u @ u - 1.0, v @ v - 1.0, c @ u, c @ v, c @ c + self.radius**2 - 1.0)
        if max(abs(x) for x in checks) > 1e-12:
            raise ValueError("CircleS3 frame is not orthonormal or does not lie on S^3")

    @classmethod
    def great(cls, u, v) -> "CircleS3":
        """Great circle through orthonormal directions ``u`` and ``v``."""
        u = as_vec4(u)
        u = u / np.linalg.norm(u)
        v = as_vec4(v)
        v = v - (v @ u) * u
        v = v / np.linalg.norm(v)
        return cls(np.zeros(4), u, v, 1.0)

    @classmethod
    def through(cls, p1, p2, p3) -> "CircleS3":
        """The circle of S^3 through three distinct points of S^3."""
        p1, p2, p3 = (as_vec4(p) for p in (p1, p2, p3))
        u = p2 - p1
        nu = np.linalg.norm(u)
        if nu < 1e-12:
            raise DegenerateCircle("coincident points")
        u /= nu
        v = p3 - p1
        v = v - (v @ u) * u
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            raise DegenerateCircle("collinear points")
        v /= nv
        center = p1 - (p1 @ u) * u - (p1 @ v) * v
        r2 = 1.0 - center @ center
        if r2 <= 1e-24:
            raise DegenerateCircle("points span a plane tangent to S^3")
        return cls(center, u, v, math.sqrt(r2))

    @property
    def is_great(self) -> bool:
        return abs(self.radius - 1.0) <= 1e-12 and float(np.linalg.norm(self.plane_center)) <= 1e-12

    def points(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (
            self.plane_center
            + self.radius * (np.cos(t)[..., None] * self.u + np.sin(t)[..., None] * self.v)
        )

    def tangents(self, t) -> np.ndarray:
        """Unit tangent vectors (direction of increasing ``t``)."""
        t = np.asarray(t, dtype=float)
        return -np.sin(t)[..., None] * self.u + np.cos(t)[..., None] * self.v

    def param_of(self, x) -> float:
        d = as_vec4(x) - self.plane_center
        return math.atan2(d @ self.v, d @ self.u)

    def distance_to(self, x) -> float:
        """Euclidean (chordal) distance in R^4 from ``x`` to the circle."""
        x = as_vec4(x)
        d = x - self.plane_center
        s = np.array([d @ self.u, d @ self.v])
        ns = np.linalg.norm(s)
        if ns == 0.0:
            closest = self.plane_center + self.radius * self.u
        else:
            closest = self.plane_center + self.radius * (s[0] * self.u + s[1] * self.v) / ns
        return float(np.linalg.norm(x - closest))

    def transformed(self, matrix: np.ndarray) -> "CircleS3":
        """Image under an orthogonal 4x4 matrix."""
        return CircleS3(matrix @ self.plane_center, matrix @ self.u, matrix @ self.v, self.radius)


@dataclass(frozen=True)
class Circle:
    """Round circle in R^3."""

    center: np.ndarray
    radius: float
    plane_normal: np.ndarray

    kind = "circle"

    def residual(self, Y: np.ndarray) -> float:
        """Largest distance from the rows of ``Y`` to this circle."""
        d = check_points(Y, 3) - self.center
        h = d @ self.plane_normal
        radial = np.linalg.norm(d - h[:, None] * self.plane_normal, axis=1)
        return float(np.max(np.hypot(h, radial - self.radius)))


@dataclass(frozen=True)
class Line:
    """Straight line in R^3 (the image of a circle through the pole)."""

    base: np.ndarray
    direction: np.ndarray

    kind = "line"

    def residual(self, Y: np.ndarray) -> float:
        d = check_points(Y, 3) - self.base
        along = d @ self.direction
        return float(np.max(np.linalg.norm(d - along[:, None] * self.direction, axis=1)))


Circline = Union[Circle, Line]


def circumcircle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> Circle:
    """Circle in R^3 through three non-collinear points."""
    ab = a - c
    bc = b - c
    cross = np.cross(ab, bc)
    n2 = cross @ cross
    if n2 <= 1e-300:
        raise DegenerateCircle("collinear sample points")
    center = c + np.cross((ab @ ab) * bc - (bc @ bc) * ab, cross) / (2.0 * n2)
    return Circle(center, float(np.linalg.norm(a - center)), cross / math.sqrt(n2))


def project_circle(c: CircleS3, f: ProjectionFrame = CANONICAL) -> Circline:
    """Exact image of a circle of S^3 under projection from ``f.pole``."""
    if c.radius <= 1e-12:
        raise DegenerateCircle(f"radius {c.radius} is degenerate")
    rc = c.transformed(f.matrix)
    w = np.array([rc.u[3], rc.v[3]])
    t_pole = math.atan2(w[1], w[0]) if np.any(w) else 0.0
    # the three samples sit as far from the pole as possible
    ts = t_pole + math.pi + np.array([0.0, 2.0 * math.pi / 3.0, -2.0 * math.pi / 3.0])
    if rc.distance_to(NORTH) <= LINE_TOL:
        a, b = stereo_array(rc.points(ts[1:]))
        d = (b - a) / np.linalg.norm(b - a)
        return Line(a - (a @ d) * d, d)
    return circumcircle(*stereo_array(rc.points(ts)))


def sample_projected_circle(c: CircleS3, f: ProjectionFrame = CANONICAL, n: int = 64) -> np.ndarray:
    """``n`` projected points spread around the circle, skipping the pole."""
    rc = c.transformed(f.matrix)
    w = np.array([rc.u[3], rc.v[3]])
    t_pole = math.atan2(w[1], w[0]) if np.any(w) else 0.0
    ts = t_pole + (np.arange(n) + 0.5) * (2.0 * math.pi / n)
    return stereo_array(rc.points(ts))


def conformal_scale(x, f: ProjectionFrame = CANONICAL) -> float:
    """Length magnification of the projection at ``x``: ``1 / (1 - <x_rot, k>)``."""
    h = float(f.matrix[3] @ as_vec4(x))
    if 1.0 - h <= POLE_EPS:
        raise AtPole("conformal scale is infinite at the projection point")
    return 1.0 / (1.0 - h)


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return math.atan2(float(np.linalg.norm(a - (a @ b) * b)), float(a @ b))


def _tangent_at(c: CircleS3, x: np.ndarray) -> np.ndarray:
    return c.tangents(c.param_of(x))


def angle_check(c1: CircleS3, c2: CircleS3, at, f: ProjectionFrame = CANONICAL) -> tuple[float, float]:
    """Intersection angle of two circles at ``at``, in S^3 and after projection."""
    x = as_vec4(at)
    for c in (c1, c2):
        if c.distance_to(x) > LINE_TOL:
            raise NotIncident("circle does not pass through the given point")
    t1 = _tangent_at(c1, x)
    t2 = _tangent_at(c2, x)
    xr = f.matrix @ x
    if 1.0 - xr[3] <= POLE_EPS:
        raise AtPole("intersection point is the projection point")
    y1 = stereo_differential(xr, f.matrix @ t1)
    y2 = stereo_differential(xr, f.matrix @ t2)
    return _angle(t1, t2), _angle(y1, y2)
