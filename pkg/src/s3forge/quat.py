"""Quaternion arithmetic and the unit quaternions as points of S^3.

A quaternion ``a + b i + c j + d k`` is identified with the 4-vector
``(a, b, c, d)``.  Unit quaternions act on S^3 by left multiplication
(``x -> q x``) and by right multiplication (``x -> x q``); both actions are
isometries of R^4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotUnit, ZeroQuaternion

UNIT_TOL = 1e-12
ZERO_NORM = 1e-300


@dataclass(frozen=True)
class Quaternion:
    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"quaternion component {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        a, b, c, d = (float(x) for x in np.asarray(arr, dtype=float).reshape(4))
        return cls(a, b, c, d)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def __iter__(self):
        return iter((self.a, self.b, self.c, self.d))

    def norm2(self) -> float:
        return self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return q_mul(self, other)
        return Quaternion(self.a * other, self.b * other, self.c * other, self.d * other)

    def __rmul__(self, other):
        return Quaternion(self.a * other, self.b * other, self.c * other, self.d * other)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def isclose(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.as_array() - other.as_array())) <= tol)


@dataclass(frozen=True)
class UnitQuaternion(Quaternion):
    """A quaternion of length one, i.e. a point of S^3."""

    def __post_init__(self):
        super().__post_init__()
        drift = abs(self.norm2() - 1.0)
        if drift > UNIT_TOL:
            raise NotUnit(f"|q|^2 differs from 1 by {drift:.3e}")

    @classmethod
    def normalized(cls, q) -> "UnitQuaternion":
        """Scale ``q`` (a Quaternion or 4-sequence) onto S^3."""
        arr = q.as_array() if isinstance(q, Quaternion) else np.asarray(q, dtype=float).reshape(4)
        n = float(np.linalg.norm(arr))
        if n <= ZERO_NORM:
            raise ZeroQuaternion("cannot normalize the zero quaternion")
        return cls.from_array(arr / n)


def _as_unit(q: Quaternion) -> UnitQuaternion:
    # Renormalize composition output; drift is reported by the caller's own checks.
    if isinstance(q, UnitQuaternion):
        return q
    if abs(q.norm2() - 1.0) <= UNIT_TOL:
        return UnitQuaternion(q.a, q.b, q.c, q.d)
    return UnitQuaternion.normalized(q)


def _require_unit(*qs: Quaternion) -> None:
    for q in qs:
        drift = abs(q.norm2() - 1.0)
        if drift > UNIT_TOL:
            raise NotUnit(f"expected a unit quaternion, |q|^2 - 1 = {drift:.3e}")


ONE = UnitQuaternion(1.0, 0.0, 0.0, 0.0)
I = UnitQuaternion(0.0, 1.0, 0.0, 0.0)
J = UnitQuaternion(0.0, 0.0, 1.0, 0.0)
K = UnitQuaternion(0.0, 0.0, 0.0, 1.0)


def q_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product ``p q`` (non-commutative)."""
    a1, b1, c1, d1 = p.a, p.b, p.c, p.d
    a2, b2, c2, d2 = q.a, q.b, q.c, q.d
    return Quaternion(
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def q_conj(q: Quaternion) -> Quaternion:
    out = Quaternion(q.a, -q.b, -q.c, -q.d)
    return _as_unit(out) if isinstance(q, UnitQuaternion) else out


def q_inv(q: Quaternion) -> Quaternion:
    n2 = q.norm2()
    if math.sqrt(n2) <= ZERO_NORM:
        raise ZeroQuaternion("the zero quaternion has no inverse")
    if isinstance(q, UnitQuaternion):
        return q_conj(q)
    return Quaternion(q.a / n2, -q.b / n2, -q.c / n2, -q.d / n2)


def left_isometry(q: Quaternion, x: Quaternion) -> UnitQuaternion:
    """Apply the isometry ``x -> q x`` of S^3."""
    _require_unit(q, x)
    return _as_unit(q_mul(q, x))


def right_isometry(q: Quaternion, x: Quaternion) -> UnitQuaternion:
    """Apply the isometry ``x -> x q`` of S^3."""
    _require_unit(q, x)
    return _as_unit(q_mul(x, q))


def mover(a: Quaternion, b: Quaternion) -> UnitQuaternion:
    """Unit ``q = b a^-1``, so that left multiplication by ``q`` sends ``a`` to ``b``."""
    _require_unit(a, b)
    return _as_unit(q_mul(b, q_conj(a)))


def mover_right(a: Quaternion, b: Quaternion) -> UnitQuaternion:
    """Unit ``q = a^-1 b``, so that right multiplication by ``q`` sends ``a`` to ``b``."""
    _require_unit(a, b)
    return _as_unit(q_mul(q_conj(a), b))


def left_matrix(q: Quaternion) -> np.ndarray:
    """4x4 matrix ``L`` with ``L @ x == q x`` for column 4-vectors ``x``."""
    a, b, c, d = q.a, q.b, q.c, q.d
    return np.array(
        [
            [a, -b, -c, -d],
            [b, a, -d, c],
            [c, d, a, -b],
            [d, -c, b, a],
        ]
    )


def right_matrix(q: Quaternion) -> np.ndarray:
    """4x4 matrix ``R`` with ``R @ x == x q``."""
    a, b, c, d = q.a, q.b, q.c, q.d
    return np.array(
        [
            [a, -b, -c, -d],
            [b, a, d, -c],
            [c, -d, a, b],
            [d, c, -b, a],
        ]
    )


def qmul_array(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Broadcasting Hamilton product on arrays of shape (..., 4)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )
