"""Parameterized surfaces in S^3 and their geodesic normal offsets.

All four families share the form::

    p(theta, phi) = (cos t cos f, cos t sin f, sin t cos(r f), sin t sin(r f))

with rate ``r`` equal to 1 (Clifford torus), 2 (Sudanese Moebius strip and
Klein bottle) or ``num/den`` (torus-knot band).  Evaluation functions accept
scalars or broadcastable arrays and return arrays with a trailing axis of 4.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateTangent, OutOfDomain
from .quat import Quaternion, UnitQuaternion, q_mul

TWO_PI = 2.0 * math.pi
DOMAIN_TOL = 1e-12


class SurfaceKind(str, enum.Enum):
    CLIFFORD_TORUS = "CliffordTorus"
    SUDANESE_MOBIUS = "SudaneseMobius"
    KLEIN_BOTTLE = "KleinBottle"
    TORUS_KNOT_BAND = "TorusKnotBand"


class NormalMode(str, enum.Enum):
    CRAMER = "Cramer"
    KNOT_ALTERNATIVE = "KnotAlternative"


@dataclass(frozen=True)
class SurfaceSpec:
    kind: SurfaceKind
    num: int = 3
    den: int = 2
    theta0: float = math.pi / 4.0
    half_width: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "kind", SurfaceKind(self.kind))
        if self.kind is SurfaceKind.TORUS_KNOT_BAND:
            if self.den <= 0 or self.num <= 0:
                raise ValueError("knot fraction must be positive")
            if math.gcd(self.num, self.den) != 1:
                raise ValueError(f"gcd({self.num}, {self.den}) != 1")
            lo, hi = self.theta0 - self.half_width, self.theta0 + self.half_width
            if not (self.half_width > 0 and 0.0 < lo and hi < math.pi / 2.0):
                raise ValueError("knot band must satisfy 0 < theta0 - w and theta0 + w < pi/2")

    @property
    def rate(self) -> float:
        return {
            SurfaceKind.CLIFFORD_TORUS: 1.0,
            SurfaceKind.SUDANESE_MOBIUS: 2.0,
            SurfaceKind.KLEIN_BOTTLE: 2.0,
        }.get(self.kind, self.num / self.den)

    @property
    def domain(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """``((theta_lo, theta_hi), (phi_lo, phi_hi))``."""
        if self.kind is SurfaceKind.CLIFFORD_TORUS:
            return (0.0, TWO_PI), (0.0, math.pi)
        if self.kind is SurfaceKind.SUDANESE_MOBIUS:
            return (0.0, math.pi), (0.0, math.pi)
        if self.kind is SurfaceKind.KLEIN_BOTTLE:
            return (0.0, TWO_PI), (0.0, math.pi)
        w = self.half_width
        return (self.theta0 - w, self.theta0 + w), (0.0, TWO_PI * self.den)

    @property
    def theta_periodic(self) -> bool:
        return self.kind in (SurfaceKind.CLIFFORD_TORUS, SurfaceKind.KLEIN_BOTTLE)

    @property
    def phi_period(self) -> float:
        return self.domain[1][1]

    def glue_theta(self, theta):
        """Where the ``phi = phi_hi`` edge point ``theta`` reappears on ``phi = 0``."""
        theta = np.asarray(theta, dtype=float)
        if self.kind is SurfaceKind.CLIFFORD_TORUS:
            return np.mod(theta + math.pi, TWO_PI)
        if self.kind is SurfaceKind.SUDANESE_MOBIUS:
            return math.pi - theta
        if self.kind is SurfaceKind.KLEIN_BOTTLE:
            return np.mod(math.pi - theta, TWO_PI)
        return theta

    def equivalents(self, theta: float, phi: float) -> list[tuple[float, float]]:
        """Parameter pairs naming the same surface point, near the domain."""
        reps = [(theta, phi)]
        Phi = self.phi_period
        g = float(self.glue_theta(theta))
        reps += [(g, phi - Phi), (g, phi + Phi)]
        if self.theta_periodic:
            reps = [(t + k * TWO_PI, f) for t, f in reps for k in (-1, 0, 1)]
        return reps


def _check_domain(spec: SurfaceSpec, theta, phi):
    (tlo, thi), (flo, fhi) = spec.domain
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(theta < tlo - DOMAIN_TOL) or np.any(theta > thi + DOMAIN_TOL):
        raise OutOfDomain(f"theta outside [{tlo}, {thi}]")
    if np.any(phi < flo - DOMAIN_TOL) or np.any(phi > fhi + DOMAIN_TOL):
        raise OutOfDomain(f"phi outside [{flo}, {fhi}]")
    return np.broadcast_arrays(theta, phi)


def eval_p(spec: SurfaceSpec, theta, phi) -> np.ndarray:
    t, f = _check_domain(spec, theta, phi)
    r = spec.rate
    ct, st = np.cos(t), np.sin(t)
    return np.stack([ct * np.cos(f), ct * np.sin(f), st * np.cos(r * f), st * np.sin(r * f)], axis=-1)


def eval_partials(spec: SurfaceSpec, theta, phi) -> tuple[np.ndarray, np.ndarray]:
    """Analytic ``(dp/dtheta, dp/dphi)``."""
    t, f = _check_domain(spec, theta, phi)
    r = spec.rate
    ct, st = np.cos(t), np.sin(t)
    cf, sf = np.cos(f), np.sin(f)
    crf, srf = np.cos(r * f), np.sin(r * f)
    d_theta = np.stack([-st * cf, -st * sf, ct * crf, ct * srf], axis=-1)
    d_phi = np.stack([-ct * sf, ct * cf, -r * st * srf, r * st * crf], axis=-1)
    return d_theta, d_phi


def _cofactor_row(rows: np.ndarray) -> np.ndarray:
    """Expand det([rows; (1, i, j, k)]) along the symbolic last row.

    ``rows`` has shape (..., 3, 4); the result is the 4-vector of signed
    3x3 minors.
    """
    out = []
    for col in range(4):
        keep = [c for c in range(4) if c != col]
        minor = np.linalg.det(rows[..., keep])
        out.append((-1.0) ** (3 + col) * minor)
    return np.stack(out, axis=-1)


def _closed_form_normal(spec: SurfaceSpec, theta, phi) -> np.ndarray:
    # used only to pin the determinant's overall sign at one reference point
    r = spec.rate
    ct, st = np.cos(theta), np.sin(theta)
    v = np.array([-r * st * np.sin(phi), r * st * np.cos(phi), ct * np.sin(r * phi), -ct * np.cos(r * phi)])
    return v / np.linalg.norm(v)


def _reference_point(spec: SurfaceSpec) -> tuple[float, float]:
    if spec.kind is SurfaceKind.TORUS_KNOT_BAND:
        return spec.theta0, math.pi / 4.0
    return math.pi / 4.0, math.pi / 4.0


_SIGN_CACHE: dict = {}


def _cramer_sign(spec: SurfaceSpec) -> float:
    key = (spec.kind, spec.rate)
    if key not in _SIGN_CACHE:
        t, f = _reference_point(spec)
        raw = _cramer_raw(spec, t, f)
        _SIGN_CACHE[key] = 1.0 if raw @ _closed_form_normal(spec, t, f) > 0 else -1.0
    return _SIGN_CACHE[key]


def _cramer_raw(spec: SurfaceSpec, theta, phi) -> np.ndarray:
    p = eval_p(spec, theta, phi)
    dt, dp = eval_partials(spec, theta, phi)
    return _cofactor_row(np.stack([p, dt, dp], axis=-2))


def normal_cramer(spec: SurfaceSpec, theta, phi) -> np.ndarray:
    """Unit normal as the formal determinant with last row ``(1, i, j, k)``."""
    raw = _cramer_raw(spec, theta, phi) * _cramer_sign(spec)
    norm = np.linalg.norm(raw, axis=-1)
    if np.any(norm < 1e-10):
        raise DegenerateTangent("p, dp/dtheta, dp/dphi are linearly dependent")
    return raw / norm[..., None]


def knot_alt_normal(spec: SurfaceSpec, theta, phi) -> np.ndarray:
    """The sheared unit vector used in place of the true normal on knot bands."""
    if spec.kind is not SurfaceKind.TORUS_KNOT_BAND:
        raise ValueError("the alternative normal is defined for torus-knot bands only")
    t, f = _check_domain(spec, theta, phi)
    r = spec.rate
    ct, st = np.cos(t), np.sin(t)
    return np.stack([-st * np.sin(f), st * np.cos(f), ct * np.sin(r * f), -ct * np.cos(r * f)], axis=-1)


def normal(spec: SurfaceSpec, theta, phi, mode=NormalMode.CRAMER) -> np.ndarray:
    if NormalMode(mode) is NormalMode.KNOT_ALTERNATIVE:
        return knot_alt_normal(spec, theta, phi)
    return normal_cramer(spec, theta, phi)


def offset_r(spec: SurfaceSpec, theta, phi, psi, normal_mode=NormalMode.CRAMER) -> np.ndarray:
    """Point at geodesic distance ``|psi|`` from ``p`` along the normal."""
    psi = np.asarray(psi, dtype=float)
    if np.any(np.abs(psi) > math.pi / 2.0 + 1e-15):
        raise OutOfDomain("|psi| must not exceed pi/2")
    p = eval_p(spec, theta, phi)
    n = normal(spec, theta, phi, normal_mode)
    return np.cos(psi)[..., None] * p + np.sin(psi)[..., None] * n


# Clifford torus in the product parameterization, moved to meet 1 in S^3.

TORUS_MOVER = UnitQuaternion(1.0 / math.sqrt(2.0), 0.0, -1.0 / math.sqrt(2.0), 0.0)


def clifford_alpha_beta(alpha: float, beta: float) -> Quaternion:
    """``(e^{i alpha} + e^{i beta} j) / sqrt(2)`` as a quaternion."""
    s = 1.0 / math.sqrt(2.0)
    return Quaternion(s * math.cos(alpha), s * math.sin(alpha), s * math.cos(beta), s * math.sin(beta))


def clifford_moved(alpha: float, beta: float) -> Quaternion:
    """The product torus right-multiplied by ``(1 - j)/sqrt(2)``."""
    return q_mul(clifford_alpha_beta(alpha, beta), TORUS_MOVER)


def clifford_moved_closed_form(alpha: float, beta: float) -> Quaternion:
    """``(e^{ia} + e^{ib} + (e^{ib} - e^{ia}) j) / 2`` expanded into components."""
    ca, sa, cb, sb = math.cos(alpha), math.sin(alpha), math.cos(beta), math.sin(beta)
    return Quaternion(0.5 * (ca + cb), 0.5 * (sa + sb), 0.5 * (cb - ca), 0.5 * (sb - sa))


def moved_to_theta_phi_form(x) -> np.ndarray:
    """Coordinate permutation with one sign change taking e^{i t} e^{-k f} to e^{i f} e^{j t}."""
    x = np.asarray(x.as_array() if isinstance(x, Quaternion) else x, dtype=float)
    return np.array([x[..., 0], -x[..., 3], x[..., 1], x[..., 2]]).T
