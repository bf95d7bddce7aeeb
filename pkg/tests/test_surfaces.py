import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from s3forge.errors import OutOfDomain
from s3forge.quat import q_mul
from s3forge.surfaces import (
    TORUS_MOVER,
    NormalMode,
    SurfaceKind,
    SurfaceSpec,
    clifford_alpha_beta,
    clifford_moved,
    clifford_moved_closed_form,
    eval_p,
    eval_partials,
    knot_alt_normal,
    moved_to_theta_phi_form,
    normal,
    offset_r,
)

TORUS = SurfaceSpec(SurfaceKind.CLIFFORD_TORUS)
MOBIUS = SurfaceSpec(SurfaceKind.SUDANESE_MOBIUS)
KLEIN = SurfaceSpec(SurfaceKind.KLEIN_BOTTLE)
KNOT = SurfaceSpec(SurfaceKind.TORUS_KNOT_BAND, 3, 2, 0.6, 0.2)
ALL = [TORUS, MOBIUS, KLEIN, KNOT]


def grid(spec, n=30):
    (a, b), (c, d) = spec.domain
    t, f = np.meshgrid(np.linspace(a, b, n), np.linspace(c, d, n), indexing="ij")
    return t.ravel(), f.ravel()


def torus_normal_printed(t, f):
    return np.stack([-np.sin(t) * np.sin(f), np.sin(t) * np.cos(f), np.cos(t) * np.sin(f), -np.cos(t) * np.cos(f)], -1)


def mobius_normal_printed(t, f):
    s, c = np.sin(t), np.cos(t)
    v = np.stack([-2 * s * np.sin(f), 2 * s * np.cos(f), c * np.sin(2 * f), -c * np.cos(2 * f)], -1)
    return v / np.sqrt(1 + 3 * s * s)[:, None]


@pytest.mark.parametrize("spec", ALL, ids=lambda s: s.kind.value)
def test_points_on_sphere_and_partials(spec):
    t, f = grid(spec)
    p = eval_p(spec, t, f)
    assert np.allclose(np.linalg.norm(p, axis=1), 1, atol=1e-14)
    dt, dp = eval_partials(spec, t, f)
    assert np.allclose(np.einsum("ij,ij->i", p, dt), 0, atol=1e-14)
    assert np.allclose(np.einsum("ij,ij->i", p, dp), 0, atol=1e-14)
    # interior central differences
    (a, b), (c, d) = spec.domain
    h = 1e-6
    ti = np.clip(t, a + h, b - h)
    fi = np.clip(f, c + h, d - h)
    fd_t = (eval_p(spec, ti + h, fi) - eval_p(spec, ti - h, fi)) / (2 * h)
    fd_f = (eval_p(spec, ti, fi + h) - eval_p(spec, ti, fi - h)) / (2 * h)
    dt, dp = eval_partials(spec, ti, fi)
    assert np.abs(fd_t - dt).max() < 1e-8
    assert np.abs(fd_f - dp).max() < 1e-8


@pytest.mark.parametrize("spec", ALL, ids=lambda s: s.kind.value)
def test_normal_is_unit_and_orthogonal(spec):
    t, f = grid(spec)
    n = normal(spec, t, f)
    p = eval_p(spec, t, f)
    dt, dp = eval_partials(spec, t, f)
    assert np.allclose(np.linalg.norm(n, axis=1), 1, atol=1e-13)
    for v in (p, dt, dp):
        assert np.abs(np.einsum("ij,ij->i", n, v)).max() < 1e-12


def test_normals_match_printed_forms():
    t, f = grid(TORUS, 40)
    assert np.abs(normal(TORUS, t, f) - torus_normal_printed(t, f)).max() < 1e-12
    t, f = grid(MOBIUS, 40)
    assert np.abs(normal(MOBIUS, t, f) - mobius_normal_printed(t, f)).max() < 1e-12


def test_knot_alternative_normal():
    t, f = grid(KNOT)
    alt = knot_alt_normal(KNOT, t, f)
    p = eval_p(KNOT, t, f)
    assert np.allclose(np.linalg.norm(alt, axis=1), 1)
    assert np.abs(np.einsum("ij,ij->i", alt, p)).max() < 1e-14
    assert np.allclose(normal(KNOT, t, f, NormalMode.KNOT_ALTERNATIVE), alt)
    # it is not the true normal once the rate differs from 1
    assert np.abs(np.einsum("ij,ij->i", alt, eval_partials(KNOT, t, f)[1])).max() > 1e-3
    with pytest.raises(ValueError):
        knot_alt_normal(TORUS, 0.1, 0.1)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 2 * math.pi - 1e-9), st.floats(0, math.pi), st.floats(-math.pi / 2, math.pi / 2))
def test_offset_is_on_sphere_at_distance_psi(t, f, psi):
    r = offset_r(TORUS, t, f, psi)
    p = eval_p(TORUS, t, f)
    assert abs(r @ r - 1) < 1e-12
    d = math.atan2(np.linalg.norm(r - (r @ p) * p), r @ p)
    assert abs(d - abs(psi)) < 1e-10


def test_domain_errors():
    with pytest.raises(OutOfDomain):
        eval_p(MOBIUS, 3.5, 0.0)
    with pytest.raises(OutOfDomain):
        eval_p(TORUS, 0.0, -0.1)
    with pytest.raises(OutOfDomain):
        offset_r(TORUS, 0.1, 0.1, 2.0)


def test_knot_band_validation():
    with pytest.raises(ValueError):
        SurfaceSpec(SurfaceKind.TORUS_KNOT_BAND, 4, 2)
    with pytest.raises(ValueError):
        SurfaceSpec(SurfaceKind.TORUS_KNOT_BAND, 3, 2, 0.1, 0.2)
    assert KNOT.domain[1] == (0.0, 4 * math.pi)


@pytest.mark.parametrize("spec", ALL, ids=lambda s: s.kind.value)
def test_glue_identifies_equal_points(spec):
    (a, b), (_, Phi) = spec.domain
    for t in np.linspace(a, b, 9):
        g = float(spec.glue_theta(t))
        assert np.allclose(eval_p(spec, t, Phi), eval_p(spec, g, 0.0), atol=1e-12)


def test_klein_restricts_to_mobius():
    t, f = grid(MOBIUS, 25)
    t = np.clip(t, 0, math.pi - 1e-9)
    assert np.abs(eval_p(KLEIN, t, f) - eval_p(MOBIUS, t, f)).max() < 1e-15


def test_clifford_parameterisations_agree(rng):
    for _ in range(100):
        a, b = rng.uniform(0, 2 * math.pi, 2)
        q = clifford_moved(a, b)
        assert np.allclose(q.as_array(), clifford_moved_closed_form(a, b).as_array(), atol=1e-15)
        assert np.allclose(q.as_array(), q_mul(clifford_alpha_beta(a, b), TORUS_MOVER).as_array())
    # meets the point 1 when alpha = beta = 0
    assert np.allclose(clifford_moved(0, 0).as_array(), [1, 0, 0, 0])
    t, f = rng.uniform(0, 2 * math.pi), rng.uniform(0, math.pi)
    x = moved_to_theta_phi_form(clifford_moved(t + f, t - f))
    assert np.allclose(x, eval_p(TORUS, t, f), atol=1e-14)
