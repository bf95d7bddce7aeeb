import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from s3forge.errors import NotUnit, ZeroQuaternion
from s3forge.quat import (
    I,
    J,
    K,
    ONE,
    Quaternion,
    UnitQuaternion,
    left_isometry,
    left_matrix,
    mover,
    mover_right,
    q_conj,
    q_inv,
    q_mul,
    qmul_array,
    right_isometry,
    right_matrix,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quats = st.builds(Quaternion, finite, finite, finite, finite)


def as_complex2(q):
    # oracle: a + bi + cj + dk  <->  [[a + bi, c + di], [-c + di, a - bi]]
    a, b, c, d = q.as_array()
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def unit(q):
    return UnitQuaternion.normalized(q)


def test_basis_relations():
    for x in (I, J, K):
        assert q_mul(x, x).isclose(-ONE)
    assert q_mul(I, J).isclose(K)
    assert q_mul(J, K).isclose(I)
    assert q_mul(K, I).isclose(J)
    assert q_mul(J, I).isclose(-K)
    ijk = q_mul(q_mul(I, J), K)
    assert ijk.isclose(-ONE)


@settings(max_examples=200, deadline=None)
@given(quats, quats)
def test_product_matches_matrix_oracle(p, q):
    got = as_complex2(q_mul(p, q))
    want = as_complex2(p) @ as_complex2(q)
    assert np.allclose(got, want, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(quats, quats, quats)
def test_associative(p, q, r):
    lhs = q_mul(q_mul(p, q), r).as_array()
    rhs = q_mul(p, q_mul(q, r)).as_array()
    assert np.allclose(lhs, rhs, atol=1e-8 * (1 + np.abs(lhs).max()))


@settings(max_examples=100, deadline=None)
@given(quats, quats)
def test_norm_is_multiplicative(p, q):
    assert math.isclose(q_mul(p, q).norm(), p.norm() * q.norm(), rel_tol=1e-12, abs_tol=1e-12)


def test_unit_tolerance():
    UnitQuaternion(1.0 + 4e-13, 0, 0, 0)
    with pytest.raises(NotUnit):
        UnitQuaternion(1.0 + 1e-11, 0, 0, 0)
    with pytest.raises(ValueError):
        Quaternion(float("nan"))


def test_inverse_and_zero():
    q = Quaternion(1.0, 2.0, -3.0, 0.5)
    assert q_mul(q, q_inv(q)).isclose(ONE)
    assert q_mul(q_inv(q), q).isclose(ONE)
    with pytest.raises(ZeroQuaternion):
        q_inv(Quaternion(0.0))
    with pytest.raises(ZeroQuaternion):
        UnitQuaternion.normalized([0, 0, 0, 0])
    u = unit([1, 1, 0, 0])
    assert q_inv(u).isclose(q_conj(u))


def test_isometries_preserve_distance(rng):
    for _ in range(50):
        q, x, y = (unit(v) for v in rng.normal(size=(3, 4)))
        d = np.linalg.norm(x.as_array() - y.as_array())
        for op in (left_isometry, right_isometry):
            d2 = np.linalg.norm(op(q, x).as_array() - op(q, y).as_array())
            assert abs(d - d2) < 1e-12
    with pytest.raises(NotUnit):
        left_isometry(Quaternion(2.0), ONE)


def test_movers(rng):
    for _ in range(50):
        a, b = (unit(v) for v in rng.normal(size=(2, 4)))
        assert left_isometry(mover(a, b), a).isclose(b)
        assert right_isometry(mover_right(a, b), a).isclose(b)


def test_matrices_agree_with_product(rng):
    for _ in range(20):
        q, x = (Quaternion.from_array(v) for v in rng.normal(size=(2, 4)))
        assert np.allclose(left_matrix(q) @ x.as_array(), q_mul(q, x).as_array())
        assert np.allclose(right_matrix(q) @ x.as_array(), q_mul(x, q).as_array())
    p = rng.normal(size=(7, 4))
    r = rng.normal(size=(7, 4))
    want = np.array([q_mul(Quaternion.from_array(a), Quaternion.from_array(b)).as_array() for a, b in zip(p, r)])
    assert np.allclose(qmul_array(p, r), want)


def test_left_and_right_actions_differ():
    x = unit([1, 2, 3, 4])
    assert not left_isometry(I, x).isclose(right_isometry(I, x))
