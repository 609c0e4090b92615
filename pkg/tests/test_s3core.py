import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from s3geom import s3core
from strategies import unit_quaternions


def as_complex_matrix(q):
    """2x2 complex representation; an independent route to the Hamilton product."""
    a, b, c, d = q
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


@given(unit_quaternions(), unit_quaternions())
def test_quat_mul_matches_matrix_representation(p, q):
    got = as_complex_matrix(s3core.quat_mul(p, q))
    assert np.allclose(got, as_complex_matrix(p) @ as_complex_matrix(q), atol=1e-14)


@given(unit_quaternions(), unit_quaternions())
def test_product_of_unit_quaternions_is_unit(p, q):
    assert abs(s3core.norm(s3core.quat_mul(p, q)) - 1) < 1e-14


def test_unit_relations():
    i, j, k = s3core.QUAT_I, s3core.QUAT_J, s3core.QUAT_K
    one = s3core.IDENTITY
    assert np.array_equal(s3core.quat_mul(i, j), k)
    assert np.array_equal(s3core.quat_mul(j, k), i)
    assert np.array_equal(s3core.quat_mul(k, i), j)
    for u in (i, j, k):
        assert np.array_equal(s3core.quat_mul(u, u), -one)


@given(unit_quaternions())
def test_left_multiplications_agree_with_product(p):
    assert np.allclose(s3core.left_i(p), s3core.quat_mul(s3core.QUAT_I, p), atol=0)
    assert np.allclose(s3core.left_j(p), s3core.quat_mul(s3core.QUAT_J, p), atol=0)
    assert np.allclose(s3core.left_k(p), s3core.quat_mul(s3core.QUAT_K, p), atol=0)


@given(unit_quaternions())
def test_frame_is_orthonormal_and_tangent(p):
    f = s3core.frame_at(p)
    M = np.stack([f.E1.array, f.E2.array, f.V.array, p])
    assert np.allclose(M @ M.T, np.eye(4), atol=1e-12)


def test_brackets_by_finite_differences(rng):
    p = s3core.random_points(rng, 50)
    cases = [
        (s3core.e1_field, s3core.e2_field, -2 * s3core.vertical(p)),
        (s3core.e1_field, s3core.vertical, 2 * s3core.e2_field(p)),
        (s3core.e2_field, s3core.vertical, -2 * s3core.e1_field(p)),
    ]
    for a, b, want in cases:
        assert np.abs(s3core.lie_bracket_fd(a, b, p) - want).max() < 1e-5


def test_frame_is_right_invariant(rng):
    p = s3core.random_points(rng, 20)
    q = s3core.random_points(rng, 1)[0]
    for field in (s3core.e1_field, s3core.e2_field, s3core.vertical):
        moved = s3core.quat_mul(field(p), q)
        assert np.allclose(moved, field(s3core.right_translate(q, p)), atol=1e-14)


@given(unit_quaternions())
def test_J_rotates_horizontal_and_kills_vertical(p):
    e1, e2, v = s3core.e1_field(p), s3core.e2_field(p), s3core.vertical(p)
    assert np.allclose(s3core.apply_J(e1, p), e2, atol=1e-14)
    assert np.allclose(s3core.apply_J(e2, p), -e1, atol=1e-14)
    assert np.allclose(s3core.apply_J(v, p), 0, atol=1e-14)


@given(unit_quaternions(), st.floats(-10, 10))
def test_hopf_is_unit_and_constant_on_fibres(p, t):
    h = s3core.hopf(p)
    assert abs(np.linalg.norm(h) - 1) < 1e-12
    assert np.allclose(s3core.hopf(s3core.exp_i(t, p)), h, atol=1e-12)


@given(unit_quaternions())
def test_hopf_equals_conjugation_of_i(p):
    w = s3core.quat_mul(s3core.quat_mul(s3core.quat_conj(p), s3core.QUAT_I), p)
    assert abs(w[0]) < 1e-14
    assert np.allclose(w[1:], s3core.hopf(p), atol=1e-14)


@given(unit_quaternions())
def test_stereographic_north_pole_formula(p):
    if 1 - p[3] < 1e-6:
        return
    got = s3core.stereographic(p)
    assert np.allclose(got, p[:3] / (1 - p[3]), rtol=1e-12, atol=1e-12)


def test_stereographic_sends_equator_to_unit_sphere(rng):
    pts = rng.standard_normal((100, 4))
    pts[:, 3] = 0
    pts = s3core.normalize(pts)
    assert np.allclose(np.linalg.norm(s3core.stereographic(pts), axis=1), 1, atol=1e-14)
    assert np.allclose(s3core.stereographic(-s3core.NORTH_POLE), 0)


def test_stereographic_general_pole_is_conformal_sphere_map(rng):
    pole = s3core.normalize(np.array([0.3, -0.2, 0.5, 0.4]))
    pts = s3core.random_points(rng, 200)
    x = s3core.stereographic(pts, pole)
    # inverse map: p = (2x, |x|^2 - 1) / (|x|^2 + 1) in the (complement, pole) basis
    n2 = np.sum(x * x, axis=1)
    B = s3core._complement_basis(pole)
    back = (2 * x @ B + (n2 - 1)[:, None] * pole) / (n2 + 1)[:, None]
    assert np.allclose(back, pts, atol=1e-10)


def test_stereographic_refuses_the_pole():
    with pytest.raises(s3core.PoleError):
        s3core.stereographic(s3core.NORTH_POLE)


def test_wrappers_validate():
    with pytest.raises(ValueError):
        s3core.S3Point(1.0, 1.0, 0.0, 0.0)
    base = s3core.S3Point(1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        s3core.TangentVector(base, 1.0, 0.0, 0.0, 0.0)
    t = s3core.TangentVector(base, 0.0, 0.0, 1.0, 0.0)
    assert np.allclose(t.J().array, [0, 0, 0, 1])
    with pytest.raises(ValueError):
        s3core.inner(np.zeros(3), np.zeros(3))


def test_rotate_theta_is_isometry(rng):
    p = s3core.random_points(rng, 10)
    r = s3core.rotate_theta(0.7, p)
    assert np.allclose(r[:, :2], p[:, :2])
    assert np.allclose(s3core.norm(r), 1)
    assert np.allclose(s3core.rotate_theta(2 * math.pi, p), p)
