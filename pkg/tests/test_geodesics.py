import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from s3geom import geodesics as geo
from s3geom import s3core
from strategies import angles, curvatures, unit_quaternions
from tests_support import closure_length_brute_force


def integrate_geodesic_ode(p, v, lam, s_end):
    """Numerical solution of gamma'' = -gamma - 2 lam i.gamma', independent of the closed form."""
    def rhs(_, y):
        g, dg = y[:4], y[4:]
        return np.concatenate([dg, -g - 2 * lam * s3core.left_i(dg)])

    sol = solve_ivp(rhs, (0, s_end), np.concatenate([p, v]), method="DOP853",
                    rtol=1e-12, atol=1e-13, dense_output=True)
    return sol.sol


@given(unit_quaternions(), angles, curvatures)
def test_closed_form_matches_numerical_ode(p, theta, lam):
    spec = geo.GeodesicSpec.from_angle(p, theta, lam)
    s = np.linspace(0, 6, 13)
    ref = integrate_geodesic_ode(spec.p, spec.v, lam, 6.0)(s).T
    assert np.abs(geo.geodesic_point(spec, s) - ref[:, :4]).max() < 1e-8
    assert np.abs(geo.geodesic_velocity(spec, s) - ref[:, 4:]).max() < 1e-8


def test_residual_and_constraints_on_random_batch(rng):
    p = s3core.random_points(rng, 1000)
    v = s3core.random_horizontal(rng, p)
    spec = geo.GeodesicSpec(p, v, rng.uniform(-3, 3, 1000))
    s = rng.uniform(-20, 20, 1000)
    g, dg = geo.sample(spec, s)
    assert np.abs(geo.geodesic_ode_residual(spec, s)).max() < 1e-9
    assert np.abs(s3core.norm(g) - 1).max() < 1e-12
    assert np.abs(s3core.norm(dg) - 1).max() < 1e-10
    assert np.abs(s3core.inner(dg, s3core.vertical(g))).max() < 1e-10


def test_derivatives_agree_with_finite_differences():
    spec = geo.GeodesicSpec.from_angle(s3core.IDENTITY, 0.4, 0.8)
    s, h = 1.3, 1e-4
    fd1 = (geo.geodesic_point(spec, s + h) - geo.geodesic_point(spec, s - h)) / (2 * h)
    fd2 = (geo.geodesic_point(spec, s + h) - 2 * geo.geodesic_point(spec, s)
           + geo.geodesic_point(spec, s - h)) / h**2
    assert np.allclose(geo.geodesic_velocity(spec, s), fd1, atol=1e-7)
    assert np.allclose(geo.geodesic_acceleration(spec, s), fd2, atol=1e-6)


def test_spec_validation():
    with pytest.raises(ValueError):
        geo.GeodesicSpec(s3core.IDENTITY, s3core.QUAT_I, 0.0)  # vertical velocity
    with pytest.raises(ValueError):
        geo.GeodesicSpec(2 * s3core.IDENTITY, s3core.QUAT_J, 0.0)
    with pytest.raises(ValueError):
        geo.GeodesicSpec(s3core.IDENTITY, s3core.QUAT_J, math.nan)


@pytest.mark.parametrize("lam", [-2.0, -0.7, 0.0, 0.5, 3.0])
def test_hopf_image_is_circle_with_curvature_lambda(lam):
    spec = geo.GeodesicSpec.from_angle(s3core.IDENTITY, 0.4, lam)
    fit = geo.hopf_curvature_check(spec)
    assert fit.planarity < 1e-8
    assert abs(fit.curvature - lam) < 1e-6
    # magnitude from the circle itself: the image runs at constant speed, so the
    # mean over one turn is its centre d n, and |kappa| = d / sqrt(1 - d^2)
    eta = math.sqrt(1 + lam * lam)
    pts = s3core.hopf(geo.geodesic_point(spec, np.linspace(0, math.pi / eta, 4000, endpoint=False)))
    d = np.linalg.norm(pts.mean(axis=0))
    assert abs(abs(lam) - d / math.sqrt(1 - d * d)) < 1e-9


@pytest.mark.parametrize("P,Q", [(0, 1), (1, 2), (1, 3), (2, 5), (-1, 2), (3, 4)])
def test_period_formula_against_brute_force(P, Q):
    r = P / Q
    lam = r / math.sqrt(1 - r * r)
    got = geo.period_from_fraction(lam, Fraction(P, Q))
    spec = geo.GeodesicSpec.from_angle(s3core.IDENTITY, 0.2, lam)
    want = closure_length_brute_force(spec, got * 1.02)
    assert want is not None and abs(got - want) < 1e-9
    assert abs(geo.geodesic_period(lam, theta=0.2) - got) < 1e-9


@given(st.floats(-3, 3))
def test_classification_is_closed_iff_ratio_rational(lam):
    cls = geo.classify_geodesic(lam)
    from s3geom.config import DEFAULT
    rational = DEFAULT.rationality.approximate(lam / math.sqrt(1 + lam * lam)) is not None
    assert (cls.kind is geo.GeodesicKind.CLOSED) == rational
    assert abs(cls.rho**2 - (1 + cls.ratio) / 2) < 1e-15


def test_classification_examples():
    assert geo.classify_geodesic(0.0).period == pytest.approx(2 * math.pi, abs=1e-12)
    c = geo.classify_geodesic(1 / math.sqrt(3))
    assert c.fraction == Fraction(1, 2)
    assert geo.classify_geodesic(1.0).kind is geo.GeodesicKind.DENSE
    assert geo.classify_geodesic(1.0, max_denominator=1000, rationality_tol=1e-3).kind is geo.GeodesicKind.CLOSED
    with pytest.raises(ValueError):
        geo.classify_geodesic(math.inf)


def test_geodesic_period_raises_when_not_closed():
    with pytest.raises(geo.NotClosedError):
        geo.geodesic_period(1.0, length_cap=200.0)


@given(st.floats(0.05, 0.95))
def test_torus_geodesics_are_confined(rho):
    spec = geo.torus_geodesic(rho)
    pts = geo.geodesic_point(spec, np.linspace(0, 100, 2001))
    assert np.abs(np.hypot(pts[:, 0], pts[:, 1]) - rho).max() < 1e-12
    assert abs(geo.torus_radius(geo.torus_curvature(rho)) - rho) < 1e-12


@given(curvatures, angles)
def test_torus_translation_carries_geodesic_onto_torus(lam, theta):
    spec = geo.GeodesicSpec.from_angle(s3core.IDENTITY, theta, lam)
    q = geo.torus_translation(lam, theta)
    pts = s3core.right_translate(q, geo.geodesic_point(spec, np.linspace(0, 30, 301)))
    assert np.abs(np.hypot(pts[:, 0], pts[:, 1]) - geo.torus_radius(lam)).max() < 1e-12


@pytest.mark.parametrize("lam", [0.0, 1.0, -1.5])
def test_jacobi_field_of_rotation_family(lam):
    spec = geo.GeodesicSpec.from_angle(s3core.IDENTITY, 0.3, lam)
    s = np.linspace(0, 6, 61)
    J = geo.jacobi_field(spec, s, geo.rotation_family(s3core.IDENTITY, 0.3, lam))
    eta = math.sqrt(1 + lam * lam)
    ref = np.sin(eta * s) ** 2 / eta**2
    assert np.abs(J.components[:, 2] - ref).max() < 1e-6
    assert np.abs(J.components[:, 0] + lam * ref).max() < 1e-6
    assert np.ptp(J.conserved) < 1e-6


def test_jacobi_rejects_mixed_curvature_family():
    spec = geo.GeodesicSpec.from_angle(s3core.IDENTITY, 0.0, 0.5)
    with pytest.raises(ValueError):
        geo.jacobi_field(spec, [0.0, 1.0], lambda e: geo.GeodesicSpec.from_angle(s3core.IDENTITY, 0.0, 0.5 + e))
