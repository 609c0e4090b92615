"""Carnot-Caratheodory geodesics of the 3-sphere.

A geodesic of curvature ``lam`` is an arc-length horizontal curve solving
``gamma'' + gamma + 2 lam (i . gamma') = 0``.  The solution through ``p``
with velocity ``v`` is

    gamma(s) = exp(i a s) . A + exp(i b s) . B,

with ``eta = sqrt(1 + lam^2)``, ``a = eta - lam`` and ``b = -(eta + lam)``.
That form gives every derivative in closed form; the trigonometric
expansion in :func:`geodesic_point` is the evaluation used for positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from . import s3core
from .config import DEFAULT, RationalityPolicy
from .s3core import apply_J, inner, left_i, vertical


class NotClosedError(ValueError):
    """No closure found below the configured length cap."""


class DegenerateFitError(ValueError):
    pass


@dataclass(frozen=True)
class GeodesicSpec:
    """Initial point, unit horizontal velocity and curvature.

    ``p`` and ``v`` may carry leading batch axes; ``lam`` broadcasts against
    them.  Validation happens on construction.
    """

    p: np.ndarray
    v: np.ndarray
    lam: float | np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        v = np.asarray(self.v, dtype=float)
        lam = np.asarray(self.lam, dtype=float)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "lam", float(lam) if lam.ndim == 0 else lam)
        if not np.all(np.isfinite(lam)):
            raise ValueError("curvature must be finite")
        if np.max(np.abs(s3core.norm(p) - 1.0)) > 1e-10:
            raise ValueError("p must be a unit quaternion")
        if np.max(np.abs(s3core.norm(v) - 1.0)) > 1e-10:
            raise ValueError("v must have unit length")
        if np.max(np.abs(inner(v, p))) > 1e-10 or np.max(np.abs(inner(v, vertical(p)))) > 1e-10:
            raise ValueError("v must be tangent and horizontal at p")

    @classmethod
    def from_angle(cls, p, theta: float, lam: float) -> "GeodesicSpec":
        """Velocity ``cos(theta) E1(p) + sin(theta) E2(p)``."""
        p = np.asarray(p, dtype=float)
        th = np.asarray(theta, dtype=float)[..., None]
        v = np.cos(th) * s3core.e1_field(p) + np.sin(th) * s3core.e2_field(p)
        return cls(p, v, lam)

    @property
    def eta(self):
        return np.sqrt(1.0 + np.asarray(self.lam) ** 2)


def _coeffs(spec: GeodesicSpec):
    lam = np.asarray(spec.lam, dtype=float)
    eta = np.sqrt(1.0 + lam**2)
    a = eta - lam
    b = -(lam + eta)
    iv = left_i(spec.v)
    A = (-iv - b[..., None] * spec.p) / (2 * eta[..., None])
    B = (a[..., None] * spec.p + iv) / (2 * eta[..., None])
    return a, b, A, B


def geodesic_point(spec: GeodesicSpec, s) -> np.ndarray:
    """Point ``gamma(s)`` from the trigonometric closed form."""
    lam = np.asarray(spec.lam, dtype=float)[..., None]
    eta = np.sqrt(1.0 + lam**2)
    s = np.asarray(s, dtype=float)[..., None]
    p, v = spec.p, spec.v
    Vp = vertical(p)
    Jv = apply_J(v, p)
    cl, sl = np.cos(lam * s), np.sin(lam * s)
    ce, se = np.cos(eta * s), np.sin(eta * s)
    return (
        cl * ce * p
        + (sl * se / eta) * (lam * p - Jv)
        - sl * ce * Vp
        + (cl * se / eta) * (lam * Vp + v)
    )


def geodesic_derivative(spec: GeodesicSpec, s, order: int) -> np.ndarray:
    """``order``-th derivative in ``s`` (order 0 is the point itself)."""
    a, b, A, B = _coeffs(spec)
    s = np.asarray(s, dtype=float)
    # (i c)^k . x  =  c^k . i^k x, with i^k cycling through 1, i, -1, -i
    def power_term(c, X, phase):
        c = np.asarray(c)[..., None]
        X = (c**order) * X
        for _ in range(order % 4):
            X = left_i(X)
        return s3core.exp_i(phase, X)

    return power_term(a, A, a * s) + power_term(b, B, b * s)


def geodesic_velocity(spec: GeodesicSpec, s) -> np.ndarray:
    return geodesic_derivative(spec, s, 1)


def geodesic_acceleration(spec: GeodesicSpec, s) -> np.ndarray:
    return geodesic_derivative(spec, s, 2)


def geodesic_ode_residual(spec: GeodesicSpec, s) -> np.ndarray:
    """``|gamma'' + gamma + 2 lam i.gamma'|`` from analytic derivatives."""
    lam = np.asarray(spec.lam, dtype=float)[..., None]
    g = geodesic_point(spec, s)
    dg = geodesic_velocity(spec, s)
    ddg = geodesic_acceleration(spec, s)
    return s3core.norm(ddg + g + 2 * lam * left_i(dg))


def sample(spec: GeodesicSpec, s):
    """Positions and velocities at an array of arc lengths."""
    return geodesic_point(spec, s), geodesic_velocity(spec, s)


# --- closed / dense classification ----------------------------------------


class GeodesicKind(str, Enum):
    CLOSED = "Closed"
    DENSE = "Dense"


@dataclass(frozen=True)
class GeodesicClass:
    kind: GeodesicKind
    ratio: float
    rho: float
    slope: float
    period: float | None = None
    fraction: Fraction | None = None


def curvature_ratio(lam: float) -> float:
    return lam / math.sqrt(1.0 + lam * lam)


def torus_radius(lam: float) -> float:
    """Radius ``rho`` of the Clifford torus carrying the geodesic."""
    return math.sqrt((1.0 + curvature_ratio(lam)) / 2.0)


def classify_geodesic(
    lam: float,
    rationality_tol: float | None = None,
    max_denominator: int | None = None,
) -> GeodesicClass:
    if not math.isfinite(lam):
        raise ValueError("curvature must be finite")
    policy = RationalityPolicy(
        tol=DEFAULT.rationality.tol if rationality_tol is None else rationality_tol,
        max_denominator=DEFAULT.rationality.max_denominator if max_denominator is None else max_denominator,
    )
    r = curvature_ratio(lam)
    rho = math.sqrt((1.0 + r) / 2.0)
    slope = (r + 1.0) / (r - 1.0)
    frac = policy.approximate(r)
    if frac is None:
        return GeodesicClass(GeodesicKind.DENSE, r, rho, slope)
    return GeodesicClass(GeodesicKind.CLOSED, r, rho, slope, period_from_fraction(lam, frac), frac)


def period_from_fraction(lam: float, frac: Fraction) -> float:
    """Exact period for ratio ``P/Q``: ``2 pi Q / (eta gcd(Q-P, Q+P))``."""
    P, Q = frac.numerator, frac.denominator
    g = math.gcd(Q - P, Q + P)
    return 2.0 * math.pi * Q / (math.sqrt(1.0 + lam * lam) * g)


def geodesic_period(
    lam: float,
    p=s3core.IDENTITY,
    theta: float = 0.0,
    tol: float = DEFAULT.tolerances.closure,
    length_cap: float | None = None,
) -> float:
    """Smallest ``L > 0`` where position and velocity both return.

    Candidates are the multiples of ``2 pi / a`` where the slow frequency
    completes whole turns; each is kept only if the fast frequency also
    completes whole turns and the closed form confirms the return.
    """
    if length_cap is None:
        length_cap = DEFAULT.tolerances.closure_length_cap_over_pi * math.pi
    spec = GeodesicSpec.from_angle(p, theta, lam)
    eta = math.sqrt(1.0 + lam * lam)
    a, b = eta - lam, -(eta + lam)
    g0, v0 = geodesic_point(spec, 0.0), geodesic_velocity(spec, 0.0)
    k_max = int(length_cap * abs(a) / (2 * math.pi))
    for k in range(1, k_max + 1):
        L = 2 * math.pi * k / abs(a)
        turns = b * L / (2 * math.pi)
        if abs(turns - round(turns)) > 1e-7:
            continue
        dg = np.linalg.norm(geodesic_point(spec, L) - g0)
        dv = np.linalg.norm(geodesic_velocity(spec, L) - v0)
        if dg < tol and dv < tol:
            return L
    raise NotClosedError(f"no closure below length {length_cap:.6g} for curvature {lam!r}")


def torus_curvature(rho: float) -> float:
    """Curvature of the horizontal geodesics ruling the Clifford torus ``T_rho``."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    return (2 * rho**2 - 1) / (2 * rho * math.sqrt(1 - rho**2))


def torus_chart(rho: float, x, y) -> np.ndarray:
    """Flat chart ``(rho e^{2 pi i x}, sqrt(1-rho^2) e^{2 pi i y})`` of ``T_rho``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = math.sqrt(1 - rho**2)
    return np.stack(
        [rho * np.cos(2 * np.pi * x), rho * np.sin(2 * np.pi * x),
         c * np.cos(2 * np.pi * y), c * np.sin(2 * np.pi * y)],
        axis=-1,
    )


def torus_horizontal_direction(q) -> np.ndarray:
    """Unit horizontal direction tangent to the Clifford torus through ``q``.

    In complex notation ``(i alpha z1, -i z2 / alpha)`` with
    ``alpha = |z2| / |z1|``.
    """
    q = np.asarray(q, dtype=float)
    r1 = np.hypot(q[..., 0], q[..., 1])
    r2 = np.hypot(q[..., 2], q[..., 3])
    alpha = (r2 / r1)[..., None]
    iq = left_i(q)
    return np.concatenate([alpha * iq[..., :2], -iq[..., 2:] / alpha], axis=-1)


def torus_geodesic(rho: float, point=None) -> GeodesicSpec:
    """Geodesic confined to ``T_rho``, launched from ``point`` (default ``(rho, 0, sqrt(1-rho^2), 0)``)."""
    if point is None:
        point = torus_chart(rho, 0.0, 0.0)
    return GeodesicSpec(point, torus_horizontal_direction(point), torus_curvature(rho))


def torus_translation(lam: float, theta: float = 0.0) -> np.ndarray:
    """Quaternion ``q`` with ``R_q(gamma)`` inside ``T_rho``.

    Here gamma starts at ``(1,0,0,0)`` with velocity
    ``cos(theta) E1 + sin(theta) E2``.
    """
    rho = torus_radius(lam)
    c = math.sqrt(1 - rho**2)
    return np.array([rho, 0.0, -c * math.sin(theta), c * math.cos(theta)])


# --- Jacobi fields ---------------------------------------------------------


@dataclass(frozen=True)
class JacobiSample:
    s: np.ndarray
    X: np.ndarray
    components: np.ndarray  # (<X, gamma'>, <X, J gamma'>, <X, V>) on the last axis
    lam: float = 0.0

    @property
    def conserved(self) -> np.ndarray:
        """``lam <X,V> + <X,gamma'>``, constant along the geodesic."""
        return self.lam * self.components[..., 2] + self.components[..., 0]


def jacobi_field(
    spec: GeodesicSpec,
    s,
    family: Callable[[float], GeodesicSpec],
    step: float = 1e-5,
) -> JacobiSample:
    """Variation field ``d/de gamma_e(s)`` at ``e = 0`` by central differences."""
    plus, minus = family(step), family(-step)
    for member in (plus, minus):
        if np.max(np.abs(np.asarray(member.lam) - np.asarray(spec.lam))) > 1e-12:
            raise ValueError("family members must share the curvature of the base geodesic")
    s = np.asarray(s, dtype=float)
    X = (geodesic_point(plus, s) - geodesic_point(minus, s)) / (2 * step)
    g = geodesic_point(spec, s)
    dg = geodesic_velocity(spec, s)
    comps = np.stack(
        [inner(X, dg), inner(X, apply_J(dg, g)), inner(X, vertical(g))],
        axis=-1,
    )
    return JacobiSample(s, X, comps, float(spec.lam))


def rotation_family(p, theta0: float, lam: float) -> Callable[[float], GeodesicSpec]:
    """Geodesics from ``p`` with velocity angle ``theta0 + e``."""
    return lambda e: GeodesicSpec.from_angle(p, theta0 + e, lam)


# --- Hopf image ------------------------------------------------------------


class HopfCircleFit(NamedTuple):
    planarity: float
    curvature: float
    normal: np.ndarray
    offset: float
    singular_values: np.ndarray
    curvature_condition: float


def hopf_curvature_check(spec: GeodesicSpec, n_samples: int = 2000) -> HopfCircleFit:
    """Fit a plane to the Hopf image and read off its geodesic curvature in S^2.

    The samples cover one full turn of the image circle, so the centroid is
    the centre of the circle.  Curvature uses the same sign convention as in
    the 3-sphere: ``kappa = -<c'', c x c'>`` for unit speed, so that the image
    of a curvature-``lam`` geodesic has curvature ``lam``.  With the plane
    normal ``n`` oriented so the circle runs clockwise about it, the circle
    ``<n, x> = d`` then has ``kappa = d / sqrt(1 - d^2)``.
    """
    if n_samples < 8:
        raise ValueError("need at least 8 samples")
    eta = math.sqrt(1.0 + spec.lam**2)
    s = np.linspace(0.0, math.pi / eta, n_samples, endpoint=False)
    pts = s3core.hopf(geodesic_point(spec, s))
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    n = vt[-1]
    swept = np.cross(centered, np.roll(centered, -1, axis=0)).sum(axis=0)
    if np.dot(swept, n) > 0:
        n = -n
    if sv[1] < 1e-9 * max(sv[0], 1e-300):
        raise DegenerateFitError(
            f"Hopf image is numerically a point or segment (singular values {sv})"
        )
    d = float(np.dot(n, centroid))
    planarity = float(np.max(np.abs(pts @ n - d)))
    one_minus = 1.0 - d * d
    if one_minus <= 0:
        raise DegenerateFitError("fitted plane does not cut the sphere in a circle")
    return HopfCircleFit(
        planarity=planarity,
        curvature=d / math.sqrt(one_minus),
        normal=n,
        offset=d,
        singular_values=sv,
        curvature_condition=1.0 / one_minus,
    )
