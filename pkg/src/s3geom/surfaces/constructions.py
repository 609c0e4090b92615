"""Constant mean curvature surfaces built from geodesics.

* Clifford tori ``T_rho`` (vertical, ruled by horizontal geodesics).
* Spheres ``S_lam``: all curvature-``lam`` geodesics of length ``pi/eta``
  leaving ``(1,0,0,0)``.
* Ruled sheets over a horizontal curve ``Gamma``: orthogonal geodesics cut
  where the variation field turns horizontal again.
* The chains ``C_{mu,lam}`` obtained by repeating the sheet construction
  across each new singular curve with alternating side and curvature sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.spatial import cKDTree

from .. import s3core
from ..config import DEFAULT, RationalityPolicy
from ..geodesics import GeodesicSpec, geodesic_point, geodesic_velocity, hopf_curvature_check
from ..s3core import apply_J, inner, left_i, vertical
from .patch import ParamPatch, SingularCurve


def _eta(lam: float) -> float:
    return math.sqrt(1.0 + lam * lam)


def _arccot(x):
    """Branch of arccot with values in (0, pi)."""
    return np.pi / 2 - np.arctan(x)


# --- Clifford tori -----------------------------------------------------------


def clifford_patch(rho: float, n_u: int, n_v: int) -> ParamPatch:
    """Flat chart ``(rho e^{2 pi i u}, sqrt(1-rho^2) e^{2 pi i v})``, u, v in [0, 1]."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    u = np.linspace(0.0, 1.0, n_u)
    v = np.linspace(0.0, 1.0, n_v)
    U, W = np.meshgrid(u, v, indexing="ij")
    c = math.sqrt(1 - rho**2)
    grid = np.stack(
        [rho * np.cos(2 * np.pi * U), rho * np.sin(2 * np.pi * U),
         c * np.cos(2 * np.pi * W), c * np.sin(2 * np.pi * W)],
        axis=-1,
    )
    alpha = c / rho
    # (alpha z1, -z2/alpha): the unit normal whose characteristic field runs
    # along the torus geodesics of curvature (2 rho^2 - 1)/(2 rho sqrt(1-rho^2))
    ref = np.concatenate([alpha * grid[..., :2], -grid[..., 2:] / alpha], axis=-1)
    return ParamPatch(grid, u, v, {"kind": "clifford", "rho": rho}, orientation=ref)


# --- spheres S_lam -------------------------------------------------------------


def sphere_coordinates(lam: float, theta, s) -> np.ndarray:
    """Euclidean coordinates of ``gamma_theta(s)`` from ``(1,0,0,0)``."""
    eta = _eta(lam)
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    cl, sl = np.cos(lam * s), np.sin(lam * s)
    ce, se = np.cos(eta * s), np.sin(eta * s)
    x1 = cl * ce + (lam / eta) * sl * se
    y1 = -sl * ce + (lam / eta) * cl * se
    x2 = se / eta * np.cos(theta - lam * s)
    y2 = se / eta * np.sin(theta - lam * s)
    x1, y1, x2, y2 = np.broadcast_arrays(x1, y1, x2, y2)
    return np.stack([x1, y1, x2, y2], axis=-1)


def sphere_pole(lam: float) -> np.ndarray:
    """Second pole ``p_lam``, end point of every generating geodesic."""
    eta = _eta(lam)
    p = s3core.IDENTITY
    return -math.cos(lam * math.pi / eta) * p + math.sin(lam * math.pi / eta) * vertical(p)


def sphere_patch(lam: float, n_theta: int, n_s: int) -> ParamPatch:
    if n_theta < 3 or n_s < 3:
        raise ValueError("n_theta and n_s must be >= 3")
    eta = _eta(lam)
    theta = np.linspace(0.0, 2 * np.pi, n_theta)
    s = np.linspace(0.0, np.pi / eta, n_s)
    T, S = np.meshgrid(theta, s, indexing="ij")
    grid = sphere_coordinates(lam, T, S)
    singular = np.zeros(grid.shape[:2], dtype=bool)
    singular[:, 0] = singular[:, -1] = True
    meta = {"kind": "sphere", "lambda": lam, "poles": [s3core.IDENTITY.copy(), sphere_pole(lam)]}
    return ParamPatch(grid, theta, s, meta, orientation="z_along_v", singular=singular)


def sphere_radial_graph(lam: float, r, upper: bool = False):
    """``(x1, y1)`` of ``S_lam`` as a radial graph over the ``x2 y2`` plane."""
    r = np.asarray(r, dtype=float)
    r_lam = 1.0 / _eta(lam)
    root = np.sqrt(np.clip(1 - (r / r_lam) ** 2, 0.0, None))
    phi = r_lam * np.arcsin(np.clip(r / r_lam, -1.0, 1.0))
    if not upper:
        x1 = root * np.cos(lam * phi) + lam * r * np.sin(lam * phi)
        y1 = lam * r * np.cos(lam * phi) - root * np.sin(lam * phi)
    else:
        psi = np.pi * r_lam - phi
        x1 = -root * np.cos(lam * psi) + lam * r * np.sin(lam * psi)
        y1 = lam * r * np.cos(lam * psi) + root * np.sin(lam * psi)
    return x1, y1


# --- horizontal curves and cut functions ---------------------------------------


def cut_function(h, lam: float):
    """Unique ``s`` in ``(0, pi/eta)`` with ``h = 2 eta cot(eta s)``."""
    eta = _eta(lam)
    return _arccot(np.asarray(h, dtype=float) / (2 * eta)) / eta


def reverse_cut(h, lam: float):
    """Cut for the geodesics leaving along ``-J(Gamma')``: ``h = -2 eta cot(eta s)``."""
    eta = _eta(lam)
    return _arccot(-np.asarray(h, dtype=float) / (2 * eta)) / eta


@dataclass(frozen=True)
class HorizontalCurveSample:
    eps: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        speed = np.max(np.abs(s3core.norm(self.velocities) - 1.0))
        vert = np.max(np.abs(inner(self.velocities, vertical(self.points))))
        if speed > 1e-6 or vert > 1e-6:
            raise ValueError(
                f"curve is not horizontal arc-length (speed dev {speed:.3g}, vertical {vert:.3g})"
            )


@dataclass(frozen=True)
class HorizontalCurve:
    """Arc-length horizontal curve given by callables of the parameter ``eps``.

    ``h(eps) = <Gamma'', J(Gamma')>`` is the curvature function; a geodesic
    of curvature ``mu`` has ``h = -2 mu``.
    """

    position: Callable[[np.ndarray], np.ndarray]
    velocity: Callable[[np.ndarray], np.ndarray]
    h: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]
    periodic: bool = False
    geodesic: GeodesicSpec | None = None
    label: str = ""

    def sample(self, eps) -> HorizontalCurveSample:
        eps = np.asarray(eps, dtype=float)
        return HorizontalCurveSample(eps, self.position(eps), self.velocity(eps), np.broadcast_to(self.h(eps), eps.shape).copy())

    @classmethod
    def from_geodesic(cls, spec: GeodesicSpec, domain=None, label: str = "") -> "HorizontalCurve":
        mu = float(spec.lam)
        ratio = RationalityPolicy().approximate(mu / _eta(mu))
        if domain is None:
            domain = (0.0, 2 * np.pi / _eta(mu)) if ratio is None else (0.0, _closed_length(mu, ratio))
        periodic = ratio is not None and math.isclose(domain[1] - domain[0], _closed_length(mu, ratio))
        return cls(
            position=lambda e: geodesic_point(spec, e),
            velocity=lambda e: geodesic_velocity(spec, e),
            h=lambda e: np.full(np.shape(e), -2.0 * mu),
            domain=domain,
            periodic=periodic,
            geodesic=spec,
            label=label or f"geodesic(mu={mu:g})",
        )

    @classmethod
    def from_angle_function(
        cls,
        phi: Callable[[float], float],
        phi_dot: Callable[[float], float],
        length: float,
        start=s3core.IDENTITY,
        label: str = "",
    ) -> "HorizontalCurve":
        """Solve ``Gamma' = cos(phi) E1(Gamma) + sin(phi) E2(Gamma)``; then ``h = phi'``."""

        def rhs(e, y):
            return np.cos(phi(e)) * s3core.left_j(y) + np.sin(phi(e)) * s3core.left_k(y)

        sol = solve_ivp(rhs, (0.0, length), np.asarray(start, dtype=float), method="DOP853",
                        rtol=1e-13, atol=1e-13, dense_output=True)
        if not sol.success:
            raise RuntimeError(f"curve integration failed: {sol.message}")

        def position(e):
            e = np.asarray(e, dtype=float)
            return s3core.normalize(np.moveaxis(sol.sol(e), 0, -1))

        def velocity(e):
            e = np.asarray(e, dtype=float)
            y = position(e)
            ph = np.vectorize(phi)(e)[..., None]
            return np.cos(ph) * s3core.left_j(y) + np.sin(ph) * s3core.left_k(y)

        return cls(position, velocity, lambda e: np.vectorize(phi_dot)(np.asarray(e, dtype=float)),
                   (0.0, length), periodic=False, label=label or "angle-curve")


def _closed_length(mu: float, ratio) -> float:
    from ..geodesics import period_from_fraction

    return period_from_fraction(mu, ratio)


def great_circle_curve() -> HorizontalCurve:
    """``(cos e, 0, sin e, 0)``: the curvature-0 geodesic from ``(1,0,0,0)`` along ``E1``."""
    return HorizontalCurve.from_geodesic(GeodesicSpec.from_angle(s3core.IDENTITY, 0.0, 0.0), (0.0, 2 * np.pi))


def wobbly_curve(amplitude: float = 0.6, length: float = 2 * np.pi) -> HorizontalCurve:
    """Horizontal non-geodesic test curve with ``h(e) = amplitude cos(e)``."""
    return HorizontalCurve.from_angle_function(
        lambda e: amplitude * math.sin(e), lambda e: amplitude * math.cos(e), length,
        label=f"wobbly(amplitude={amplitude:g})",
    )


# --- ruled sheets --------------------------------------------------------------

PLUS_J = "+J"
MINUS_J = "-J"


def _frame_coefficients(lam: float, s):
    eta = _eta(lam)
    cl, sl = np.cos(lam * s), np.sin(lam * s)
    ce, se = np.cos(eta * s), np.sin(eta * s)
    a = cl * ce + lam * sl * se / eta
    b = sl * se / eta
    c = cl * se / eta
    d = -sl * ce + lam * cl * se / eta
    return a, b, c, d


def ruled_points(curve_sample: HorizontalCurveSample, lam: float, side: str, s) -> np.ndarray:
    """``gamma_e(s)`` in the frame ``{Gamma, Gamma', J Gamma', V(Gamma)}``.

    ``s`` broadcasts against the curve samples (shape ``(n_eps, n_s)`` or
    ``(n_eps,)``).
    """
    a, b, c, d = _frame_coefficients(lam, np.asarray(s, dtype=float))
    if side == MINUS_J:
        b, c = -b, -c
    G = curve_sample.points
    dG = curve_sample.velocities
    JdG = apply_J(dG, G)
    VG = vertical(G)
    extra = (None,) * (np.ndim(a) - 1)
    sel = (slice(None),) + extra
    return (a[..., None] * G[sel] + b[..., None] * dG[sel]
            + c[..., None] * JdG[sel] + d[..., None] * VG[sel])


def ruled_jacobi_field(curve_sample: HorizontalCurveSample, lam: float, s, side: str = PLUS_J) -> np.ndarray:
    """Closed-form variation field ``dF/de`` of a sheet at fixed ``s``."""
    a, b, c, d = _frame_coefficients(lam, np.asarray(s, dtype=float))
    if side == MINUS_J:
        b, c = -b, -c
    h = curve_sample.h
    G, dG = curve_sample.points, curve_sample.velocities
    JdG, VG = apply_J(dG, G), vertical(G)
    return ((-b)[..., None] * G + (a - h * c)[..., None] * dG
            + (h * b + d)[..., None] * JdG + (-c)[..., None] * VG)


@dataclass(frozen=True)
class RuledSheet:
    patch: ParamPatch
    start_curve: SingularCurve
    end_curve: SingularCurve
    cut: np.ndarray
    side: str
    lam: float
    curve: HorizontalCurve


def _sheet_specs(curve_sample: HorizontalCurveSample, lam: float, side: str) -> GeodesicSpec:
    v = apply_J(curve_sample.velocities, curve_sample.points)
    if side == MINUS_J:
        v = -v
    return GeodesicSpec(curve_sample.points, v, np.full(len(curve_sample.eps), lam))


def ruled_patch(
    curve: HorizontalCurve,
    lam: float,
    side: str = PLUS_J,
    n_s: int = 64,
    n_eps: int = 256,
    eps=None,
) -> RuledSheet:
    """Sheet of curvature-``lam`` geodesics leaving ``curve`` along ``+-J(Gamma')``.

    Each geodesic runs until its cut ``s_e``; the grid is ``(e, t)`` with
    ``s = t s_e`` and ``t`` in [0, 1].  The far edge is the second singular
    curve ``Gamma_1``.
    """
    if side not in (PLUS_J, MINUS_J):
        raise ValueError(f"side must be {PLUS_J!r} or {MINUS_J!r}")
    if eps is None:
        eps = np.linspace(curve.domain[0], curve.domain[1], n_eps)
    eps = np.asarray(eps, dtype=float)
    sample = curve.sample(eps)
    cut = cut_function(sample.h, lam) if side == PLUS_J else reverse_cut(sample.h, lam)
    t = np.linspace(0.0, 1.0, n_s)
    S = cut[:, None] * t[None, :]
    grid = ruled_points(sample, lam, side, S)
    specs = _sheet_specs(sample, lam, side)
    start_vel = specs.v
    end_vel = geodesic_velocity(specs, cut)
    end_points = grid[:, -1]
    start = SingularCurve(eps, sample.points, sample.velocities, edge=0)
    end = SingularCurve.from_samples(eps, end_points, edge=-1, periodic=curve.periodic)
    meta = {
        "kind": "ruled",
        "lambda": lam,
        "side": side,
        "curve": curve.label,
        "edge_velocity": {0: start_vel, -1: end_vel},
    }
    patch = ParamPatch(grid, eps, t, meta, orientation="z_along_v")
    return RuledSheet(patch, start, end, cut, side, lam, curve)


def sheet_jacobi_fd(curve: HorizontalCurve, lam: float, side: str, eps, s, step: float = 1e-5) -> np.ndarray:
    """Variation field ``dF/de`` at fixed ``s`` by central differences of the curve."""
    eps = np.asarray(eps, dtype=float)
    plus = ruled_points(curve.sample(eps + step), lam, side, s)
    minus = ruled_points(curve.sample(eps - step), lam, side, s)
    return (plus - minus) / (2 * step)


def sheet_normal(curve: HorizontalCurve, lam: float, side: str, eps, s, step: float = 1e-5) -> np.ndarray:
    """Unit normal ``(|X|^2-<X,g'>^2)^{-1/2} (<X,V> J g' - <X,J g'> V)`` of a sheet.

    The prefactor uses ``|X|^2`` rather than 1 so the result stays unit where
    the variation field is not (anywhere past ``s = 0``).
    """
    sample = curve.sample(eps)
    specs = _sheet_specs(sample, lam, side)
    g = geodesic_point(specs, s)
    dg = geodesic_velocity(specs, s)
    X = sheet_jacobi_fd(curve, lam, side, eps, s, step)
    Jdg = apply_J(dg, g)
    V = vertical(g)
    scale = 1.0 / np.sqrt(inner(X, X) - inner(X, dg) ** 2)
    return scale[..., None] * (inner(X, V)[..., None] * Jdg - inner(X, Jdg)[..., None] * V)


# --- C_{mu, lam} -----------------------------------------------------------------


class SingularCurveError(RuntimeError):
    pass


def eps_mu(mu: float, lam: float) -> float:
    """Unique ``e`` in ``(0, pi/sqrt(1+mu^2))`` with ``cot(sqrt(1+mu^2) e) = -lam/sqrt(1+mu^2)``."""
    em = _eta(mu)
    return float(_arccot(-lam / em) / em)


@dataclass
class CmcTorusLayout:
    mu: float
    lam: float
    eps_mu: float
    eps_mu_tilde: float
    theta1: float
    theta2: float
    theta1_tilde: float
    theta2_tilde: float
    theta: dict = field(default_factory=dict)  # (branch, step) -> formula angle
    theta_error: dict = field(default_factory=dict)  # (branch, step) -> max |child(e+c) - exp(i th) parent(e)|
    geodesic_residual: dict = field(default_factory=dict)
    hopf_residual: dict = field(default_factory=dict)
    rebuild_error: dict = field(default_factory=dict)
    closes: bool = False
    increment_over_pi: tuple = ()


def layout_angles(mu: float, lam: float) -> dict:
    """Angle bookkeeping for the chain ``C_{mu, lam}``."""
    s = float(cut_function(-2 * mu, lam))
    s_t = float(reverse_cut(-2 * mu, lam))
    e = eps_mu(mu, lam)
    e_t = math.pi / _eta(mu) - e
    th1 = 1.5 * math.pi - lam * s - mu * e
    th2 = 0.5 * math.pi - lam * s_t - mu * e_t
    th1t = 0.5 * math.pi + lam * s_t - mu * e
    th2t = 1.5 * math.pi + lam * s - mu * e_t
    return dict(cut=s, reverse_cut=s_t, eps_mu=e, eps_mu_tilde=e_t,
                theta1=th1, theta2=th2, theta1_tilde=th1t, theta2_tilde=th2t)


def chain_angle(theta_j: float, theta_j_tilde: float, k: int) -> float:
    """``theta_{j,k}`` for ``k >= 1``."""
    m, odd = divmod(k, 2)
    if odd:
        return (m + 1) * theta_j + m * theta_j_tilde
    return m * (theta_j + theta_j_tilde)


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def _curvature_residual(points_fn, eps, mu, step=1e-3):
    """``|<Gamma'', J Gamma'> + 2 mu|`` by finite differences of a parameterised curve."""
    p = points_fn(eps)
    d1 = (points_fn(eps + step) - points_fn(eps - step)) / (2 * step)
    d2 = (points_fn(eps + step) - 2 * p + points_fn(eps - step)) / step**2
    return np.abs(inner(d2, apply_J(d1, p)) + 2 * mu)


def cmc_torus_patch(
    mu: float,
    lam: float,
    n_steps: int = 2,
    n_eps: int = 128,
    n_s: int = 32,
    check_tol: float = 1e-5,
    hopf_tol: float = 1e-6,
    policy: RationalityPolicy | None = None,
) -> tuple[list[RuledSheet], CmcTorusLayout]:
    """Sheets of ``C_{mu,lam}`` for ``n_steps`` generations on both branches.

    Branch 1 starts on the ``+J`` side of ``Gamma``, branch 2 on the ``-J``
    side; generation ``k`` uses curvature ``(-1)^k lam`` and switches side.
    Every new singular curve is checked to be a curvature-``mu`` geodesic,
    to project onto the Hopf circle of ``Gamma`` and to equal
    ``exp(i theta) . parent`` after the expected parameter shift.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    policy = policy or DEFAULT.rationality
    ang = layout_angles(mu, lam)
    layout = CmcTorusLayout(
        mu=mu, lam=lam, eps_mu=ang["eps_mu"], eps_mu_tilde=ang["eps_mu_tilde"],
        theta1=ang["theta1"], theta2=ang["theta2"],
        theta1_tilde=ang["theta1_tilde"], theta2_tilde=ang["theta2_tilde"],
    )
    base_spec = GeodesicSpec.from_angle(s3core.IDENTITY, 0.0, mu)
    base = HorizontalCurve.from_geodesic(base_spec, label="Gamma")
    fit = hopf_curvature_check(base_spec)
    length = base.domain[1] - base.domain[0]
    eps_grid = np.linspace(0.0, length, n_eps)

    sheets: list[RuledSheet] = []
    shifts = {1: ang["eps_mu"], 2: ang["eps_mu_tilde"]}
    step_angle = {
        (1, 0): ang["theta1"], (1, 1): ang["theta1_tilde"],
        (2, 0): ang["theta2"], (2, 1): ang["theta2_tilde"],
    }
    for branch in (1, 2):
        parent = base
        for k in range(n_steps):
            kappa = lam if k % 2 == 0 else -lam
            side = (PLUS_J if k % 2 == 0 else MINUS_J) if branch == 1 else (MINUS_J if k % 2 == 0 else PLUS_J)
            sheet = ruled_patch(parent, kappa, side, n_s=n_s, eps=eps_grid)
            sheets.append(sheet)

            # singular curve as a parameterised curve e -> F(e, s_e)
            def child_position(e, parent=parent, kappa=kappa, side=side):
                smp = parent.sample(e)
                cut = cut_function(smp.h, kappa) if side == PLUS_J else reverse_cut(smp.h, kappa)
                return ruled_points(smp, kappa, side, cut)

            key = (branch, k + 1)
            probe = eps_grid[2:-2]
            res = float(np.max(_curvature_residual(child_position, probe, mu)))
            layout.geodesic_residual[key] = res
            hopf_pts = s3core.hopf(sheet.end_curve.points)
            hres = float(np.max(np.abs(hopf_pts @ fit.normal - fit.offset)))
            layout.hopf_residual[key] = hres

            th_step = step_angle[(branch, k % 2)]
            c = shifts[branch]
            lhs = child_position(eps_grid + c)
            rhs = s3core.exp_i(th_step, parent.position(eps_grid))
            layout.theta_error[key] = float(np.max(s3core.norm(lhs - rhs)))
            layout.theta[key] = chain_angle(step_angle[(branch, 0)], step_angle[(branch, 1)], k + 1)
            if res > check_tol or hres > hopf_tol:
                raise SingularCurveError(
                    f"singular curve {key}: curvature residual {res:.3g}, Hopf residual {hres:.3g}"
                )

            # the child is a geodesic of curvature mu; rebuild it in closed form
            # from its point and velocity X(s_0) at e = 0 (the cut is constant)
            smp0 = parent.sample(np.array([0.0]))
            cut0 = sheet.cut[0]
            x0 = ruled_points(smp0, kappa, side, np.array([cut0]))[0]
            v0 = ruled_jacobi_field(smp0, kappa, np.array([cut0]), side)[0]
            child_spec = GeodesicSpec(s3core.normalize(x0), v0 / np.linalg.norm(v0), mu)
            rebuilt = HorizontalCurve.from_geodesic(child_spec, domain=base.domain, label=f"Gamma_{branch}{k + 1}")
            err = float(np.max(s3core.norm(rebuilt.position(eps_grid) - sheet.end_curve.points)))
            layout.rebuild_error[key] = err
            if err > check_tol:
                raise SingularCurveError(f"singular curve {key} is not the expected geodesic (error {err:.3g})")
            parent = rebuilt

    incs = []
    closes = True
    for branch in (1, 2):
        inc = (step_angle[(branch, 0)] + step_angle[(branch, 1)]) / math.pi
        incs.append(inc)
        closes &= policy.approximate(inc) is not None
    layout.increment_over_pi = tuple(incs)
    layout.closes = bool(closes)
    return sheets, layout


@dataclass(frozen=True)
class SelfIntersectionReport:
    candidates: int  # near-coincident point pairs between distinct parts
    coincident_sheets: tuple  # (i, j) pairs of sheets covering the same surface
    radius: float


def _interior_points(sheet: RuledSheet, margin: float) -> np.ndarray:
    keep = (sheet.patch.v > margin) & (sheet.patch.v < 1 - margin)
    return sheet.patch.grid[:, keep]


def self_intersection_candidates(sheets: list[RuledSheet], margin: float = 0.1,
                                 radius: float | None = None) -> SelfIntersectionReport:
    """Spot check for self-intersections of a union of ruled sheets.

    Only points with ``t`` in ``(margin, 1 - margin)`` take part, so the
    singular curves that adjacent sheets share are never counted.  Two
    sheets whose interior points all lie within ``radius`` of each other
    cover the same surface again (the chain has closed up); they are listed
    as coincident and left out of the count.  Within one sheet, pairs closer
    than four cells in ``eps`` (cyclically for a closed base curve) are
    neighbours.  ``radius`` defaults to half the smallest grid step.  Zero
    candidates does not prove embeddedness.
    """
    blocks = [_interior_points(sh, margin) for sh in sheets]
    if radius is None:
        steps = []
        for sh in sheets:
            g = sh.patch.grid
            steps += [np.linalg.norm(np.diff(g, axis=0), axis=-1).min(),
                      np.linalg.norm(np.diff(g, axis=1), axis=-1).min()]
        radius = 0.5 * float(min(steps))
    flat = [b.reshape(-1, 4) for b in blocks]
    trees = [cKDTree(f) for f in flat]
    count = 0
    coincident = []
    for k, (sh, b) in enumerate(zip(sheets, blocks)):
        pairs = trees[k].query_pairs(radius, output_type="ndarray")
        if pairs.size:
            n_eps = b.shape[0]
            gap = np.abs(pairs[:, 0] // b.shape[1] - pairs[:, 1] // b.shape[1])
            if sh.curve.periodic:  # first and last eps samples are the same point
                gap = np.minimum(gap, (n_eps - 1) - gap)
            count += int(np.count_nonzero(gap > 4))
    for i in range(len(sheets)):
        for j in range(i + 1, len(sheets)):
            d_ij = trees[j].query(flat[i], distance_upper_bound=radius)[0]
            close = np.isfinite(d_ij)
            if close.all() and np.isfinite(trees[i].query(flat[j], distance_upper_bound=radius)[0]).all():
                coincident.append((i, j))
            else:
                count += int(np.count_nonzero(close))
    return SelfIntersectionReport(count, tuple(coincident), radius)
