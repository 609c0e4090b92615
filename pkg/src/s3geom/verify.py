"""Invariant suites run by ``s3 verify``."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geodesics as geo
from . import s3core
from . import surfaces as srf
from .config import DEFAULT, Config
from .rotational import profile as rot


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    limit: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value,
                "limit": self.limit, "detail": self.detail}


def _below(name, value, limit, detail=""):
    value = float(value)
    return Check(name, bool(np.isfinite(value) and value < limit), value, limit, detail)


def _above(name, value, limit, detail=""):
    value = float(value)
    return Check(name, bool(np.isfinite(value) and value > limit), value, limit, detail)


def frames_suite(cfg: Config = DEFAULT) -> list[Check]:
    rng = np.random.default_rng(11)
    p = s3core.random_points(rng, 100)
    E1, E2, V = s3core.e1_field(p), s3core.e2_field(p), s3core.vertical(p)
    gram = np.stack([E1, E2, V, p], axis=-2)
    dev = np.abs(gram @ np.swapaxes(gram, -1, -2) - np.eye(4)).max()
    quat = max(np.abs(V - s3core.quat_mul(s3core.QUAT_I, p)).max(),
               np.abs(E1 - s3core.quat_mul(s3core.QUAT_J, p)).max(),
               np.abs(E2 - s3core.quat_mul(s3core.QUAT_K, p)).max())
    tol = cfg.tolerances.finite_difference
    brackets = [
        ("[E1,E2]=-2V", s3core.e1_field, s3core.e2_field, lambda q: -2 * s3core.vertical(q)),
        ("[E1,V]=2E2", s3core.e1_field, s3core.vertical, lambda q: 2 * s3core.e2_field(q)),
        ("[E2,V]=-2E1", s3core.e2_field, s3core.vertical, lambda q: -2 * s3core.e1_field(q)),
    ]
    out = [
        _below("frame orthonormal with p", dev, cfg.tolerances.tangent),
        _below("frame equals i.p, j.p, k.p", quat, cfg.tolerances.unit),
    ]
    for name, a, b, want in brackets:
        err = np.abs(s3core.lie_bracket_fd(a, b, p) - want(p)).max()
        out.append(_below(f"bracket {name}", err, tol))
    J1 = np.abs(s3core.apply_J(E1, p) - E2).max()
    J2 = np.abs(s3core.apply_J(E2, p) + E1).max()
    JV = np.abs(s3core.apply_J(V, p)).max()
    out.append(_below("J rotates the horizontal plane and kills V", max(J1, J2, JV), cfg.tolerances.tangent))
    fibre = np.abs(s3core.hopf(s3core.exp_i(0.7, p)) - s3core.hopf(p)).max()
    out.append(_below("Hopf map constant on fibres", fibre, cfg.tolerances.tangent))
    q = s3core.random_points(rng, 1)[0]
    moved = np.abs(s3core.quat_mul(E1, q) - s3core.e1_field(s3core.right_translate(q, p))).max()
    out.append(_below("right translations carry E1 to E1", moved, cfg.tolerances.tangent))
    return out


def geodesics_suite(cfg: Config = DEFAULT) -> list[Check]:
    rng = np.random.default_rng(12)
    n = 1000
    p = s3core.random_points(rng, n)
    v = s3core.random_horizontal(rng, p)
    lam = rng.uniform(-3, 3, n)
    spec = geo.GeodesicSpec(p, v, lam)
    s = rng.uniform(-10, 10, n)
    g = geo.geodesic_point(spec, s)
    dg = geo.geodesic_velocity(spec, s)
    out = [
        _below("geodesic equation residual", np.abs(geo.geodesic_ode_residual(spec, s)).max(), 1e-9),
        _below("horizontal and unit speed",
               max(np.abs(s3core.inner(dg, s3core.vertical(g))).max(), np.abs(s3core.norm(dg) - 1).max()), 1e-10),
    ]
    worst_plane = worst_curv = 0.0
    for lam_k in (-2.0, -0.7, 0.0, 0.5, 3.0):
        fit = geo.hopf_curvature_check(geo.GeodesicSpec.from_angle(s3core.IDENTITY, 0.4, lam_k))
        worst_plane = max(worst_plane, fit.planarity)
        worst_curv = max(worst_curv, abs(fit.curvature - lam_k))
    out.append(_below("Hopf image planar", worst_plane, 1e-8))
    out.append(_below("Hopf image curvature equals lambda", worst_curv, 1e-6))
    c0 = geo.classify_geodesic(0.0)
    out.append(Check("lambda=0 closed", c0.kind is geo.GeodesicKind.CLOSED, c0.ratio, 0.0))
    out.append(_below("lambda=0 period 2 pi", abs(geo.geodesic_period(0.0) - 2 * math.pi), 1e-9))
    lam3 = 1 / math.sqrt(3)
    c3 = geo.classify_geodesic(lam3)
    out.append(_below("lambda=1/sqrt3 period agrees with closure search",
                      abs(c3.period - geo.geodesic_period(lam3)), 1e-9))
    c1 = geo.classify_geodesic(1.0)
    out.append(Check("lambda=1 dense", c1.kind is geo.GeodesicKind.DENSE, c1.ratio, 0.0))
    worst = 0.0
    s_t = np.linspace(0, 100, 4001)
    for rho in (0.3, 0.5, math.sqrt(0.5), 0.9):
        pts = geo.geodesic_point(geo.torus_geodesic(rho), s_t)
        worst = max(worst, np.abs(np.hypot(pts[:, 0], pts[:, 1]) - rho).max())
    out.append(_below("torus geodesics stay on T_rho", worst, 1e-12))
    worst_v = worst_t = worst_c = 0.0
    s_j = np.linspace(0, 6, 121)
    for lam_k in (0.0, 1.0, -1.5):
        spec_k = geo.GeodesicSpec.from_angle(s3core.IDENTITY, 0.3, lam_k)
        J = geo.jacobi_field(spec_k, s_j, geo.rotation_family(s3core.IDENTITY, 0.3, lam_k))
        eta = math.sqrt(1 + lam_k**2)
        ref = np.sin(eta * s_j) ** 2 / eta**2
        worst_v = max(worst_v, np.abs(J.components[:, 2] - ref).max())
        worst_t = max(worst_t, np.abs(J.components[:, 0] + lam_k * ref).max())
        worst_c = max(worst_c, np.ptp(J.conserved))
    out.append(_below("Jacobi <X,V> closed form", worst_v, 1e-6))
    out.append(_below("Jacobi <X,gamma'> closed form", worst_t, 1e-6))
    out.append(_below("Jacobi first integral", worst_c, 1e-6))
    return out


def surfaces_suite(cfg: Config = DEFAULT) -> list[Check]:
    out = []
    worst = 0.0
    for rho in (0.4, math.sqrt(0.5), 0.8):
        cf = srf.mean_curvature_field(srf.clifford_patch(rho, 128, 128))
        worst = max(worst, np.nanmax(np.abs(cf.H - geo.torus_curvature(rho))))
    out.append(_below("Clifford torus mean curvature", worst, 1e-4))
    worst = 0.0
    for lam in (0.0, 1.0, 2.0):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", srf.ConditioningWarning)
            cf = srf.mean_curvature_field(srf.sphere_patch(lam, 128, 128))
        worst = max(worst, np.nanmax(np.abs(cf.H - lam)))
    out.append(_below("sphere S_lambda mean curvature", worst, 1e-3))
    circle = srf.great_circle_curve()
    worst_cut = worst_orth = 0.0
    for lam in (0.0, 1.0):
        sheet = srf.ruled_patch(circle, lam, n_eps=128, n_s=32)
        worst_cut = max(worst_cut, np.abs(sheet.cut - math.pi / (2 * math.sqrt(1 + lam * lam))).max())
        for curve in (sheet.start_curve, sheet.end_curve):
            worst_orth = max(worst_orth, srf.orthogonality_check(sheet.patch, curve).max_inner)
    out.append(_below("cut function over a great circle", worst_cut, 1e-12))
    out.append(_below("ruled sheets meet singular curves orthogonally", worst_orth, 1e-5))
    wob = srf.ruled_patch(srf.wobbly_curve(), 0.0, n_eps=256, n_s=16)
    out.append(_above("non-geodesic curve is not met orthogonally",
                      srf.orthogonality_check(wob.patch, wob.end_curve).max_inner, 1e-2))
    worst_th = worst_res = 0.0
    for lam in (0.5, 2.0):
        _, layout = srf.cmc_torus_patch(0.0, lam, n_steps=2, n_eps=96, n_s=8)
        eta = math.sqrt(1 + lam * lam)
        worst_th = max(worst_th, abs(layout.theta1 - (1.5 * math.pi - lam * math.pi / (2 * eta))),
                       max(layout.theta_error.values()))
        worst_res = max(worst_res, max(layout.geodesic_residual.values()))
    out.append(_below("C_{0,lambda} turning angle", worst_th, 1e-10))
    out.append(_below("generated singular curves are mu-geodesics", worst_res, 1e-5))
    return out


def rotational_suite(cfg: Config = DEFAULT, n_trajectories: int = 20) -> list[Check]:
    tol = cfg.tolerances
    rng = np.random.default_rng(13)
    drift = cota = 0.0
    for _ in range(n_trajectories):
        H = rng.uniform(-2, 2)
        state = rot.ProfileState(rng.uniform(0.3, 1.2), 0.0, rng.uniform(0, 2 * math.pi))
        sol = rot.integrate_profile(state, H, 20.0, tol=tol.energy_drift, rtol=tol.ode_rtol)
        s = np.linspace(*sol.domain, 2001)
        w, _, sig = sol(s)
        drift = max(drift, np.abs(rot.energy(w, sig, H) - sol.E).max())
        cota = max(cota, (np.abs(sol.E + H * np.sin(w) ** 2) - np.sin(w) * np.cos(w)).max())
    out = [_below("energy conserved over length 20", drift, 1e-8),
           _below("turning bound never exceeded", cota, 1e-10)]
    worst_T = worst_tau2 = worst_tau0 = 0.0
    for H in (0.0, 1 / math.sqrt(3), 1.0, 3.0):
        cf = rot.closed_form_periods(H)
        worst_T = max(worst_T, abs(rot.period_by_quadrature(0.5 * rot.clifford_energy(H), H) - cf.T_unduloid))
        if H > 0:
            worst_tau2 = max(worst_tau2, abs(0.5 * rot.period_by_quadrature(-0.5 * H, H) - cf.tau2_nodoid))
            worst_tau0 = max(worst_tau0, abs(rot.petal_axis_offset(H) - cf.tau0_petal))
    out.append(_below("unduloid period by quadrature", worst_T, 1e-6))
    out.append(_below("nodoid half period by quadrature", worst_tau2, 1e-6))
    out.append(_below("petal axis offset by integration", worst_tau0, 1e-6))
    sol = rot.integrate_profile(rot.launch_state(0.3, 0.0), 0.0, 10.0)
    out.append(_below("integrated unduloid tau-period", abs(2 * (sol.hi.mirror - sol.lo.mirror) - math.pi), 1e-6))
    H = 1.0
    sphere = rot.integrate_profile(rot.ProfileState(math.atan(1 / H), 0.0, math.pi / 2), H, 10.0, symmetric=True)
    s = np.linspace(0.0, sphere.domain[1], 401)
    w, tau, sig = sphere(s)
    out.append(_below("E=0 profile matches the closed-form tau(omega)",
                      np.abs(tau - rot.sphere_profile_tau(w, H)).max(), 1e-6))
    out.append(_below("axis contact is orthogonal", abs(math.sin(sig[-1])), 1e-5))
    return out


SUITES: dict[str, Callable[[Config], list[Check]]] = {
    "frames": frames_suite,
    "geodesics": geodesics_suite,
    "surfaces": surfaces_suite,
    "rotational": rotational_suite,
}


def run_suites(names, cfg: Config = DEFAULT) -> dict:
    report = {"suites": {}, "failures": []}
    start = time.perf_counter()
    for name in names:
        t0 = time.perf_counter()
        try:
            checks = SUITES[name](cfg)
        except Exception as exc:  # a crashing suite is a failing suite
            checks = [Check(f"{name} suite raised", False, float("nan"), 0.0, f"{type(exc).__name__}: {exc}")]
        report["suites"][name] = {
            "checks": [c.to_dict() for c in checks],
            "seconds": time.perf_counter() - t0,
        }
        report["failures"] += [f"{name}: {c.name}" for c in checks if not c.passed]
    report["passed"] = not report["failures"]
    report["seconds"] = time.perf_counter() - start
    return report
