"""Generating curves of rotationally invariant CMC surfaces.

A profile is a curve ``(omega, tau)`` in the hemisphere
``(cos w cos t, cos w sin t, sin w)``; ``sigma`` is the oriented angle from
``d/d omega`` to its unit tangent.  Rotating it by ``r_theta`` sweeps a
surface of constant mean curvature ``H`` when ``(omega, tau, sigma)``
solves the system implemented in :func:`ode_rhs`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate

from ..config import DEFAULT, RationalityPolicy
from ..s3core import rotate_theta
from ..surfaces.patch import ParamPatch
from .integrator import DomainExit, Event, Trajectory, integrate

HALF_PI = 0.5 * math.pi
_EXACT = 1e-12


class ProfileSingularity(DomainExit):
    """The profile system was evaluated on or near ``omega in {0, pi/2}``."""


class NoSolutionError(ValueError):
    """No profile exists with the requested ``(E, H)``."""


class DomainError(ValueError):
    """The reduced formulas were evaluated outside the admissible ``omega`` range."""


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ProfileState:
    omega: float
    tau: float
    sigma: float

    def __post_init__(self):
        if not 0.0 < self.omega < HALF_PI:
            raise ValueError(f"omega={self.omega} outside (0, pi/2)")

    @property
    def array(self) -> np.ndarray:
        return np.array([self.omega, self.tau, self.sigma])


def ode_rhs(state, H: float, omega_min: float = DEFAULT.tolerances.omega_min):
    """Right-hand side ``(omega', tau', sigma')`` of the profile system."""
    if isinstance(state, ProfileState):
        w, t, s = state.omega, state.tau, state.sigma
    else:
        w, t, s = state
    if not omega_min < w < HALF_PI - omega_min:
        raise ProfileSingularity(f"omega={w} is within {omega_min} of the boundary")
    sw, cw = math.sin(w), math.cos(w)
    ss, cs = math.sin(s), math.cos(s)
    tw = sw / cw
    base = sw * sw * cs * cs + ss * ss
    sigma_dot = tw * ss - ss**3 / tw**3 + 2.0 * H * base**1.5 / (sw * sw)
    return (cs, ss / cw, sigma_dot)


def energy(omega, sigma, H: float):
    """First integral of the profile system; vectorized."""
    omega = np.asarray(omega, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    sw, cw = np.sin(omega), np.cos(omega)
    ss, cs = np.sin(sigma), np.cos(sigma)
    denom = np.sqrt(sw**2 * cs**2 + ss**2)
    if np.any(denom == 0):
        raise DomainError("energy undefined where sin(omega) cos(sigma) = sin(sigma) = 0")
    out = sw * cw * ss / denom - H * sw**2
    return float(out) if out.ndim == 0 else out


def discriminant(E: float, H: float) -> float:
    return (1.0 - 2.0 * E * H) ** 2 - 4.0 * E * E * (1.0 + H * H)


@dataclass(frozen=True)
class OmegaBounds:
    omega1: float
    omega2: float

    @property
    def degenerate(self) -> bool:
        return abs(self.omega2 - self.omega1) <= 1e-12


class _NoSolution:
    """Sentinel returned by :func:`omega_bounds` for an empty energy level."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NoSolution"

    def __bool__(self):
        return False


NoSolution = _NoSolution()


def omega_bounds(E: float, H: float):
    """Turning bounds from ``(1+H^2) x^2 - (1-2EH) x + E^2 <= 0`` with ``x = sin^2 omega``."""
    disc = discriminant(E, H)
    if disc < -_EXACT:
        return NoSolution
    root = math.sqrt(max(disc, 0.0))
    b = 1.0 - 2.0 * E * H
    a = 2.0 * (1.0 + H * H)
    x1 = (b - root) / a
    # the product of the roots is E^2/(1+H^2); use it for the small root
    x2 = (b + root) / a
    if x2 > 0 and root > 0:
        x1 = E * E / (1.0 + H * H) / x2
    x1 = min(max(x1, 0.0), 1.0)
    x2 = min(max(x2, 0.0), 1.0)
    return OmegaBounds(math.asin(math.sqrt(x1)), math.asin(math.sqrt(x2)))


def _k(omega, E, H):
    return E + H * np.sin(omega) ** 2


def sin_sigma_of_omega(omega, E: float, H: float):
    """``sin(sigma)`` as a function of ``omega`` on an energy level."""
    omega = np.asarray(omega, dtype=float)
    sw, cw = np.sin(omega), np.cos(omega)
    k = _k(omega, E, H)
    rad = sw**2 - k**2
    if np.any(rad <= 0) or np.any(cw <= 0):
        raise DomainError("sin(sigma) undefined: sin(omega) <= |E + H sin^2(omega)|")
    out = k * sw / (cw * np.sqrt(rad))
    if np.any(np.abs(out) > 1.0 + 1e-10):
        raise DomainError("omega lies outside the turning bounds")
    out = np.clip(out, -1.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _p(x, E, H):
    return -((E + H * x) ** 3) - H * x**3 + (E + 2 * H) * x**2


def sigma_dot_reduced(omega, E: float, H: float):
    """``sigma'`` expressed through ``omega`` alone on the energy level ``E``."""
    omega = np.asarray(omega, dtype=float)
    sin_sigma_of_omega(omega, E, H)  # domain check
    x = np.sin(omega) ** 2
    k = E + H * x
    out = _p(x, E, H) / (np.cos(omega) ** 2 * (x - k * k) ** 1.5)
    return float(out) if out.ndim == 0 else out


def graph_slope(omega, sigma):
    """``d omega / d tau`` where the profile is a graph over ``tau``."""
    return np.cos(omega) / np.tan(sigma)


def graph_curvature(omega, sigma, H: float):
    """``d^2 omega / d tau^2`` from the state and ``sigma'``."""
    w, s = float(omega), float(sigma)
    sigma_dot = ode_rhs((w, 0.0, s), H)[2]
    ss = math.sin(s)
    return -(math.sin(w) * math.cos(w) * ss * math.cos(s) ** 2 + sigma_dot * math.cos(w) ** 2) / ss**3


def graph_curvature_reduced(omega, E: float, H: float):
    """``d^2 omega / d tau^2`` as a function of ``omega`` on the energy level ``E``."""
    omega = np.asarray(omega, dtype=float)
    sw, cw = np.sin(omega), np.cos(omega)
    k = E + H * sw**2
    return cw / (sw**3 * k**3) * (k**3 - 2 * (E + H) * sw**4 * cw**2)


def sphere_profile_tau(omega, H: float):
    """Closed-form ``tau(omega)`` of the ``E = 0`` profile, ``tau = 0`` at the top."""
    omega = np.asarray(omega, dtype=float)
    eta = math.sqrt(1 + H * H)
    r = H / eta
    return r * np.arcsin(eta * np.sin(omega)) - np.arcsin(H * np.tan(omega)) + HALF_PI * (1 - r)


# classification -----------------------------------------------------------


class DelaunayKind(str, enum.Enum):
    MERIDIAN_SPHERE = "Meridian2Sphere"
    CLIFFORD_TORUS = "CliffordTorus"
    SPHERE = "SphereSH"
    UNDULOID = "Unduloid"
    NODOID = "Nodoid"
    PETAL = "Petal"


@dataclass(frozen=True)
class DelaunayClass:
    kind: DelaunayKind
    compact: bool
    period: float | None
    E: float
    H: float
    normalized: bool = False
    embedding_k: int | None = None


def clifford_energy(H: float) -> float:
    return 0.5 * (math.sqrt(1 + H * H) - H)


def classify(E: float, H: float, policy: RationalityPolicy | None = None) -> DelaunayClass:
    """Delaunay type of the profiles with energy ``E`` and curvature ``H``.

    Negative ``H`` is first mapped to ``(-E, -H)``, the energy level of the
    reversed curve.
    """
    policy = policy or DEFAULT.rationality
    normalized = H < 0
    if normalized:
        E, H = -E, -H
    if discriminant(E, H) < -_EXACT:
        raise NoSolutionError(f"no profile with E={E}, H={H}: discriminant {discriminant(E, H):.3g} < 0")
    r = H / math.sqrt(1 + H * H)

    def build(kind, compact, period):
        k = None
        if period:
            ratio = 2 * math.pi / period
            if abs(ratio - round(ratio)) < 1e-9:
                k = int(round(ratio))
        return DelaunayClass(kind, compact, period, -E if normalized else E,
                             -H if normalized else H, normalized, k)

    if abs(H) <= _EXACT and abs(E) <= _EXACT:
        return build(DelaunayKind.MERIDIAN_SPHERE, True, None)
    if abs(E) <= _EXACT:
        return build(DelaunayKind.SPHERE, True, None)
    if abs(discriminant(E, H)) <= _EXACT:
        return build(DelaunayKind.CLIFFORD_TORUS, True, None)
    compact = policy.approximate(r) is not None
    if abs(H + E) <= _EXACT:
        return build(DelaunayKind.PETAL, compact, (1 - r) * math.pi)
    if E > 0:
        return build(DelaunayKind.UNDULOID, compact, (1 - r) * math.pi)
    if H < -E:
        return build(DelaunayKind.UNDULOID, compact, (1 + r) * math.pi)
    return build(DelaunayKind.NODOID, compact, (1 - r) * math.pi)


@dataclass(frozen=True)
class ClosedFormPeriods:
    T_unduloid: float
    tau2_nodoid: float
    tau0_petal: float
    T_unduloid_negative_energy: float


def closed_form_periods(H: float) -> ClosedFormPeriods:
    if H < 0:
        raise ValueError("closed-form periods assume H >= 0")
    r = H / math.sqrt(1 + H * H)
    return ClosedFormPeriods((1 - r) * math.pi, 0.5 * math.pi * (1 - r), -0.5 * math.pi * r, (1 + r) * math.pi)


def period_by_quadrature(E: float, H: float, tol: float = 1e-12) -> float:
    """``2 |int_{w1}^{w2} d tau/d omega d omega|`` over one monotone arc.

    With ``x = sin^2 omega = m + w sin(phi)`` the inverse square roots at
    both turning points cancel against ``dx`` and the integrand becomes
    ``(E + H x) / (2 sqrt(1+H^2) (1 - x))`` on ``phi in [-pi/2, pi/2]``.
    """
    bounds = omega_bounds(E, H)
    if not bounds or bounds.degenerate:
        raise NoSolutionError(f"(E={E}, H={H}) has no non-degenerate turning range")
    x1, x2 = math.sin(bounds.omega1) ** 2, math.sin(bounds.omega2) ** 2
    mid, half = 0.5 * (x1 + x2), 0.5 * (x2 - x1)
    eta = math.sqrt(1 + H * H)

    def integrand(phi):
        x = mid + half * math.sin(phi)
        if abs(E + H) <= _EXACT:
            return -H / (2 * eta)  # petal: E + Hx = -H(1 - x)
        return (E + H * x) / (2 * eta * (1 - x))

    value, err = sp_integrate.quad(integrand, -HALF_PI, HALF_PI, epsabs=tol, epsrel=tol, limit=200)
    if not np.isfinite(value) or err > 1e-8:
        raise QuadratureError(f"quadrature did not converge (error estimate {err:.3g})")
    return 2.0 * abs(value)


# integration ----------------------------------------------------------------


@dataclass(frozen=True)
class ProfileEvent:
    kind: str  # "turning" | "axis" | "pole" | "start" | "end" | "underflow"
    s: float
    omega: float
    tau: float
    sigma: float


@dataclass(frozen=True)
class _End:
    """One end of the fundamental arc: a mirror meridian or a hard stop."""

    s: float
    mirror: float | None  # tau of the symmetry meridian, None for a stop
    kind: str


@dataclass
class ProfileSolution:
    """Fundamental arc plus the reflections that extend it."""

    H: float
    E: float
    arc: object  # dense Trajectory, or None for an equilibrium
    lo: _End
    hi: _End
    domain: tuple
    events: list = field(default_factory=list)
    equilibrium: ProfileState | None = None
    max_step_drift: float = 0.0

    def __call__(self, s):
        """States at arc lengths ``s`` inside ``domain``; returns ``(3, n)``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        a, b = self.domain
        if np.any(s < a - 1e-12) or np.any(s > b + 1e-12):
            raise ValueError(f"s outside the solution domain [{a}, {b}]")
        if self.equilibrium is not None:
            eq = self.equilibrium
            rates = ode_rhs((eq.omega, eq.tau, eq.sigma), self.H)
            return np.stack([np.full_like(s, eq.omega), eq.tau + rates[1] * s, np.full_like(s, eq.sigma)])
        lo, hi = self.lo, self.hi
        length = hi.s - lo.s
        t_lo, t_hi = min(self.arc.ts), max(self.arc.ts)
        out = np.empty((3, s.size))
        if lo.mirror is not None and hi.mirror is not None:
            period = 2 * length
            k = np.floor((s - lo.s) / period)
            r = s - lo.s - k * period
            forward = r <= length
            base = np.where(forward, lo.s + r, hi.s - (r - length))
            st = self.arc(np.clip(base, t_lo, t_hi))
            tau = np.where(forward, st[1], 2 * hi.mirror - st[1])
            sig = np.where(forward, st[2], math.pi - st[2])
            out[0] = st[0]
            out[1] = tau + k * 2 * (hi.mirror - lo.mirror)
            out[2] = sig
            return out
        # at most one reflection: across the mirror end into the mirrored copy
        base = s.copy()
        flip = np.zeros(s.size, dtype=bool)
        if lo.mirror is not None:
            flip = s < lo.s
            base = np.where(flip, 2 * lo.s - s, s)
            m = lo.mirror
        elif hi.mirror is not None:
            flip = s > hi.s
            base = np.where(flip, 2 * hi.s - s, s)
            m = hi.mirror
        else:
            m = 0.0
        st = self.arc(np.clip(base, t_lo, t_hi))
        out[0] = st[0]
        out[1] = np.where(flip, 2 * m - st[1], st[1])
        out[2] = np.where(flip, math.pi - st[2], st[2])
        return out

    def energy_along(self, n: int = 2001) -> np.ndarray:
        s = np.linspace(*self.domain, n)
        w, _, sig = self(s)
        return energy(w, sig, self.H)


def launch_state(E: float, H: float, at: str = "omega1") -> ProfileState:
    """State at a turning point of the energy level, ``tau = 0``."""
    bounds = omega_bounds(E, H)
    if not bounds:
        raise NoSolutionError(f"no profile with E={E}, H={H}")
    w = bounds.omega1 if at == "omega1" else bounds.omega2
    if w <= 0 or w >= HALF_PI:
        raise NoSolutionError(f"turning point {at} lies on the boundary (omega={w})")
    k = E + H * math.sin(w) ** 2
    return ProfileState(w, 0.0, HALF_PI if k >= 0 else 1.5 * math.pi)


def _is_equilibrium(state: ProfileState, H: float) -> bool:
    rates = ode_rhs((state.omega, state.tau, state.sigma), H)
    return abs(rates[0]) < 1e-14 and abs(rates[2]) < 1e-13


def integrate_profile(
    init: ProfileState,
    H: float,
    arc_length: float,
    tol: float = DEFAULT.tolerances.energy_drift,
    rtol: float = DEFAULT.tolerances.ode_rtol,
    axis_tol: float = 1e-6,
    pole_tol: float = 1e-4,
    symmetric: bool = False,
) -> ProfileSolution:
    """Solve the profile system on ``[0, arc_length]`` (``[-L, L]`` if ``symmetric``).

    The arc between two consecutive boundary events is integrated once.
    Turning points (``cos sigma = 0``) are mirror meridians, and so is the
    meridian ``tau_pole + pi/2`` at a pole contact, where the curve passes
    through ``omega = pi/2`` onto the meridian ``tau_pole + pi``.  The full
    solution is assembled from these reflections; contact with the axis
    ``omega = 0`` ends the domain.

    Near the pole the coordinates are unstable (``d sigma'/d sigma ~ tan
    omega``), so the pole event fires at ``pi/2 - pole_tol`` and the contact
    point is extrapolated linearly, which is accurate to ``O(pole_tol^2)``.
    """
    if isinstance(init, (tuple, list, np.ndarray)):
        init = ProfileState(*init)
    E0 = energy(init.omega, init.sigma, H)
    lo_s = -arc_length if symmetric else 0.0
    if _is_equilibrium(init, H):
        start = ProfileEvent("start", 0.0, init.omega, init.tau, init.sigma)
        return ProfileSolution(H, E0, None, _End(lo_s, None, "end"), _End(arc_length, None, "end"),
                               (lo_s, float(arc_length)), [start], equilibrium=init)

    def rhs(t, y):
        return np.array(ode_rhs(y, H))

    def inv(y):
        return energy(y[0], y[2], H)

    events = [
        Event("turning", lambda t, y: math.cos(y[2])),
        Event("axis", lambda t, y: y[0] - axis_tol),
        Event("pole", lambda t, y: (HALF_PI - pole_tol) - y[0]),
    ]
    log = [ProfileEvent("start", 0.0, init.omega, init.tau, init.sigma)]
    y0 = init.array

    def run(direction):
        span = (2 * arc_length + 10.0) * direction
        traj = integrate(rhs, 0.0, y0, span, rtol=rtol, invariant=inv, invariant_tol=tol, events=events)
        return traj

    def end_from(traj):
        t, y = traj.t_end, traj.y_end
        w, tau, sig = y
        if traj.status != "event":
            kind = "underflow" if traj.status == "step_underflow" else "end"
            log.append(ProfileEvent(kind, t, w, tau, sig))
            return _End(t, None, kind)
        log.append(ProfileEvent(traj.event, t, w, tau, sig))
        if traj.event == "turning":
            return _End(t, tau, "turning")
        if traj.event == "pole":
            # extrapolate linearly to omega = pi/2
            rates = ode_rhs(y, H)
            dt = (HALF_PI - w) / rates[0]
            return _End(t + dt, tau + rates[1] * dt + HALF_PI, "pole")
        return _End(t, None, "axis")

    forward = run(1.0)
    hi = end_from(forward)
    if abs(math.cos(init.sigma)) < 1e-13:
        lo = _End(0.0, init.tau, "turning")
        arc = forward
    else:
        backward = run(-1.0)
        lo = end_from(backward)
        arc = _join(backward, forward)
    max_drift = forward.max_invariant_step

    # domain requested, clipped at hard stops
    a, b = lo_s, float(arc_length)
    if hi.mirror is None:
        b = min(b, hi.s)
        if lo.mirror is not None:
            a = max(a, 2 * lo.s - hi.s)
    if lo.mirror is None:
        a = max(a, lo.s)
        if hi.mirror is not None:
            b = min(b, 2 * hi.s - lo.s)
    sol = ProfileSolution(H, E0, arc, lo, hi, (a, b), log, max_step_drift=max_drift)
    return sol


def _join(backward, forward):
    """Concatenate a backward and a forward trajectory sharing ``t = 0``."""
    traj = Trajectory(
        ts=list(reversed(backward.ts)) + forward.ts[1:],
        ys=list(reversed(backward.ys)) + forward.ys[1:],
        segments=list(reversed(backward.segments)) + forward.segments,
        event=forward.event,
        status=forward.status,
    )
    traj.max_invariant_step = max(backward.max_invariant_step, forward.max_invariant_step)
    return traj


def petal_axis_offset(H: float, tol: float = 1e-12, rtol: float = 1e-12, pole_tol: float = 3e-4) -> float:
    """``tau`` gained between the turning point and the pole on a petal profile.

    An energy error ``e`` moves the turning point to about ``sqrt(e)`` below
    the pole, so the defaults here are tighter than for generic profiles.
    """
    if H <= 0:
        raise ValueError("petal profiles need H > 0")
    init = launch_state(-H, H)
    sol = integrate_profile(init, H, 20.0, tol=tol, rtol=rtol, pole_tol=pole_tol)
    if sol.hi.kind != "pole":
        raise ArithmeticError(f"petal integration ended at {sol.hi.kind}, not at the pole")
    return (sol.hi.mirror - HALF_PI) - init.tau


# surfaces ---------------------------------------------------------------


def profile_points(omega, tau) -> np.ndarray:
    omega, tau = np.asarray(omega), np.asarray(tau)
    cw = np.cos(omega)
    return np.stack([cw * np.cos(tau), cw * np.sin(tau), np.sin(omega), np.zeros_like(omega)], axis=-1)


def revolve(profile: ProfileSolution, n_theta: int = 128, n_s: int = 256, s_range=None) -> ParamPatch:
    """Patch ``phi(s, theta) = r_theta(gamma(s))`` over the profile domain."""
    a, b = s_range if s_range is not None else profile.domain
    s = np.linspace(a, b, n_s)
    theta = np.linspace(0.0, 2 * math.pi, n_theta)
    w, tau, sig = profile(s)
    base = profile_points(w, tau)
    shape = (n_s, n_theta, 4)
    grid = rotate_theta(theta[None, :], np.broadcast_to(base[:, None, :], shape))
    # normal of the profile inside the (x1, y1, x2) sphere, then rotated
    sw, cw = np.sin(w), np.cos(w)
    velocity = np.stack([
        -sw * np.cos(tau) * np.cos(sig) - np.sin(tau) * np.sin(sig),
        -sw * np.sin(tau) * np.cos(sig) + np.cos(tau) * np.sin(sig),
        cw * np.cos(sig),
    ], axis=-1)
    normal3 = np.cross(velocity, base[:, :3])
    normal = np.concatenate([normal3, np.zeros((n_s, 1))], axis=-1)
    ref = rotate_theta(theta[None, :], np.broadcast_to(normal[:, None, :], shape))
    singular = np.zeros(grid.shape[:2], dtype=bool)
    meta = {"construction": "rotational", "H": profile.H, "E": profile.E}
    return ParamPatch(grid, s, theta, meta=meta, orientation=ref, singular=singular)
