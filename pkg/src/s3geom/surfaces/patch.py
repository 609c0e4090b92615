"""Parametric patches in S^3 and the finite-difference surface estimators.

Derivatives use fourth-order central stencils with step equal to the grid
spacing, so estimates exist at points at least two cells from the border.
The characteristic residual differentiates the characteristic field itself
and needs four cells.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .. import s3core
from ..config import DEFAULT
from ..s3core import inner, left_i, vertical

MARGIN = 2


class SingularPointError(ValueError):
    """|N_h| fell below the singular tolerance; nu_h and Z are undefined."""


class ConditioningWarning(UserWarning):
    """Mean curvature requested where |N_h| is small enough to amplify errors."""


@dataclass(frozen=True, eq=False)
class ParamPatch:
    """Rectangular grid ``F(u_i, v_j)`` of points of S^3.

    ``orientation`` selects the unit normal: ``"z_along_u"`` or
    ``"z_along_v"`` orient so that the characteristic field points along
    the increasing parameter; an array of shape ``grid.shape`` gives
    reference normals to align with.
    """

    grid: np.ndarray
    u: np.ndarray
    v: np.ndarray
    meta: dict = field(default_factory=dict)
    orientation: Any = "z_along_v"
    singular: np.ndarray | None = None

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        u = np.array(self.u, dtype=float)
        v = np.array(self.v, dtype=float)
        if grid.ndim != 3 or grid.shape[2] != 4:
            raise ValueError("grid must have shape (n_u, n_v, 4)")
        if grid.shape[0] < 3 or grid.shape[1] < 3:
            raise ValueError("grid must be at least 3x3")
        if u.shape != (grid.shape[0],) or v.shape != (grid.shape[1],):
            raise ValueError("parameter arrays do not match the grid")
        dev = np.max(np.abs(s3core.norm(grid) - 1.0))
        if dev > 1e-10:
            raise ValueError(f"grid points are not unit (max deviation {dev:.3g})")
        for name, t in (("u", u), ("v", v)):
            d = np.diff(t)
            if np.any(d <= 0) or np.ptp(d) > 1e-9 * max(abs(d.mean()), 1e-300):
                raise ValueError(f"{name} must be uniformly spaced and increasing")
        orientation = self.orientation
        if not isinstance(orientation, str):
            orientation = np.array(orientation, dtype=float)
            if orientation.shape != grid.shape:
                raise ValueError("reference normals must match the grid shape")
            orientation.setflags(write=False)
        elif orientation not in ("z_along_u", "z_along_v"):
            raise ValueError(f"unknown orientation {orientation!r}")
        singular = None
        if self.singular is not None:
            singular = np.array(self.singular, dtype=bool)
            singular.setflags(write=False)
        for arr in (grid, u, v):
            arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "orientation", orientation)
        object.__setattr__(self, "singular", singular)

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape[:2]

    @property
    def du(self) -> float:
        return float(self.u[1] - self.u[0])

    @property
    def dv(self) -> float:
        return float(self.v[1] - self.v[0])


@dataclass(frozen=True)
class SurfaceFrame:
    point: np.ndarray
    N: np.ndarray
    Nh_norm: float
    nu_h: np.ndarray
    Z: np.ndarray
    S: np.ndarray


# --- stencils ----------------------------------------------------------------


def _d1(f, axis, h):
    n = f.shape[axis]
    s = lambda a, b: np.take(f, np.arange(a, n + b), axis=axis)  # noqa: E731
    return (-s(4, 0) + 8 * s(3, -1) - 8 * s(1, -3) + s(0, -4)) / (12 * h)


def _d2(f, axis, h):
    n = f.shape[axis]
    s = lambda a, b: np.take(f, np.arange(a, n + b), axis=axis)  # noqa: E731
    return (-s(4, 0) + 16 * s(3, -1) - 30 * s(2, -2) + 16 * s(1, -3) - s(0, -4)) / (12 * h * h)


def _crop(f, axis):
    n = f.shape[axis]
    return np.take(f, np.arange(MARGIN, n - MARGIN), axis=axis)


_LEVI = np.zeros((4, 4, 4, 4))
for perm in itertools.permutations(range(4)):
    inv = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
    _LEVI[perm] = -1.0 if inv % 2 else 1.0


def cross4(a, b, c) -> np.ndarray:
    """Vector orthogonal to ``a, b, c`` with length equal to their 3-volume."""
    return np.einsum("ijkl,...j,...k,...l->...i", _LEVI, a, b, c)


# --- geometry on a block -----------------------------------------------------


@dataclass(frozen=True)
class _Geometry:
    p: np.ndarray
    Fu: np.ndarray
    Fv: np.ndarray
    N: np.ndarray
    normal_V: np.ndarray
    Nh_norm: np.ndarray
    nu_h: np.ndarray
    Z: np.ndarray
    S: np.ndarray
    II_ZZ: np.ndarray
    Z_coords: np.ndarray
    H: np.ndarray


def _geometry(block: np.ndarray, hu: float, hv: float, orientation) -> _Geometry:
    """Surface quantities at the interior of ``block`` (a window of the grid)."""
    p = _crop(_crop(block, 0), 1)
    Fu = _crop(_d1(block, 0, hu), 1)
    Fv = _crop(_d1(block, 1, hv), 0)
    Fuu = _crop(_d2(block, 0, hu), 1)
    Fvv = _crop(_d2(block, 1, hv), 0)
    Fuv = _d1(_d1(block, 0, hu), 1, hv)

    raw = cross4(p, Fu, Fv)
    N = raw / s3core.norm(raw)[..., None]
    V = vertical(p)
    if isinstance(orientation, str):
        ref = Fu if orientation == "z_along_u" else Fv
        # Z = i N_h / |N_h| and <i N_h, X> = -<N, i X> for tangent X
        sign = np.sign(-inner(N, left_i(ref)))
    else:
        sign = np.sign(inner(N, _crop(_crop(orientation, 0), 1)))
    sign = np.where(sign == 0, 1.0, sign)
    N = N * sign[..., None]

    nV = inner(N, V)
    Nh = N - nV[..., None] * V
    Nh_norm = s3core.norm(Nh)
    with np.errstate(divide="ignore", invalid="ignore"):
        nu_h = Nh / Nh_norm[..., None]
    Z = left_i(nu_h)
    S = nV[..., None] * nu_h - Nh_norm[..., None] * V

    E, Fm, G = inner(Fu, Fu), inner(Fu, Fv), inner(Fv, Fv)
    zu, zv = inner(Z, Fu), inner(Z, Fv)
    det = E * G - Fm * Fm
    alpha = (G * zu - Fm * zv) / det
    beta = (E * zv - Fm * zu) / det
    second = (alpha**2)[..., None] * Fuu + (2 * alpha * beta)[..., None] * Fuv + (beta**2)[..., None] * Fvv
    II = inner(N, second)
    with np.errstate(divide="ignore", invalid="ignore"):
        H = II / (2 * Nh_norm)
    return _Geometry(p, Fu, Fv, N, nV, Nh_norm, nu_h, Z, S, II, np.stack([alpha, beta], -1), H)


def _window(patch: ParamPatch, i: int, j: int, radius: int):
    nu, nv = patch.shape
    if not (radius <= i < nu - radius and radius <= j < nv - radius):
        raise IndexError(f"({i}, {j}) is closer than {radius} cells to the border")
    sl = (slice(i - radius, i + radius + 1), slice(j - radius, j + radius + 1))
    orient = patch.orientation
    if not isinstance(orient, str):
        orient = orient[sl]
    return patch.grid[sl], orient


def _point_geometry(patch: ParamPatch, i: int, j: int) -> _Geometry:
    block, orient = _window(patch, i, j, MARGIN)
    return _geometry(block, patch.du, patch.dv, orient)


def frame_at_patch(patch: ParamPatch, i: int, j: int, singular_tol: float | None = None) -> SurfaceFrame:
    if singular_tol is None:
        singular_tol = DEFAULT.tolerances.singular
    g = _point_geometry(patch, i, j)
    nh = float(g.Nh_norm[0, 0])
    if nh < singular_tol:
        raise SingularPointError(f"|N_h| = {nh:.3g} below {singular_tol:g} at ({i}, {j})")
    return SurfaceFrame(
        point=g.p[0, 0], N=g.N[0, 0], Nh_norm=nh, nu_h=g.nu_h[0, 0], Z=g.Z[0, 0], S=g.S[0, 0]
    )


def mean_curvature_estimate(
    patch: ParamPatch,
    i: int,
    j: int,
    singular_tol: float | None = None,
    conditioning_tol: float | None = None,
) -> float:
    """``H = II(Z, Z) / (2 |N_h|)`` at grid point ``(i, j)``.

    ``II(Z, Z)`` is the normal component of the acceleration of the
    parameter-plane line through ``(u_i, v_j)`` whose velocity is ``Z``.
    """
    tols = DEFAULT.tolerances
    singular_tol = tols.singular if singular_tol is None else singular_tol
    conditioning_tol = tols.conditioning if conditioning_tol is None else conditioning_tol
    g = _point_geometry(patch, i, j)
    nh = float(g.Nh_norm[0, 0])
    if nh < singular_tol:
        raise SingularPointError(f"|N_h| = {nh:.3g} below {singular_tol:g} at ({i}, {j})")
    if nh < conditioning_tol:
        warnings.warn(
            f"|N_h| = {nh:.3g} at ({i}, {j}); mean curvature estimate is ill conditioned",
            ConditioningWarning,
            stacklevel=2,
        )
    return float(g.H[0, 0])


@dataclass(frozen=True)
class CurvatureField:
    """Grid-shaped estimator output; NaN where no estimate is produced."""

    H: np.ndarray
    Nh_norm: np.ndarray
    normal_V: np.ndarray
    singular: np.ndarray
    suppressed: np.ndarray


def mean_curvature_field(
    patch: ParamPatch,
    singular_tol: float | None = None,
    conditioning_tol: float | None = None,
) -> CurvatureField:
    """Vectorized estimator over the whole grid.

    Estimates are suppressed (NaN) within two cells of the border and where
    ``|N_h|`` is below the conditioning threshold.
    """
    tols = DEFAULT.tolerances
    singular_tol = tols.singular if singular_tol is None else singular_tol
    conditioning_tol = tols.conditioning if conditioning_tol is None else conditioning_tol
    g = _geometry(patch.grid, patch.du, patch.dv, patch.orientation)
    shape = patch.shape
    H = np.full(shape, np.nan)
    nh = np.full(shape, np.nan)
    nv_ = np.full(shape, np.nan)
    inner_sl = (slice(MARGIN, shape[0] - MARGIN), slice(MARGIN, shape[1] - MARGIN))
    nh[inner_sl] = g.Nh_norm
    nv_[inner_sl] = g.normal_V
    ok = g.Nh_norm >= conditioning_tol
    H[inner_sl] = np.where(ok, g.H, np.nan)
    singular = np.zeros(shape, dtype=bool)
    singular[inner_sl] = g.Nh_norm < singular_tol
    if patch.singular is not None:
        singular |= patch.singular
    suppressed = np.isnan(H)
    return CurvatureField(H, nh, nv_, singular, suppressed)


def characteristic_residual(patch: ParamPatch, i: int, j: int, H: float) -> float:
    """``|D_Z Z + 2 H J(Z)|`` at ``(i, j)`` with ``Z`` the characteristic field.

    ``D_Z Z`` is the tangential part of the flat derivative of the gridded
    field ``Z`` along ``Z``.
    """
    radius = 2 * MARGIN
    block, orient = _window(patch, i, j, radius)
    g = _geometry(block, patch.du, patch.dv, orient)
    if np.any(~np.isfinite(g.Z)):
        raise SingularPointError(f"characteristic field undefined near ({i}, {j})")
    Zu = _crop(_d1(g.Z, 0, patch.du), 1)[0, 0]
    Zv = _crop(_d1(g.Z, 1, patch.dv), 0)[0, 0]
    c = MARGIN
    alpha, beta = g.Z_coords[c, c]
    p, Z = g.p[c, c], g.Z[c, c]
    DZZ = s3core.tangent_part(alpha * Zu + beta * Zv, p)
    return float(np.linalg.norm(DZZ + 2 * H * s3core.apply_J(Z, p)))


def area_estimate(patch: ParamPatch) -> float:
    """Midpoint-rule integral of ``|N_h|`` against the Riemannian area element."""
    F = patch.grid
    hu, hv = patch.du, patch.dv
    a, b, c, d = F[:-1, :-1], F[1:, :-1], F[:-1, 1:], F[1:, 1:]
    Fu = (b + d - a - c) / (2 * hu)
    Fv = (c + d - a - b) / (2 * hv)
    p = s3core.normalize(a + b + c + d)
    Fu = s3core.tangent_part(Fu, p)
    Fv = s3core.tangent_part(Fv, p)
    raw = cross4(p, Fu, Fv)  # |raw| = sqrt(EG - F^2)
    raw_norm = s3core.norm(raw)
    with np.errstate(divide="ignore", invalid="ignore"):
        nV = np.where(raw_norm > 0, inner(raw, vertical(p)) / raw_norm, 0.0)
    Nh_norm = np.sqrt(np.clip(1.0 - nV**2, 0.0, None))
    return float(np.sum(Nh_norm * raw_norm) * hu * hv)


def riemannian_area(patch: ParamPatch) -> float:
    F = patch.grid
    hu, hv = patch.du, patch.dv
    a, b, c, d = F[:-1, :-1], F[1:, :-1], F[:-1, 1:], F[1:, 1:]
    Fu = (b + d - a - c) / (2 * hu)
    Fv = (c + d - a - b) / (2 * hv)
    p = s3core.normalize(a + b + c + d)
    return float(np.sum(s3core.norm(cross4(p, Fu, Fv))) * hu * hv)


# --- singular curves and orthogonality --------------------------------------


def _tangent_fd(points: np.ndarray, h: float, periodic: bool) -> np.ndarray:
    """Fourth-order tangent of a sampled curve; NaN at the two end samples when open."""
    if periodic:
        # drop a duplicated endpoint before wrapping
        closed = np.allclose(points[0], points[-1], atol=1e-12)
        base = points[:-1] if closed else points
        ext = np.concatenate([base[-2:], base, base[:2]])
        t = _d1(ext, 0, h)
        if closed:
            t = np.concatenate([t, t[:1]])
        return t
    t = np.full_like(points, np.nan)
    t[MARGIN:-MARGIN] = _d1(points, 0, h)
    return t


@dataclass(frozen=True)
class SingularCurve:
    """Sampled singular curve on one edge of a patch (``edge`` is 0 or -1 in v)."""

    eps: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    edge: int

    @classmethod
    def from_samples(cls, eps, points, edge: int, periodic: bool = False) -> "SingularCurve":
        eps = np.asarray(eps, dtype=float)
        points = np.asarray(points, dtype=float)
        t = _tangent_fd(points, float(eps[1] - eps[0]), periodic)
        return cls(eps, points, t, edge)


@dataclass(frozen=True)
class OrthogonalityResult:
    max_inner: float
    vacuous: bool = False
    samples: int = 0


def orthogonality_check(patch: ParamPatch, singular_curve: SingularCurve | None) -> OrthogonalityResult:
    """Largest ``|<gamma', Gamma'/|Gamma'|>|`` where characteristic geodesics meet the curve.

    ``gamma'`` is taken from ``patch.meta["edge_velocity"]`` when present
    (analytic velocities of the ruling geodesics), otherwise from finite
    differences of the patch in ``v``.  Isolated singular points give a
    vacuous result.
    """
    if singular_curve is None:
        return OrthogonalityResult(0.0, vacuous=True)
    edge = singular_curve.edge
    vel = patch.meta.get("edge_velocity", {}).get(edge)
    if vel is None:
        g = patch.grid
        h = patch.dv
        if edge == 0:
            vel = (-3 * g[:, 0] + 4 * g[:, 1] - g[:, 2]) / (2 * h)
        else:
            vel = (3 * g[:, -1] - 4 * g[:, -2] + g[:, -3]) / (2 * h)
    vel = vel / s3core.norm(vel)[..., None]
    T = singular_curve.tangents
    ok = np.all(np.isfinite(T), axis=-1)
    Tn = T[ok] / s3core.norm(T[ok])[..., None]
    vals = np.abs(inner(vel[ok], Tn))
    return OrthogonalityResult(float(vals.max()), vacuous=False, samples=int(ok.sum()))
