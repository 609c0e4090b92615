"""Oracles shared by several test modules."""

import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from s3geom import geodesics as geo
from s3geom import surfaces as srf


def max_distance_to_sphere(patch, profile, H):
    """Largest distance from a revolved ``E = 0`` profile to the sphere built from geodesics.

    The profile's top (``tau`` at the start of its domain) is rotated onto
    ``(1, 0, 0, 0)``; each point is then compared with the generator through
    its ``(x2, y2)`` angle, minimising over that generator's arc length.
    """
    eta = math.sqrt(1 + H * H)
    shift = -profile(np.array([profile.domain[0]]))[1, 0]
    c, s = math.cos(shift), math.sin(shift)
    grid = np.array(patch.grid.reshape(-1, 4))
    x1, y1 = grid[:, 0].copy(), grid[:, 1].copy()
    grid[:, 0], grid[:, 1] = c * x1 - s * y1, s * x1 + c * y1
    ss = np.linspace(0, math.pi / eta, 4001)

    def dist(q, t):
        theta = np.arctan2(q[3], q[2]) + H * t
        return np.linalg.norm(srf.sphere_coordinates(H, theta, t) - q, axis=-1)

    worst = 0.0
    for q in grid:
        k = int(np.argmin(dist(q, ss)))
        r = minimize_scalar(lambda t: dist(q, t), bounds=(ss[max(k - 1, 0)], ss[min(k + 1, ss.size - 1)]),
                            method="bounded", options={"xatol": 1e-14})
        worst = max(worst, float(r.fun))
    return worst


def closure_length_brute_force(spec, s_max, n=400_000):
    """Smallest s > 0.1 where position and velocity both come back, by scanning and refining."""
    s = np.linspace(0.1, s_max, n)
    g0, v0 = geo.geodesic_point(spec, 0.0), geo.geodesic_velocity(spec, 0.0)

    def miss(x):
        return float(np.linalg.norm(geo.geodesic_point(spec, x) - g0)
                     + np.linalg.norm(geo.geodesic_velocity(spec, x) - v0))

    d = np.linalg.norm(geo.geodesic_point(spec, s) - g0, axis=-1)
    d += np.linalg.norm(geo.geodesic_velocity(spec, s) - v0, axis=-1)
    def slope(x):  # half the derivative of the squared miss
        g, dg = geo.geodesic_point(spec, x), geo.geodesic_velocity(spec, x)
        return float(np.dot(g - g0, dg) + np.dot(dg - v0, geo.geodesic_acceleration(spec, x)))

    local_min = (d[1:-1] <= d[:-2]) & (d[1:-1] <= d[2:]) & (d[1:-1] < 0.05)
    for k in np.flatnonzero(local_min) + 1:
        x = brentq(slope, s[k - 1], s[k + 1], xtol=1e-15)
        if miss(x) < 1e-9:
            return x
    return None
