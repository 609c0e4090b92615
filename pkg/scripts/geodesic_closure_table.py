"""Closed/dense classification of geodesics for a range of curvatures.

For each rational ratio lam/sqrt(1+lam^2) = P/Q the exact period is set
against the first return found by scanning the curve.
"""

import argparse
import math
from fractions import Fraction

import numpy as np

from s3geom import geodesics as geo
from s3geom import s3core


def first_return(spec, s_max, n=200_000):
    s = np.linspace(0.05, s_max, n)
    g0, v0 = geo.geodesic_point(spec, 0.0), geo.geodesic_velocity(spec, 0.0)
    miss = (np.linalg.norm(geo.geodesic_point(spec, s) - g0, axis=-1)
            + np.linalg.norm(geo.geodesic_velocity(spec, s) - v0, axis=-1))
    k = int(np.argmin(miss))
    return s[k], miss[k]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-q", type=int, default=6, help="largest denominator Q")
    args = parser.parse_args()
    print(f"{'P/Q':>6} {'lambda':>10} {'rho':>8} {'period':>12} {'scan':>12} {'miss':>9}")
    seen = set()
    for q in range(1, args.max_q + 1):
        for p in range(-q + 1, q):
            frac = Fraction(p, q)
            if frac in seen:
                continue
            seen.add(frac)
            r = float(frac)
            lam = r / math.sqrt(1 - r * r)
            period = geo.period_from_fraction(lam, frac)
            spec = geo.GeodesicSpec.from_angle(s3core.IDENTITY, 0.0, lam)
            s, miss = first_return(spec, 1.01 * period)
            print(f"{str(frac):>6} {lam:10.5f} {geo.torus_radius(lam):8.5f} {period:12.8f} {s:12.8f} {miss:9.2e}")
    for lam in (1.0, math.pi, math.e):
        c = geo.classify_geodesic(lam)
        print(f"lambda={lam:.6f}: {c.kind.value}, ratio {c.ratio:.12f}")


if __name__ == "__main__":
    main()
