"""Error of the finite-difference mean curvature estimator against grid size."""

import argparse
import math
import warnings

import numpy as np

from s3geom import surfaces as srf


def max_error(patch, exact):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", srf.ConditioningWarning)
        H = srf.mean_curvature_field(patch).H
    return float(np.nanmax(np.abs(H - exact)))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64, 128, 256])
    args = parser.parse_args()
    rho, lam = 0.8, 1.0
    exact_torus = (2 * rho**2 - 1) / (2 * rho * math.sqrt(1 - rho**2))
    print(f"{'n':>5} {'Clifford rho=0.8':>18} {'rate':>6} {'sphere lam=1':>14} {'rate':>6}")
    prev = None
    for n in args.sizes:
        e_t = max_error(srf.clifford_patch(rho, n, n), exact_torus)
        e_s = max_error(srf.sphere_patch(lam, n, n), lam)
        if prev is None:
            rates = ("", "")
        else:
            ratio = n / prev[0]
            rates = tuple(f"{math.log(old / new) / math.log(ratio):6.2f}" for old, new in zip(prev[1:], (e_t, e_s)))
        print(f"{n:5d} {e_t:18.3e} {rates[0]:>6} {e_s:14.3e} {rates[1]:>6}")
        prev = (n, e_t, e_s)


if __name__ == "__main__":
    main()
