"""Rotational CMC profiles: tau-periods three ways.

Closed form, quadrature over one monotone arc, and direct integration
between two turning points (twice the tau gap of the mirror meridians).
"""

import argparse
import math

from s3geom.rotational import profile as rot


def integrated_period(E, H):
    sol = rot.integrate_profile(rot.launch_state(E, H), H, 5.0)
    if sol.lo.mirror is None or sol.hi.mirror is None:
        return math.nan
    return 2 * abs(sol.hi.mirror - sol.lo.mirror)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--H", type=float, nargs="+", default=[0.0, 1 / math.sqrt(3), 1.0, 3.0])
    args = parser.parse_args()
    print(f"{'H':>8} {'kind':>9} {'E':>9} {'closed':>12} {'quadrature':>12} {'integrated':>12}")
    for H in args.H:
        cf = rot.closed_form_periods(H)
        levels = [(0.5 * rot.clifford_energy(H), cf.T_unduloid)]
        if H > 0:
            levels.append((-0.5 * H, 2 * cf.tau2_nodoid))
        for E, closed in levels:
            kind = rot.classify(E, H).kind.value
            quad = rot.period_by_quadrature(E, H)
            print(f"{H:8.4f} {kind:>9} {E:9.4f} {closed:12.9f} {quad:12.9f} {integrated_period(E, H):12.9f}")
        if H > 0:
            print(f"{H:8.4f} {'Petal':>9} {-H:9.4f} tau0 closed {cf.tau0_petal:.9f}, "
                  f"integrated to the pole {rot.petal_axis_offset(H):.9f}")


if __name__ == "__main__":
    main()
