"""Write OBJ/CSV/JSON for one surface of each kind through the ``s3`` command."""

import argparse
import sys
from pathlib import Path

from s3geom import cli

GALLERY = {
    "sphere_lambda1": ["surface", "sphere", "--lambda", "1"],
    "clifford_rho06": ["surface", "clifford", "--rho", "0.6"],
    "ruled_wobbly": ["surface", "ruled", "--lambda", "0.5", "--amplitude", "0.4"],
    "cmc_torus_mu0_lambda1": ["surface", "cmc-torus", "--mu", "0", "--lambda", "1"],
    "unduloid_minimal": ["surface", "rotational", "--H", "0", "--E", "0.3"],
    "nodoid_H1": ["surface", "rotational", "--H", "1", "--E", "-0.5"],
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("gallery"))
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for name, argv in GALLERY.items():
        code = cli.main([*argv, "--out", str(args.out_dir / name)])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
