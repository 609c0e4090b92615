"""``s3`` command line: geodesic traces, surface meshes and verification reports."""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geodesics as geo
from . import io as s3io
from . import s3core
from . import surfaces as srf
from .config import DEFAULT, Config
from .rotational import profile as rot
from .verify import SUITES, run_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC, EXIT_INVARIANT = 0, 1, 2, 3, 4
log = logging.getLogger("s3geom.cli")


class UsageError(Exception):
    pass


class InvariantFailure(Exception):
    def __init__(self, invariant: str, report: dict):
        super().__init__(invariant)
        self.invariant = invariant
        self.report = report


def worker_count() -> int:
    raw = os.environ.get("S3_THREADS")
    if raw is None:
        return max(1, min(8, os.cpu_count() or 1))
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"S3_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("S3_THREADS must be >= 1")
    return n


def _vector4(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected four comma-separated numbers, got {text!r}") from None
    if len(vals) != 4 or not all(map(math.isfinite, vals)):
        raise argparse.ArgumentTypeError(f"expected four finite comma-separated numbers, got {text!r}")
    return np.array(vals)


def _resolution(text: str) -> int:
    n = int(text)
    if n < 3:
        raise argparse.ArgumentTypeError("resolutions must be >= 3")
    return n


def _finite(text: str) -> float:
    x = float(text)
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return x


def _positive(text: str) -> float:
    x = _finite(text)
    if x <= 0:
        raise argparse.ArgumentTypeError("expected a positive number")
    return x


def load_config(args) -> Config:
    cfg = Config.load(args.config) if args.config else DEFAULT
    tol, rat = {}, {}
    if args.rationality_tol is not None:
        rat["tol"] = args.rationality_tol
    if args.max_denominator is not None:
        rat["max_denominator"] = args.max_denominator
    if args.energy_tol is not None:
        tol["energy_drift"] = args.energy_tol
    if args.rtol is not None:
        tol["ode_rtol"] = args.rtol
    return cfg.with_overrides(tolerances=tol, rationality=rat)


def _outputs(out: str, suffixes) -> dict:
    base = Path(out)
    if base.suffix in suffixes:
        base = base.with_suffix("")
    if base.parent and not base.parent.exists():
        raise UsageError(f"output directory {base.parent} does not exist")
    return {sfx: Path(str(base) + sfx) for sfx in suffixes}


# geodesic ----------------------------------------------------------------


def cmd_geodesic(args, cfg: Config) -> int:
    p = s3core.normalize(args.p)
    spec = geo.GeodesicSpec.from_angle(p, args.v_theta, args.lam)
    s = np.linspace(0.0, args.length, args.samples)
    pts = geo.geodesic_point(spec, s)
    hop = s3core.hopf(pts)
    residual = float(np.abs(geo.geodesic_ode_residual(spec, s)).max())
    cls = geo.classify_geodesic(args.lam, cfg.rationality.tol, cfg.rationality.max_denominator)
    paths = _outputs(args.out, (".csv", ".json"))
    rows = [[*map(float, (si, *pt, *h))] for si, pt, h in zip(s, pts, hop)]
    s3io.write_csv(paths[".csv"], ["s", "x1", "y1", "x2", "y2", "hopf_y1", "hopf_x2", "hopf_y2"], rows)
    report = {
        "command": "geodesic",
        "lambda": args.lam,
        "kind": cls.kind.value,
        "ratio": cls.ratio,
        "rho": cls.rho,
        "slope": cls.slope,
        "residual_max": residual,
    }
    if cls.period is not None:
        report["period"] = cls.period
    s3io.write_json(paths[".json"], report)
    print(f"{cls.kind.value} geodesic, ratio {cls.ratio:.12g}; wrote {paths['.csv']} and {paths['.json']}")
    if residual >= 1e-9:
        raise InvariantFailure("geodesic equation residual", report)
    return EXIT_OK


# surfaces -----------------------------------------------------------------


@dataclass
class SurfaceJob:
    patches: list  # (ParamPatch, expected H)
    singular_curves: list = field(default_factory=list)  # (patch, SingularCurve)
    extra: dict = field(default_factory=dict)
    expected_tol: float = 1e-3


def _sphere_job(args, cfg):
    patch = srf.sphere_patch(args.lam, args.n_u, args.n_v)
    return SurfaceJob([(patch, args.lam)])


def _clifford_job(args, cfg):
    if not 0 < args.rho < 1:
        raise UsageError("--rho must lie in (0, 1)")
    patch = srf.clifford_patch(args.rho, args.n_u, args.n_v)
    return SurfaceJob([(patch, geo.torus_curvature(args.rho))], expected_tol=1e-4)


def _ruled_job(args, cfg):
    curve = srf.wobbly_curve(args.amplitude) if args.amplitude else srf.great_circle_curve()
    sheet = srf.ruled_patch(curve, args.lam, side=SIDES[args.side], n_eps=args.n_u, n_s=args.n_v)
    job = SurfaceJob([(sheet.patch, args.lam)])
    job.singular_curves = [(sheet.patch, sheet.start_curve), (sheet.patch, sheet.end_curve)]
    job.extra["curve"] = curve.label
    job.extra["geodesic_curve"] = curve.geodesic is not None
    return job


def _cmc_torus_job(args, cfg):
    sheets, layout = srf.cmc_torus_patch(args.mu, args.lam, n_steps=args.steps, n_eps=args.n_u,
                                         n_s=args.n_v, policy=cfg.rationality)
    job = SurfaceJob([(sh.patch, sh.lam) for sh in sheets])
    job.singular_curves = [(sh.patch, c) for sh in sheets for c in (sh.start_curve, sh.end_curve)]
    job.extra.update(
        theta1=layout.theta1, theta2=layout.theta2,
        theta1_tilde=layout.theta1_tilde, theta2_tilde=layout.theta2_tilde,
        closes=layout.closes, geodesic_residual_max=max(layout.geodesic_residual.values()),
    )
    overlap = srf.self_intersection_candidates(sheets)
    job.extra["self_intersection_candidates"] = overlap.candidates
    job.extra["coincident_sheets"] = [list(pair) for pair in overlap.coincident_sheets]
    return job


def _rotational_job(args, cfg):
    tol = cfg.tolerances
    cls = rot.classify(args.E, args.H, cfg.rationality)
    H, E = args.H, args.E
    kind = cls.kind
    if kind is rot.DelaunayKind.MERIDIAN_SPHERE:
        init = rot.ProfileState(0.5, 0.0, 0.0)
    elif kind is rot.DelaunayKind.SPHERE:
        sign = 1.0 if H > 0 else -1.0
        init = rot.ProfileState(math.atan(1 / abs(H)), 0.0, 0.5 * math.pi if sign > 0 else 1.5 * math.pi)
    else:
        init = rot.launch_state(E, H)
    sol = rot.integrate_profile(init, H, 40.0, tol=tol.energy_drift, rtol=tol.ode_rtol, symmetric=True)
    if sol.equilibrium is not None:
        length = 2 * math.pi * math.cos(init.omega)
        s_range = (0.0, length)
    elif sol.lo.mirror is not None and sol.hi.mirror is not None:
        s_range = (sol.lo.s, sol.lo.s + 2 * (sol.hi.s - sol.lo.s))
    else:
        s_range = sol.domain
    patch = rot.revolve(sol, n_theta=args.n_v, n_s=args.n_u, s_range=s_range)
    s = np.linspace(*sol.domain, 4001)
    w, _, sig = sol(s)
    drift = float(np.abs(rot.energy(w, sig, H) - sol.E).max())
    job = SurfaceJob([(patch, H)])
    job.extra.update(classification=kind.value, compact=cls.compact, energy_drift=drift,
                     profile_events=[e.kind for e in sol.events])
    if cls.period is not None:
        job.extra["period"] = cls.period
    if cls.embedding_k is not None:
        job.extra["embedding_k_candidate"] = cls.embedding_k
    if kind in (rot.DelaunayKind.UNDULOID, rot.DelaunayKind.NODOID):
        job.extra["period_quadrature"] = rot.period_by_quadrature(E, H)
    job.extra["_drift_limit"] = 1e-8 * max(1.0, s[-1] - s[0])
    return job


SIDES = {"plus": srf.PLUS_J, "minus": srf.MINUS_J}

# (n_u, n_v): profiles need fine sampling along s for the curvature estimate
DEFAULT_RESOLUTION = {
    "sphere": (128, 128),
    "clifford": (128, 128),
    "ruled": (256, 64),
    "cmc-torus": (128, 32),
    "rotational": (512, 64),
}

SURFACE_BUILDERS = {
    "sphere": _sphere_job,
    "clifford": _clifford_job,
    "ruled": _ruled_job,
    "cmc-torus": _cmc_torus_job,
    "rotational": _rotational_job,
}


def _field(patch):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", srf.ConditioningWarning)
        return srf.mean_curvature_field(patch)


def surface_report(job: SurfaceJob, cfg: Config, threads: int = 1):
    with ThreadPoolExecutor(max_workers=threads) as pool:
        fields_ = list(pool.map(_field, [p for p, _ in job.patches]))
    H_vals, dev_vals, singular, area = [], [], 0, 0.0
    for (patch, expected), cf in zip(job.patches, fields_):
        ok = np.isfinite(cf.H) & ~cf.singular
        H_vals.append(cf.H[ok])
        dev_vals.append(np.abs(cf.H[ok] - expected))
        singular += int(cf.singular.sum())
        area += srf.area_estimate(patch)
    H_all = np.concatenate(H_vals) if H_vals else np.array([])
    dev_all = np.concatenate(dev_vals) if dev_vals else np.array([])
    orth = None
    if job.singular_curves:
        orth = max(srf.orthogonality_check(p, c).max_inner for p, c in job.singular_curves)
    report = {
        "H_mean": float(H_all.mean()) if H_all.size else None,
        "H_stddev": float(H_all.std()) if H_all.size else None,
        "H_max_deviation": float(dev_all.max()) if dev_all.size else None,
        "singular_points": singular,
        "orthogonality_max": orth,
        "area_estimate": area,
    }
    return report, fields_


def cmd_surface(args, cfg: Config) -> int:
    threads = worker_count()
    n_u, n_v = DEFAULT_RESOLUTION[args.subkind]
    args.n_u = args.n_u or n_u
    args.n_v = args.n_v or n_v
    job = SURFACE_BUILDERS[args.subkind](args, cfg)
    report, fields_ = surface_report(job, cfg, threads)
    drift_limit = job.extra.pop("_drift_limit", None)
    report.update(job.extra)
    report["command"] = f"surface {args.subkind}"

    meshes, attrs = [], []
    pole = s3core.normalize(args.pole)
    for (patch, _), cf in zip(job.patches, fields_):
        mesh = s3io.grid_mesh(patch.grid, pole, cfg.tolerances.pole_drop)
        meshes.append(mesh)
        idx = mesh.source_index
        attrs.append(np.stack([cf.Nh_norm.ravel()[idx], cf.H.ravel()[idx], cf.singular.ravel()[idx]], axis=-1))
    offset, verts, faces = 0, [], []
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + offset)
        offset += len(m.vertices)
    mesh = s3io.Mesh(np.concatenate(verts), np.concatenate(faces), np.arange(offset), sum(m.dropped for m in meshes))
    attr = np.concatenate(attrs)
    report["vertices"] = len(mesh.vertices)
    report["faces"] = len(mesh.faces)
    report["dropped_vertices"] = mesh.dropped

    paths = _outputs(args.out, (".obj", ".csv", ".json"))
    text = s3io.obj_text(mesh)
    V, F = s3io.parse_obj(text)
    roundtrip = V.shape == mesh.vertices.shape and np.array_equal(F, mesh.faces) and \
        np.allclose(V, mesh.vertices, rtol=1e-15, atol=0)
    paths[".obj"].write_text(text, encoding="utf-8")
    rows = [[i + 1, *map(float, v), float(a[0]), float(a[1]), int(a[2])] for i, (v, a) in enumerate(zip(mesh.vertices, attr))]
    s3io.write_csv(paths[".csv"], ["vertex", "x", "y", "z", "nh_norm", "H", "singular"], rows)

    failures = []
    if not roundtrip:
        failures.append("OBJ round-trip")
    if report["H_max_deviation"] is None or report["H_max_deviation"] > job.expected_tol:
        failures.append("constant mean curvature")
    if report["orthogonality_max"] is not None and job.extra.get("geodesic_curve", True) \
            and report["orthogonality_max"] > 1e-5:
        failures.append("orthogonality at singular curves")
    if drift_limit is not None and report["energy_drift"] > drift_limit:
        failures.append("energy conservation")
    if args.subkind == "rotational" and "period_quadrature" in report \
            and abs(report["period_quadrature"] - report["period"]) > 1e-6:
        failures.append("closed-form period")
    report["failed_invariants"] = failures
    s3io.write_json(paths[".json"], report)
    summary = f"H_mean {report['H_mean']:.6g}" if report["H_mean"] is not None else "no regular points"
    print(f"surface {args.subkind}: {summary}; wrote {paths['.obj']}")
    if "classification" in report:
        period = report.get("period")
        print(f"classification {report['classification']}" + (f", period {period:.12g}" if period else ""))
    if failures:
        raise InvariantFailure(", ".join(failures), report)
    return EXIT_OK


# verify ----------------------------------------------------------------------


def cmd_verify(args, cfg: Config) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    threads = worker_count()
    if threads > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda n: run_suites([n], cfg), names))
        report = {"suites": {}, "failures": []}
        for part in parts:
            report["suites"].update(part["suites"])
            report["failures"] += part["failures"]
        report["passed"] = not report["failures"]
    else:
        report = run_suites(names, cfg)
    for name in names:
        for c in report["suites"][name]["checks"]:
            mark = "PASS" if c["passed"] else "FAIL"
            print(f"[{mark}] {name}: {c['name']} (value {c['value']:.3g}, limit {c['limit']:.3g}) {c['detail']}".rstrip())
    if args.json:
        # timings vary between runs; leave them out of the file for reproducibility
        stable = {"suites": {n: {"checks": s["checks"]} for n, s in report["suites"].items()},
                  "failures": report["failures"], "passed": report["passed"]}
        s3io.write_json(args.json, stable)
    if report["failures"]:
        print("failures:\n  " + "\n  ".join(report["failures"]))
        return EXIT_FAIL
    print("all checks passed")
    return EXIT_OK


# parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="s3", description=__doc__)
    parser.add_argument("--config", help="JSON file with 'tolerances' and 'rationality' sections")
    parser.add_argument("--rationality-tol", type=_positive)
    parser.add_argument("--max-denominator", type=int)
    parser.add_argument("--energy-tol", type=_positive, help="per-unit-length energy drift allowed per step")
    parser.add_argument("--rtol", type=_positive, help="relative tolerance of the profile integrator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geodesic", help="sample a geodesic and classify it")
    g.add_argument("--lambda", dest="lam", type=_finite, required=True)
    g.add_argument("--p", type=_vector4, default=s3core.IDENTITY.copy(), help="start point x1,y1,x2,y2")
    g.add_argument("--v-theta", type=_finite, default=0.0, help="velocity angle in the (E1, E2) frame")
    g.add_argument("--length", type=_positive, default=2 * math.pi)
    g.add_argument("--samples", type=_resolution, default=1001)
    g.add_argument("--out", required=True, help="output path; .csv and .json are written")
    g.set_defaults(func=cmd_geodesic)

    s = sub.add_parser("surface", help="build a surface mesh and report on it")
    s.add_argument("subkind", choices=sorted(SURFACE_BUILDERS))
    s.add_argument("--lambda", dest="lam", type=_finite, default=1.0)
    s.add_argument("--rho", type=_finite, default=math.sqrt(0.5))
    s.add_argument("--mu", type=_finite, default=0.0)
    s.add_argument("--H", type=_finite, default=0.0)
    s.add_argument("--E", type=_finite, default=0.3)
    s.add_argument("--side", choices=sorted(SIDES), default="plus", help="ruled: leave the curve along +J or -J")
    s.add_argument("--amplitude", type=_finite, default=0.0, help="ruled: wobble of the base curve (0 = great circle)")
    s.add_argument("--steps", type=int, default=2, help="cmc-torus: generations per branch")
    s.add_argument("--n-u", type=_resolution, help="first grid resolution (default depends on the surface)")
    s.add_argument("--n-v", type=_resolution, help="second grid resolution (default depends on the surface)")
    s.add_argument("--pole", type=_vector4, default=s3core.NORTH_POLE.copy(), help="stereographic pole")
    s.add_argument("--out", required=True, help="output path; .obj, .csv and .json are written")
    s.set_defaults(func=cmd_surface)

    v = sub.add_parser("verify", help="run invariant suites")
    v.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    v.add_argument("--json", help="write the report here")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"s3: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantFailure as exc:
        print(f"s3: invariant failed: {exc.invariant}", file=sys.stderr)
        return EXIT_INVARIANT
    except rot.NoSolutionError as exc:
        print(f"s3: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, OSError) as exc:
        print(f"s3: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"s3: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
