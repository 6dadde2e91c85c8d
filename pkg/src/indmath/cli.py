"""``indmath`` command line: one subcommand per case study.

All data artifacts go to the paths named on the command line; every
diagnostic goes to standard error. Engine failures exit with the code
attached to their error class (see :mod:`indmath.errors`).
"""

from __future__ import annotations

import argparse
import sys

from . import fileio
from .errors import IndmathError
from .fvm import DEFAULT_DOMAIN, DEFAULT_PARAMS, FvmParams, Grid3D, fvm_steady_solve, refinement_study
from .imaging import DetectionParams, detect_tripwires
from .inversion import build_design_matrix, solve_least_squares, solve_nnls
from .plume import Contaminant, DispersionSpec, concentration_grid, deposition
from .weldgeom import PipeJoint, clearance_check, full_seam

UNITS = """\
unit conventions:
  lengths and coordinates  m (weld geometry: any consistent length unit)
  angles                   --phi-deg in degrees; CSV theta columns in radians
  emission rate q          g/s              (column q_gps)
  wind speed               m/s              (column speed_mps)
  wind direction           degrees the wind blows TOWARD, counterclockwise
                           from +x (east)   (column dir_deg_toward)
  interval duration        s                (column duration_s)
  collector area           m^2              (column area_m2)
  deposition               mg/m^2           (column deposition_mg_m2)
  concentration            g/m^3
  settling velocity        m/s
  eddy diffusivity         m^2/s
"""

EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_STUDY_FAILED = 3  # fvm validate ran but the refinement study missed its bounds


def _emit(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- weld ---------------------------------------------------------------------


def cmd_weld(args) -> int:
    joint = PipeJoint.from_degrees(args.r1, args.r2, args.phi_deg)
    curves = full_seam(joint, args.samples)
    rows = []
    for curve in curves:
        for p in curve.points:
            rows.append((p.theta2, p.branch, p.x, p.y, p.z))
    violations = None
    if args.torch_radius is not None:
        violations = [
            (v.theta2, v.min_distance)
            for curve in curves
            for v in clearance_check(joint, curve, args.torch_radius, args.probe_length)
        ]
    fileio.write_csv(args.out, fileio.SEAM_COLUMNS, rows)
    _emit(f"weld: {len(curves)} curves x {args.samples} samples -> {args.out}")
    if violations is not None:
        _emit(f"weld: {len(violations)} torch clearance violations (torch radius {args.torch_radius})")
        if args.violations:
            fileio.write_csv(args.violations, ("theta2", "min_distance"), violations)
    return 0


# -- tripwire -----------------------------------------------------------------


def cmd_tripwire(args) -> int:
    img = fileio.read_pgm(args.input)
    params = DetectionParams(
        threshold=args.threshold,
        quantile=args.quantile,
        nms_window=tuple(args.nms),
        edge_quantile=args.edge_quantile,
        n_theta=args.n_theta,
    )
    features, overlay = detect_tripwires(img, params)
    rows = [(f.rho, f.theta, f.strength) for f in features]
    # compute everything before touching either artifact
    fileio.write_csv(args.lines, fileio.LINE_COLUMNS, rows)
    if args.overlay:
        fileio.write_pgm(args.overlay, overlay)
    _emit(f"tripwire: {len(features)} line features in {img.shape[1]}x{img.shape[0]} image")
    return 0


# -- plume --------------------------------------------------------------------


def _dispersion(args) -> DispersionSpec:
    if args.sigma_model == "constant":
        return DispersionSpec.constant(args.sigma_y, args.sigma_z)
    return DispersionSpec.power_law(args.sigma_y_a, args.sigma_y_b, args.sigma_z_a, args.sigma_z_b)


def _scenario(args):
    spec = _dispersion(args)
    contaminant = Contaminant(settling_velocity=args.settling_velocity)
    sc = fileio.ingest_scenario(args.sources, args.receptors, args.wind, spec, contaminant)
    _emit(f"scenario: {len(sc.sources)} sources, {len(sc.receptors)} receptors, {len(sc.wind)} wind intervals")
    return sc


def cmd_plume_forward(args) -> int:
    if args.receptors is None and args.grid_out is None:
        raise argparse.ArgumentTypeError("plume forward needs --receptors or --grid-out")
    if args.grid_out is not None and args.extent is None:
        raise argparse.ArgumentTypeError("--grid-out needs --extent")
    sc = _scenario(args)
    deps = None
    if args.receptors is not None and args.out is not None:
        deps = [deposition(sc.sources, r, sc.wind, sc.spec, sc.contaminant) for r in sc.receptors]
    grid = None
    if args.grid_out is not None:
        if not 0 <= args.interval < len(sc.wind):
            raise argparse.ArgumentTypeError(f"--interval must index one of {len(sc.wind)} wind intervals")
        grid = concentration_grid(sc.sources, sc.wind[args.interval], sc.spec, tuple(args.extent), (args.nx, args.ny))
    if deps is not None:
        fileio.write_receptors(args.out, sc.receptors, deps)
        _emit(f"plume forward: deposition at {len(deps)} receptors -> {args.out}")
    if grid is not None:
        fileio.write_csv(args.grid_out, fileio.GRID_COLUMNS, list(grid.rows()))
        _emit(f"plume forward: {args.nx}x{args.ny} concentration grid (g/m^3) -> {args.grid_out}")
    return 0


def cmd_plume_invert(args) -> int:
    sc = _scenario(args)
    G = build_design_matrix(sc.sources, sc.receptors, sc.wind, sc.spec, sc.contaminant)
    d = sc.measurements
    est = solve_least_squares(G, d) if args.lsq else solve_nnls(G, d)
    rows = [(sid, q, "nan", bool(a)) for sid, q, a in zip(G.source_ids, est.q, est.active)]
    fileio.write_csv(args.out, fileio.ESTIMATE_COLUMNS, rows)
    _emit(f"plume invert ({est.method}): residual_norm={est.residual_norm:.6g} mg/m^2 rank={est.rank} "
          f"condition={est.condition_number:.6g}")
    for note in est.warnings:
        _emit(f"warning: {note}")
    return 0


# -- fvm ----------------------------------------------------------------------


def cmd_fvm_validate(args) -> int:
    params = FvmParams(args.u, args.ky, args.kz, tuple(args.source), args.q)
    domain = dict(lx=args.lx, ly=args.ly, lz=args.lz)
    study = refinement_study(args.levels, params, domain)
    text = "\n".join(study.lines()) + "\n"
    field_rows = None
    if args.field_out:
        n = args.levels[0]
        grid = Grid3D.cube(n, **domain)
        fld = fvm_steady_solve(grid, params)
        xc, yc, zc = grid.centers()
        field_rows = [
            (i, j, k, xc[i], yc[j], zc[k], fld.values[i, j, k])
            for i in range(grid.nx)
            for j in range(grid.ny)
            for k in range(grid.nz)
        ]
    if args.out:
        fileio.atomic_write_bytes(args.out, text.encode())
    else:
        sys.stdout.write(text)
    if field_rows is not None:
        fileio.write_csv(args.field_out, fileio.FIELD_COLUMNS, field_rows)
    ok = all(p >= 0.8 for p in study.orders) and all(m <= 1e-6 for m in study.mass_balance)
    _emit(f"fvm validate: orders {', '.join(f'{p:.3f}' for p in study.orders)}; "
          f"{'consistent' if ok else 'CHECK FAILED'}")
    return 0 if ok else EXIT_STUDY_FAILED


# -- parser -------------------------------------------------------------------


def _add_scenario_args(p, receptors_required):
    p.add_argument("--sources", required=True, help="CSV id,x_m,y_m,h_m,q_gps")
    p.add_argument("--receptors", required=receptors_required, help="CSV id,x_m,y_m,area_m2,deposition_mg_m2")
    p.add_argument("--wind", required=True, help="CSV start,duration_s,speed_mps,dir_deg_toward")
    g = p.add_argument_group("dispersion")
    g.add_argument("--sigma-model", choices=("power", "constant"), default="power",
                   help="sigma = a * x**b in downwind metres (default), or constant sigmas")
    g.add_argument("--sigma-y-a", type=float, default=0.08)
    g.add_argument("--sigma-y-b", type=float, default=0.9)
    g.add_argument("--sigma-z-a", type=float, default=0.06)
    g.add_argument("--sigma-z-b", type=float, default=0.8)
    g.add_argument("--sigma-y", type=float, default=10.0, help="constant crosswind sigma (m)")
    g.add_argument("--sigma-z", type=float, default=5.0, help="constant vertical sigma (m)")
    g.add_argument("--settling-velocity", type=float, default=0.01, help="particle settling velocity (m/s)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(prog="indmath", description=__doc__, epilog=UNITS, formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weld", help="pipe-joint seam curves", epilog=UNITS, formatter_class=fmt,
                       description="Sample both intersection curves of a pipe joint; CSV theta2,branch,x,y,z.")
    p.add_argument("--r1", type=float, required=True, help="main pipe radius")
    p.add_argument("--r2", type=float, required=True, help="branch pipe radius (<= r1)")
    p.add_argument("--phi-deg", type=float, required=True, help="angle between pipe axes, degrees in (0, 90]")
    p.add_argument("--samples", type=int, default=360, help="samples per curve (>= 4)")
    p.add_argument("--out", required=True, help="seam CSV path")
    p.add_argument("--torch-radius", type=float, help="run a torch clearance check with this radius")
    p.add_argument("--probe-length", type=float, default=0.5, help="torch body length beyond the standoff")
    p.add_argument("--violations", help="CSV theta2,min_distance for clearance violations")
    p.set_defaults(func=cmd_weld)

    p = sub.add_parser("tripwire", help="detect straight-line features in a PGM image", epilog=UNITS,
                       formatter_class=fmt,
                       description="Laplacian, edge map, Radon transform, peak search, back-projection. "
                                   "Lines are x cos(theta) - y sin(theta) = rho in center-origin pixels.")
    p.add_argument("--input", required=True, help="binary PGM (P5, maxval 255)")
    p.add_argument("--quantile", type=float, default=0.999, help="sinogram quantile used as the peak threshold")
    p.add_argument("--threshold", type=float, help="absolute sinogram threshold (overrides --quantile)")
    p.add_argument("--edge-quantile", type=float, default=0.95, help="edge-magnitude quantile cut")
    p.add_argument("--nms", type=int, nargs=2, default=(5, 5), metavar=("RHO", "THETA"),
                   help="non-maximum suppression window in bins")
    p.add_argument("--n-theta", type=int, default=180, help="angle bins over [0, pi)")
    p.add_argument("--lines", required=True, help="CSV rho,theta_rad,strength")
    p.add_argument("--overlay", help="PGM copy of the input with detected lines drawn at 255")
    p.set_defaults(func=cmd_tripwire)

    plume = sub.add_parser("plume", help="Gaussian plume forward model and source inversion")
    psub = plume.add_subparsers(dest="plume_command", required=True)

    p = psub.add_parser("forward", help="deposition at receptors and/or a ground concentration grid",
                        epilog=UNITS, formatter_class=fmt)
    _add_scenario_args(p, receptors_required=False)
    p.add_argument("--out", help="receptor CSV with modelled deposition_mg_m2")
    p.add_argument("--grid-out", help="CSV x,y,value of ground concentration (g/m^3)")
    p.add_argument("--extent", type=float, nargs=4, metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    p.add_argument("--nx", type=int, default=101)
    p.add_argument("--ny", type=int, default=101)
    p.add_argument("--interval", type=int, default=0, help="wind interval (0-based) used for the grid")
    p.set_defaults(func=cmd_plume_forward)

    p = psub.add_parser("invert", help="estimate emission rates from measured deposition",
                        epilog=UNITS, formatter_class=fmt)
    _add_scenario_args(p, receptors_required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--nonneg", dest="lsq", action="store_false", help="non-negative least squares (default)")
    mode.add_argument("--lsq", dest="lsq", action="store_true", help="unconstrained least squares")
    p.add_argument("--out", required=True, help="CSV source_id,q_gps,stderr_placeholder,active_constraint")
    p.set_defaults(func=cmd_plume_invert, lsq=False)

    fvm = sub.add_parser("fvm", help="finite-volume check of the plume formula")
    fsub = fvm.add_subparsers(dest="fvm_command", required=True)
    p = fsub.add_parser("validate", help="grid refinement study against the plume solution",
                        epilog=UNITS, formatter_class=fmt)
    p.add_argument("--levels", type=int, nargs="+", default=[32, 64, 128], help="cells per axis at each level")
    p.add_argument("--u", type=float, default=DEFAULT_PARAMS.u_speed, help="wind speed (m/s)")
    p.add_argument("--ky", type=float, default=DEFAULT_PARAMS.ky, help="crosswind diffusivity (m^2/s)")
    p.add_argument("--kz", type=float, default=DEFAULT_PARAMS.kz, help="vertical diffusivity (m^2/s)")
    p.add_argument("--q", type=float, default=DEFAULT_PARAMS.q, help="source rate (g/s)")
    p.add_argument("--source", type=float, nargs=3, default=DEFAULT_PARAMS.source, metavar=("X", "Y", "Z"))
    p.add_argument("--lx", type=float, default=DEFAULT_DOMAIN["lx"])
    p.add_argument("--ly", type=float, default=DEFAULT_DOMAIN["ly"])
    p.add_argument("--lz", type=float, default=DEFAULT_DOMAIN["lz"])
    p.add_argument("--out", help="key=value report path (default: stdout)")
    p.add_argument("--field-out", help="CSV i,j,k,x,y,z,c of the coarsest-level field")
    p.set_defaults(func=cmd_fvm_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IndmathError as exc:
        _emit(f"error [{type(exc).__name__}]: {exc}")
        return exc.exit_code
    except argparse.ArgumentTypeError as exc:
        _emit(f"usage error: {exc}")
        return EXIT_USAGE
    except ValueError as exc:
        _emit(f"invalid argument: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _emit(f"I/O error: {exc}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
