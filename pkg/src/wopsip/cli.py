"""Command line entry point: ``wopsip {poisson,stokes,mesh-report,verify,export-vtk}``.

Exit status is 0 on success, 1 if any solve failed or did not converge and
2 if a verification check failed (or the arguments were invalid).
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .experiment import (LARGE_N, ConfigError, ExperimentConfig, format_mesh_report,
                         format_table, merged_config, run_convergence, run_mesh_report,
                         run_single)
from .mesh import FAMILIES, generate_structured, semi_regularity_report
from .stokes import RT_BOUNDARY, VARIANTS
from .vtk import export_vtk

EXIT_OK, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2


def _n_list(values):
    out = []
    for v in values:
        out.extend(int(s) for s in str(v).split(",") if s)
    return out


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _add_common(p, equation):
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags win")
    p.add_argument("--mesh", choices=FAMILIES)
    p.add_argument("--n", nargs="+", help="mesh resolutions, e.g. 16 32 64 or 16,32,64")
    p.add_argument("--tol", type=float)
    p.add_argument("--format", choices=("csv", "markdown"))
    p.add_argument("--out")
    p.add_argument("--large", action="store_true", default=None,
                   help=f"allow n > {LARGE_N} (slow)")
    if equation == "stokes":
        p.add_argument("--nu", type=float)
        p.add_argument("--eta", type=float)
        p.add_argument("--example", choices=("example1", "example2"))
        p.add_argument("--variant", choices=VARIANTS)
        p.add_argument("--rt-boundary", dest="rt_boundary", choices=RT_BOUNDARY)
    else:
        p.add_argument("--example", help="sin-product, cos-product, example1 or quadratic")
        p.add_argument("--field", help="custom exact solution as a sympy expression in x1, x2")


def build_parser():
    parser = argparse.ArgumentParser(prog="wopsip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("poisson", help="Poisson convergence sweep"), "poisson")
    _add_common(sub.add_parser("stokes", help="Stokes convergence sweep"), "stokes")

    p = sub.add_parser("mesh-report", help="semi-regularity table for a mesh family")
    p.add_argument("--mesh", choices=FAMILIES, default="graded")
    p.add_argument("--n", nargs="+", default=["8", "16", "32", "64", "128"])
    p.add_argument("--format", choices=("csv", "markdown"), default="markdown")
    p.add_argument("--out")

    p = sub.add_parser("verify", help="run the self-check suite")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("export-vtk", help="write a mesh (and optionally a solution) as VTK")
    p.add_argument("--mesh", choices=FAMILIES, default="uniform")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--out", default="mesh.vtk")
    p.add_argument("--solve", choices=("none", "poisson", "stokes"), default="none")
    p.add_argument("--example")
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--variant", choices=VARIANTS, default="robust")
    return parser


def load_config(args):
    base = ExperimentConfig(equation=args.command)
    if args.config:
        data = json.loads(Path(args.config).read_text())
        data.setdefault("equation", args.command)
        if data["equation"] != args.command:
            raise ConfigError(f"config is for {data['equation']!r}, command is {args.command!r}")
        base = ExperimentConfig.from_dict(data)
    overrides = {k: getattr(args, k, None) for k in
                 ("mesh", "nu", "eta", "example", "field", "variant", "rt_boundary", "tol",
                  "format", "out", "large")}
    if args.n:
        overrides["n"] = _n_list(args.n)
    if args.command == "poisson" and args.example is None and args.field is None \
            and not args.config:
        overrides["example"] = "sin-product"
    return merged_config(base, overrides).validate()


def cmd_sweep(args):
    config = load_config(args)
    records = run_convergence(config)
    title = f"{config.equation}, {config.mesh}, {config.example if config.field is None else config.field}"
    if config.equation == "stokes":
        title += f", nu={config.nu:g}, eta={config.eta:g}, {config.variant}"
    _emit(format_table(records, config.format, title), config.out)
    flagged = [r for r in records if r.flag]
    for r in flagged:
        print(f"n={r.n}: {r.flag}", file=sys.stderr)
    return EXIT_SOLVER if flagged else EXIT_OK


def cmd_mesh_report(args):
    rows = run_mesh_report(args.mesh, _n_list(args.n))
    _emit(format_mesh_report(rows, args.format), args.out)
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_verify
    results = run_verify(seed=args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def _cell_average(uh):
    """Elementwise mean of a CR function (the average of its three edge values)."""
    return uh.local().mean(axis=-1)


def cmd_export_vtk(args):
    mesh = generate_structured(args.mesh, args.n)
    g = mesh.geometry
    cells = {"area": mesh.area, "H_over_h": g.HT / g.hT, "aspect": g.hT ** 2 / (2 * mesh.area)}
    status = EXIT_OK
    if args.solve != "none":
        cfg = ExperimentConfig(equation=args.solve, mesh=args.mesh, n=[args.n], nu=args.nu,
                               eta=args.eta, variant=args.variant,
                               example=args.example or ("example1" if args.solve == "stokes"
                                                        else "sin-product"),
                               large=True).validate()
        rec, sol = run_single(cfg, args.n)
        if sol is None:
            print(rec.flag, file=sys.stderr)
            return EXIT_SOLVER
        if args.solve == "poisson":
            cells["u_h"] = _cell_average(sol)
        else:
            cells["u_h"] = np.column_stack([_cell_average(sol.u.component(i)) for i in range(2)])
            cells["p_h"] = sol.p.coefficients
        if rec.flag:
            status = EXIT_SOLVER
    path = export_vtk(mesh, args.out, cell_data=cells,
                      title=f"{args.mesh} n={args.n} h={mesh.h:.6g}")
    ratio, angle, aspect = semi_regularity_report(mesh)
    print(f"wrote {path}: {len(mesh.vertices)} points, {len(mesh.triangles)} triangles, "
          f"max H/h {ratio:.4f}, max aspect {aspect:.4g}")
    return status


COMMANDS = {"poisson": cmd_sweep, "stokes": cmd_sweep, "mesh-report": cmd_mesh_report,
            "verify": cmd_verify, "export-vtk": cmd_export_vtk}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
