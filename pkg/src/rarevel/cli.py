"""Command-line driver: gridgen, solve, flux-compare, mesh-gen, info.

Exit codes: 0 success, 2 input error, 3 non-convergence, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import errors as E
from .config import GAS_PRESETS, RunConfig
from .io import (compare_flux, field_extrema, read_flux_csv, read_macro_fields,
                 write_flux_csv, write_macro_fields, write_residual_csv, write_vtk)
from .kinetic import PrimitiveState
from .mesh import SpaceMesh2D, annulus_sector, rectangle
from .velgrid import (generate_axisym_grid, generate_grid, grid_from_dict, rankine_hugoniot_fields,
                      read_grid, write_grid)

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_NUMERICAL = 0, 2, 3, 4
log = logging.getLogger("rarevel")


def apply_thread_cap():
    n = os.environ.get("RAREVEL_THREADS")
    if not n:
        return
    import numba

    try:
        k = int(n)
    except ValueError:
        raise E.ValidationError(f"RAREVEL_THREADS must be an integer, got {n!r}") from None
    if k < 1:
        raise E.ValidationError("RAREVEL_THREADS must be at least 1")
    numba.set_num_threads(min(k, numba.config.NUMBA_NUM_THREADS))


def _gas(args):
    return GAS_PRESETS[args.gas](args.d_v)


def cmd_gridgen(args):
    gas = _gas(args)
    if args.rankine_hugoniot:
        if args.rho is None or args.T is None or (args.mach is None) == (args.u is None):
            raise E.ValidationError("--rankine-hugoniot needs --rho, --T and one of --mach/--u")
        if args.wall_T is None:
            raise E.ValidationError("--rankine-hugoniot needs --wall-T")
        speed = args.u if args.u is not None else args.mach * math.sqrt(gas.gamma * gas.R * args.T)
        u = np.zeros(gas.d_v)
        u[0] = speed
        field = rankine_hugoniot_fields(PrimitiveState(args.rho, u, args.T), args.wall_T, gas)
        source = f"Rankine-Hugoniot, M={speed / math.sqrt(gas.gamma * gas.R * args.T):.3g}"
    else:
        if args.fields is None:
            raise E.ValidationError("give --fields PATH or --rankine-hugoniot")
        if not Path(args.fields).exists():
            raise E.ValidationError(f"field file {args.fields} does not exist")
        field = read_macro_fields(args.fields)
        source = str(args.fields)
    mode = args.mode.upper()
    if args.axisymmetric:
        grid, spec, _ = generate_axisym_grid(field, gas, args.c, args.a, args.n_omega, mode,
                                             wall_T=args.wall_T, max_level=args.max_level)
    else:
        grid, spec, _ = generate_grid(field, gas, args.c, args.a, mode, args.extend_for_p0,
                                      wall_T=args.wall_T, symmetry_axis=args.symmetry_axis,
                                      max_level=args.max_level)
    write_grid(grid, args.output)
    fine = int(np.prod(spec.n)) * (args.n_omega if args.axisymmetric else 1)
    rows = [("source", source),
            ("fine grid", " x ".join(str(n) for n in spec.n) + f" = {fine} points"),
            ("fine step", f"{spec.dv:.6g} m/s"),
            ("bounds", " ".join(f"[{lo:.6g}, {hi:.6g}]" for lo, hi in zip(spec.vmin, spec.vmax))),
            (f"AMR points ({mode})", str(grid.npoints)),
            ("reduction", f"{fine / grid.npoints:.3f}"),
            ("min cell size", f"{grid.min_cell_size():.6g} m/s"),
            ("max cell size", f"{grid.max_cell_size():.6g} m/s"),
            ("written", str(args.output))]
    _table(rows)
    return EXIT_OK


def _table(rows):
    w = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{w}}  {v}")


def cmd_solve(args):
    from .solver import SteadySolver

    apply_thread_cap()
    cfg = RunConfig.load(args.config)
    if not Path(args.grid).exists():
        raise E.ValidationError(f"grid file {args.grid} does not exist")
    grid = read_grid(args.grid)
    init_kind = args.init or cfg.init
    if init_kind == "macro-file":
        path = args.macro_file or cfg.init_path
        if path is None or not Path(path).exists():
            raise E.ValidationError(f"macro-field file {path} does not exist")
        init = read_macro_fields(path)
    else:
        if cfg.upstream is None:
            raise E.ValidationError("no upstream state for --init upstream")
        init = cfg.upstream
    if args.max_outer:
        cfg.solver.max_outer = args.max_outer
    out = Path(args.output_dir).resolve() if args.output_dir else cfg.output_dir
    solver = SteadySolver(cfg.mesh, grid, cfg.bcs, cfg.gas, cfg.solver)
    solver.initialize(init)
    report = solver.run(callback=_progress if args.verbose else None)
    out.mkdir(parents=True, exist_ok=True)
    write_vtk(report.field, out / cfg.output["vtk"], cfg.gas.R)
    write_macro_fields(report.field, out / cfg.output["macro"],
                       comments=[f"solver output after {report.iterations} iterations"])
    write_residual_csv(report, out / cfg.output["residual_csv"])
    if report.wall_flux is not None:
        write_flux_csv(report.wall_flux, out / cfg.output["flux_csv"])
    _table([("init", init_kind), ("velocity points", str(grid.npoints)),
            ("iterations", str(report.iterations)),
            ("residual", f"{report.residuals[0]:.3e} -> {report.residuals[-1]:.3e}"),
            ("converged", str(report.converged)), ("wall time", f"{report.wall_time:.1f} s"),
            ("output", str(out))])
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _progress(it, res, dt):
    if it % 10 == 0:
        print(f"iter {it:6d}  residual {res:.4e}  dt {dt:.3e}", flush=True)


def cmd_flux_compare(args):
    ta, xa, ya, qa = read_flux_csv(args.flux_a)
    tb, xb, yb, qb = read_flux_csv(args.flux_b)
    mx, l2 = compare_flux(ta, qa, tb, qb)
    print(f"max relative difference  {100 * mx:.4f} %")
    print(f"L2 relative difference   {100 * l2:.4f} %")
    if args.tol is not None and mx > args.tol:
        return 1
    return EXIT_OK


def cmd_mesh_gen(args):
    if args.kind == "annulus_sector":
        mesh = annulus_sector(args.r_body, args.r_outer, args.ni, args.nj,
                              first_cell=args.first_cell, theta_span=args.theta_span)
    else:
        mesh = rectangle(args.lx, args.ly, args.ni, args.nj)
    mesh.write(args.output)
    _table([("mesh", mesh.name), ("cells", f"{mesh.ni} x {mesh.nj}"),
            ("min cell width", f"{mesh.min_cell_width():.4g} m"),
            ("closure defect", f"{mesh.closure_defect():.2e}"), ("written", str(args.output))])
    return EXIT_OK


def cmd_info(args):
    path = Path(args.path)
    if not path.exists():
        raise E.ValidationError(f"{path} does not exist")
    text = path.read_text()
    doc = None
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise E.ParseError(exc.msg, exc.lineno) from exc
    if doc is not None and "leaves" in doc:
        g = grid_from_dict(doc)
        rows = [("kind", "velocity grid"), ("coordinates", g.coordinate_system),
                ("quadrature", g.mode), ("leaves", str(g.nleaves)), ("points", str(g.npoints)),
                ("sum of weights", f"{np.sum(g.weights):.10g}"),
                ("min cell size", f"{g.min_cell_size():.6g}"),
                ("max cell size", f"{g.max_cell_size():.6g}"),
                ("symmetry axis", str(g.symmetry_axis))]
    elif doc is not None and "nodes" in doc:
        m = SpaceMesh2D.from_dict(doc)
        rows = [("kind", "space mesh"), ("cells", f"{m.ni} x {m.nj}"),
                ("min cell width", f"{m.min_cell_width():.4g} m"),
                ("total area", f"{m.volumes.sum():.6g} m^2")]
    else:
        f = read_macro_fields(path)
        rows = [("kind", "macro field"), ("dims", " x ".join(map(str, f.dims)))]
        rows += [(k, f"[{a:.6g}, {b:.6g}]") for k, (a, b) in field_extrema(f).items()]
    _table(rows)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="rarevel", description=__doc__.splitlines()[0])
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gridgen", help="build an AMR velocity grid from macroscopic fields")
    g.add_argument("--fields", help="macro-field text file")
    g.add_argument("--rankine-hugoniot", action="store_true",
                   help="use upstream/downstream/wall states instead of a field file")
    g.add_argument("--mach", type=float)
    g.add_argument("--u", type=float, help="upstream speed along x, m/s")
    g.add_argument("--rho", type=float)
    g.add_argument("--T", type=float)
    g.add_argument("--wall-T", type=float, dest="wall_T")
    g.add_argument("--gas", choices=sorted(GAS_PRESETS), default="argon")
    g.add_argument("--d-v", type=int, default=2, dest="d_v")
    g.add_argument("--c", type=float, default=4.0)
    g.add_argument("--a", type=float, default=2.0)
    g.add_argument("--mode", default="Q1", type=str.upper, choices=["Q1", "P0"])
    g.add_argument("--extend-for-p0", action="store_true")
    g.add_argument("--axisymmetric", action="store_true")
    g.add_argument("--n-omega", type=int, default=30)
    g.add_argument("--symmetry-axis", type=int)
    g.add_argument("--max-level", type=int, default=12)
    g.add_argument("--output", "-o", required=True)
    g.set_defaults(func=cmd_gridgen)

    s = sub.add_parser("solve", help="run the steady solver from a JSON configuration")
    s.add_argument("--config", required=True)
    s.add_argument("--grid", required=True)
    s.add_argument("--init", choices=["upstream", "macro-file"])
    s.add_argument("--macro-file")
    s.add_argument("--output-dir")
    s.add_argument("--max-outer", type=int)
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("flux-compare", help="relative difference of two wall-flux CSVs")
    c.add_argument("flux_a")
    c.add_argument("flux_b")
    c.add_argument("--tol", type=float, help="fail (exit 1) above this max relative difference")
    c.set_defaults(func=cmd_flux_compare)

    m = sub.add_parser("mesh-gen", help="write a built-in structured mesh")
    m.add_argument("--kind", choices=["annulus_sector", "rectangle"], default="annulus_sector")
    m.add_argument("--r-body", type=float, default=0.1)
    m.add_argument("--r-outer", type=float, default=0.45)
    m.add_argument("--first-cell", type=float)
    m.add_argument("--theta-span", type=float, default=90.0)
    m.add_argument("--lx", type=float, default=1.0)
    m.add_argument("--ly", type=float, default=1.0)
    m.add_argument("--ni", type=int, default=30)
    m.add_argument("--nj", type=int, default=30)
    m.add_argument("--output", "-o", required=True)
    m.set_defaults(func=cmd_mesh_gen)

    i = sub.add_parser("info", help="summarise a grid, mesh or macro-field file")
    i.add_argument("path")
    i.set_defaults(func=cmd_info)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING))
    try:
        return args.func(args)
    except (E.NonConvergenceError, E.DivergenceError, E.LinearSolverError, E.GridInadequacyError,
            E.RefinementOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (E.RarevelError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
