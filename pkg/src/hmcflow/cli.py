"""Batch command line front end.

Subcommands: ``evolve`` runs one evolution from a config file and writes
snapshots, report.csv and metadata; ``converge`` runs a resolution sweep
against the exact radial solution and prints an error/EOC table;
``compare`` aligns two report.csv time series and reports the largest
relative area discrepancy.

Exit codes separate tool errors (nonzero: bad config, missing files) from
detected singularities (zero, with the halt reason recorded): a blow-up is
a scientific result, not a tool failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .axi_fd import axi_initialize, axi_run
from .diagnostics import EvolutionReport, read_report_csv, write_report_csv
from .exact import CurveErrorTracker, SphereSolution, SurfaceErrorTracker, eoc
from .fem_flow import fem_initialize, fem_run
from .fileio import (ConfigError, RunConfig, read_config, read_metadata,
                     write_curve_csv, write_metadata, write_off)
from .mesh import mesh_size
from .shapes import (ShapeSpec, make_curve, make_ellipsoid_mesh,
                     make_sphere_mesh, make_torus_mesh)


def _build_surface(shape: ShapeSpec, level: int):
    if shape.kind == "sphere":
        return make_sphere_mesh(shape.radius, level)
    if shape.kind == "ellipsoid":
        return make_ellipsoid_mesh(shape.a, shape.b, shape.c, level)
    if shape.kind == "torus":
        nv = max(8, 8 * 2**level)
        nu = max(3, round(nv * shape.big_radius / shape.small_radius))
        return make_torus_mesh(shape.big_radius, shape.small_radius, nu, nv)
    raise ConfigError(f"shape {shape.kind!r} has no surface mesh; use the axisymmetric solver")


def _single_resolution(cfg: RunConfig) -> int:
    values = cfg.levels if cfg.levels is not None else cfg.grid_counts
    if len(values) != 1:
        raise ConfigError("evolve needs a single 'level' or 'J' value")
    return values[0]


def _metadata(cfg: RunConfig, resolution: int, dt: float, extra: dict) -> dict:
    meta = {
        "tool_version": __version__,
        "law": cfg.law.kind,
        "shape": cfg.shape.kind,
        "v0": repr(cfg.v0),
        "dt": repr(dt),
        "t_final": repr(cfg.t_final),
        "solver": cfg.solver,
        "resolution": resolution,
        "output_every": cfg.output_every,
    }
    for key in ("radius", "a", "b", "c", "big_radius", "small_radius",
                "c0", "c2", "c4"):
        meta[key] = repr(getattr(cfg.shape, key))
    meta.update(extra)
    return meta


def cmd_evolve(cfg: RunConfig, output_dir: str, quiet: bool = False) -> int:
    os.makedirs(output_dir, exist_ok=True)
    resolution = _single_resolution(cfg)
    if cfg.solver == "fem":
        surface = _build_surface(cfg.shape, resolution)
        h = mesh_size(surface)
        dt = cfg.time_step(h)
        state = fem_initialize(surface, cfg.v0, dt, cfg.law)
        write_off(surface, os.path.join(output_dir, "surface_000000.off"))

        def observer(st):
            if st.step % cfg.output_every == 0:
                write_off(st.surface,
                          os.path.join(output_dir, f"surface_{st.step:06d}.off"))

        report = fem_run(state, cfg.t_final, observer=observer,
                         record_every=cfg.output_every)
        final = report.final_state
        write_off(final.surface, os.path.join(output_dir, "surface_final.off"))
    else:
        topology = "periodic" if cfg.shape.periodic else "open"
        samples = make_curve(cfg.shape, resolution)
        dt = cfg.time_step(1.0 / resolution)
        curve = axi_initialize(samples, cfg.v0, dt, cfg.law, topology)
        write_curve_csv(curve, os.path.join(output_dir, "curve_000000.csv"))

        def observer(cv):
            if cv.step % cfg.output_every == 0:
                write_curve_csv(cv, os.path.join(output_dir, f"curve_{cv.step:06d}.csv"))

        report = axi_run(curve, cfg.t_final, observer=observer,
                         record_every=cfg.output_every)
        final = report.final_state
        write_curve_csv(final, os.path.join(output_dir, "curve_final.csv"))

    write_report_csv(report, os.path.join(output_dir, "report.csv"))
    write_metadata(
        os.path.join(output_dir, "metadata.txt"),
        _metadata(cfg, resolution, dt, {
            "halt_reason": report.halt_reason,
            "final_time": repr(final.time),
            "final_step": final.step,
        }),
    )
    if not quiet:
        print(f"run finished: t = {final.time:.6g}, halt = {report.halt_reason}")
        print(f"outputs in {output_dir}")
    return 0


def run_convergence_row(cfg: RunConfig, resolution: int) -> tuple[float, float]:
    """One sweep member: returns (h, max error against the exact sphere)."""
    if cfg.shape.kind != "sphere":
        raise ConfigError(
            f"no exact solution for shape {cfg.shape.kind!r}; converge needs a sphere"
        )
    sol = SphereSolution(cfg.law, cfg.shape.radius, cfg.v0)
    if cfg.solver == "fem":
        surface = make_sphere_mesh(cfg.shape.radius, resolution)
        h = mesh_size(surface)
        dt = cfg.time_step(h)
        state = fem_initialize(surface, cfg.v0, dt, cfg.law)
        tracker = SurfaceErrorTracker(sol)
        steps = max(1, round(cfg.t_final / dt))
        report = fem_run(state, steps * dt, observer=tracker, record_every=steps)
    else:
        samples = make_curve(cfg.shape, resolution)
        h = 1.0 / resolution
        dt = cfg.time_step(h)
        radius = cfg.shape.radius

        def exact_map(rho, t, _sol=sol, _r=radius):
            from .shapes import sphere_profile
            return _sol.radius(t) * sphere_profile(rho, 1.0)

        curve = axi_initialize(samples, cfg.v0, dt, cfg.law, "open")
        tracker = CurveErrorTracker(exact_map)
        steps = max(1, round(cfg.t_final / dt))
        report = axi_run(curve, steps * dt, observer=tracker, record_every=steps)
    if report.halt_reason != "reached_t_final":
        raise RuntimeError(
            f"convergence run halted early ({report.halt_reason}); "
            "choose t_final inside the smooth regime"
        )
    return h, tracker.max_error


def cmd_converge(cfg: RunConfig, output_dir: str, quiet: bool = False) -> int:
    os.makedirs(output_dir, exist_ok=True)
    resolutions = cfg.levels if cfg.levels is not None else cfg.grid_counts
    label = "level" if cfg.solver == "fem" else "J"
    rows = []
    for res in resolutions:
        h, err = run_convergence_row(cfg, res)
        rows.append((res, h, err))
        if not quiet:
            print(f"  {label}={res}: h={h:.6e} error={err:.6e}", flush=True)
    orders = [None] + (
        eoc([(h, e) for _res, h, e in rows])[1:] if len(rows) > 1 else []
    )
    table_path = os.path.join(output_dir, "converge.csv")
    with open(table_path, "w", encoding="ascii", newline="\n") as f:
        f.write(f"{label},h,error,eoc\n")
        for (res, h, err), order in zip(rows, orders):
            eoc_txt = "" if order is None else f"{order:.2f}"
            f.write(f"{res},{h:.9e},{err:.9e},{eoc_txt}\n")
    if not quiet:
        print(f"{label:>8} {'h':>14} {'error':>14}  EOC")
        for (res, h, err), order in zip(rows, orders):
            eoc_txt = "---" if order is None else f"{order:.2f}"
            print(f"{res:>8} {h:>14.6e} {err:>14.6e}  {eoc_txt}")
        print(f"table written to {table_path}")
    return 0


def compare_reports(fem_report: EvolutionReport, axi_report: EvolutionReport) -> float:
    """Max relative area discrepancy over the common time interval, with the
    second series linearly interpolated onto the first's times."""
    t1, a1 = fem_report.times(), fem_report.areas()
    t2, a2 = axi_report.times(), axi_report.areas()
    lo = max(t1[0], t2[0])
    hi = min(t1[-1], t2[-1])
    mask = (t1 >= lo - 1e-15) & (t1 <= hi + 1e-15)
    if not np.any(mask):
        raise ValueError("reports share no common time interval")
    ref = np.interp(t1[mask], t2, a2)
    scale = np.maximum(np.abs(ref), 1e-300)
    return float(np.max(np.abs(a1[mask] - ref) / scale))


def cmd_compare(fem_path: str, axi_path: str, quiet: bool = False) -> int:
    rep_a = read_report_csv(fem_path)
    rep_b = read_report_csv(axi_path)
    for rep, path in ((rep_a, fem_path), (rep_b, axi_path)):
        meta_path = os.path.join(os.path.dirname(os.path.abspath(path)), "metadata.txt")
        if os.path.exists(meta_path):
            rep.metadata.update(read_metadata(meta_path))
    law_a = rep_a.metadata.get("law")
    law_b = rep_b.metadata.get("law")
    if law_a and law_b and law_a != law_b:
        print(f"warning: comparing different laws ({law_a} vs {law_b})", file=sys.stderr)
    disc = compare_reports(rep_a, rep_b)
    if not quiet:
        print(f"max relative area discrepancy: {disc:.9e}")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmcflow",
        description="hyperbolic mean curvature flow solvers (surface FEM and axisymmetric FD)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("evolve", "run one evolution from a config file"),
        ("converge", "run a resolution sweep and print an error/EOC table"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="path to key=value config file")
        p.add_argument("--output", default=None, help="output directory (overrides config)")
        p.add_argument("--quiet", action="store_true")
    p = sub.add_parser("compare", help="compare the area columns of two report.csv files")
    p.add_argument("fem_report", help="first report.csv (e.g. the surface run)")
    p.add_argument("axi_report", help="second report.csv (e.g. the axisymmetric run)")
    p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "compare":
            return cmd_compare(args.fem_report, args.axi_report, quiet=args.quiet)
        cfg = read_config(args.config)
        output_dir = args.output or cfg.output_dir
        if output_dir is None:
            raise ConfigError("no output directory (set output_dir in the config or pass --output)")
        if args.command == "evolve":
            return cmd_evolve(cfg, output_dir, quiet=args.quiet)
        return cmd_converge(cfg, output_dir, quiet=args.quiet)
    except (ConfigError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
