#!/usr/bin/env python3
"""Nonspherical axisymmetric evolutions that develop singularities.

Runs the 2:1:1 cigar (unit long semi-axis), the R=2, r=1 torus, and the
generic biconcave disk, writing report CSVs and periodic curve snapshots.
The torus with positive initial speed fattens and tries to close its inner
hole; the cigar flattens its short side with a curvature blow-up at the
rim.  The biconcave profile is a generic two-lobed shape, not calibrated
to any published dataset.
"""

import argparse
import os
import sys

from hmcflow.axi_fd import axi_initialize, axi_run
from hmcflow.diagnostics import write_report_csv
from hmcflow.fileio import write_curve_csv, write_metadata
from hmcflow.laws import CONSTANT, LEFLOCH
from hmcflow.shapes import ShapeSpec, make_curve

EXPERIMENTS = [
    ("cigar_g1_v0", ShapeSpec("ellipsoid", a=0.5, b=1.0, c=0.5), CONSTANT, 0.0, 0.55),
    ("cigar_g1_v1", ShapeSpec("ellipsoid", a=0.5, b=1.0, c=0.5), CONSTANT, 1.0, 1.1),
    ("cigar_lf_v0", ShapeSpec("ellipsoid", a=0.5, b=1.0, c=0.5), LEFLOCH, 0.0, 0.39),
    ("torus_g1_v0", ShapeSpec("torus"), CONSTANT, 0.0, 1.3),
    ("torus_g1_v05", ShapeSpec("torus"), CONSTANT, 0.5, 1.25),
    ("torus_lf_v0", ShapeSpec("torus"), LEFLOCH, 0.0, 1.1),
    ("biconcave_g1_v0", ShapeSpec("biconcave", radius=2.1), CONSTANT, 0.0, 1.0),
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output", default="runs/singularities")
    parser.add_argument("--grid", type=int, default=512)
    parser.add_argument("--dt", type=float, default=1e-4)
    parser.add_argument("--snapshot-every", type=int, default=1000)
    parser.add_argument("--only", default=None, help="run a single named experiment")
    args = parser.parse_args(argv)

    for name, shape, law, v0, t_final in EXPERIMENTS:
        if args.only and name != args.only:
            continue
        out = os.path.join(args.output, name)
        os.makedirs(out, exist_ok=True)
        topology = "periodic" if shape.periodic else "open"
        curve = axi_initialize(make_curve(shape, args.grid), v0, args.dt, law, topology)
        write_curve_csv(curve, os.path.join(out, "curve_000000.csv"))

        def snap(c, _out=out):
            if c.step % args.snapshot_every == 0:
                write_curve_csv(c, os.path.join(_out, f"curve_{c.step:06d}.csv"))

        report = axi_run(curve, t_final, observer=snap, record_every=10,
                         metadata={"experiment": name})
        write_curve_csv(report.final_state, os.path.join(out, "curve_final.csv"))
        write_report_csv(report, os.path.join(out, "report.csv"))
        write_metadata(os.path.join(out, "metadata.txt"), {
            "experiment": name, "law": law.kind, "v0": repr(v0),
            "J": args.grid, "dt": repr(args.dt), "t_final": repr(t_final),
            "halt_reason": report.halt_reason,
            "final_time": repr(report.final_state.time),
        })
        inv = report.column("inv_kinf")
        areas = report.areas()
        print(f"{name:>16}: halted '{report.halt_reason}' at t={report.final_state.time:.4f}  "
              f"area {areas[0]:.2f} -> {areas[-1]:.2f}  "
              f"1/kinf {inv[0]:.4f} -> {inv.min():.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
