#!/usr/bin/env python3
"""Reproduce the radial-sphere convergence tables for both schemes.

Axisymmetric tables run on the exact benchmark grids (J = 32..512); the
surface tables use this package's octahedral sphere family, so their
absolute errors carry a mesh-family constant while the orders match.
"""

import argparse
import sys
import time

from hmcflow.cli import run_convergence_row
from hmcflow.exact import eoc
from hmcflow.fileio import RunConfig
from hmcflow.laws import CONSTANT, LEFLOCH
from hmcflow.shapes import ShapeSpec


def table(title, cfg, resolutions):
    print(f"\n{title}")
    label = "level" if cfg.solver == "fem" else "J"
    rows = []
    for res in resolutions:
        start = time.monotonic()
        h, err = run_convergence_row(cfg, res)
        rows.append((h, err))
        order = "  ---" if len(rows) < 2 else f"{eoc(rows)[-1]:5.2f}"
        print(f"  {label}={res:<6d} h={h:.4e}  error={err:.4e}  EOC {order}"
              f"   [{time.monotonic() - start:.1f}s]")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="cap the finest resolutions to keep runtime low")
    args = parser.parse_args(argv)
    grids = (32, 64, 128, 256) if args.quick else (32, 64, 128, 256, 512)
    grids_quad = (32, 64, 128) if args.quick else (32, 64, 128, 256)
    levels = (2, 3, 4) if args.quick else (2, 3, 4, 5)
    sphere = ShapeSpec("sphere")

    def axi_cfg(law, v0, t_final, power):
        return RunConfig(law=law, shape=sphere, v0=v0, t_final=t_final,
                         dt_factor=1.0, dt_power=power, grid_counts=grids)

    def fem_cfg(law, v0, factor, power):
        return RunConfig(law=law, shape=sphere, v0=v0, t_final=0.25,
                         dt_factor=factor, dt_power=power, levels=levels)

    table("axisymmetric, g = 1, v0 = 0, dt = h, T = 0.5",
          axi_cfg(CONSTANT, 0.0, 0.5, 1.0), grids)
    for v0, t_final in ((0.0, 0.5), (1.0, 0.5), (-1.0, 0.25)):
        table(f"axisymmetric, g = 1 + s/2, v0 = {v0:+g}, dt = h, T = {t_final}",
              axi_cfg(LEFLOCH, v0, t_final, 1.0), grids)
    for v0, t_final in ((0.0, 0.5), (1.0, 0.5), (-1.0, 0.25)):
        table(f"axisymmetric, g = 1 + s/2, v0 = {v0:+g}, dt = h^2, T = {t_final}",
              axi_cfg(LEFLOCH, v0, t_final, 2.0), grids_quad)
    table("surface FEM, g = 1, v0 = 0, dt = h0/4, T = 0.25",
          fem_cfg(CONSTANT, 0.0, 0.25, 1.0), levels)
    for v0 in (0.0, 1.0, -1.0):
        table(f"surface FEM, g = 1 + s/2, v0 = {v0:+g}, dt = h0/4, T = 0.25",
              fem_cfg(LEFLOCH, v0, 0.25, 1.0), levels)
        table(f"surface FEM, g = 1 + s/2, v0 = {v0:+g}, dt = h0^2/2, T = 0.25",
              fem_cfg(LEFLOCH, v0, 0.5, 2.0), levels)
    return 0


if __name__ == "__main__":
    sys.exit(main())
