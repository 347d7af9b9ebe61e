"""Per-step observables: areas, singularity indicator, discrete energies,
and the evolution report.

The LeFloch-type flow conserves E = (1/2) * integral of (V^2 + 2); the
constant-coefficient flow conserves the exponential variant
Etilde = integral of exp(V^2 / 2).  Both are evaluated with the same
quadratures the schemes use: mass lumping on surfaces, node-centered
trapezoidal weights 2 pi (x . e1) (q_j + q_{j+1})/2 h on curves.  Nodal
squared speeds use the backward pair of time levels, matching the schemes'
own velocity coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from . import axi_fd, mesh
from .axi_fd import GridCurve
from .mesh import TriSurface

CSV_HEADER = "step,time,area,energy_E,energy_Etilde,inv_kinf,quality"


@dataclass
class ReportRow:
    step: int
    time: float
    area: float
    energy_E: float
    energy_Etilde: float
    inv_kinf: float
    quality: float


@dataclass
class EvolutionReport:
    rows: list[ReportRow]
    metadata: dict = field(default_factory=dict)
    halt_reason: str | None = None
    final_state: object | None = None

    def times(self) -> np.ndarray:
        return np.array([r.time for r in self.rows])

    def areas(self) -> np.ndarray:
        return np.array([r.area for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def surface_area(surface: TriSurface) -> float:
    return float(np.sum(mesh.triangle_areas(surface)))


def surface_kinf(surface: TriSurface) -> float:
    """Surface analogue of the curve indicator: max nodal magnitude of the
    discrete mean curvature vector."""
    y = mesh.discrete_mean_curvature(surface)
    return float(np.max(np.linalg.norm(y, axis=1)))


def _curve_q(curve: GridCurve) -> np.ndarray:
    """q_j = |x_j - x_{j-1}| / h; open curves return q[0] = nan."""
    x = curve.positions
    if curve.topology == "open":
        q = np.empty(x.shape[0])
        q[0] = np.nan
        q[1:] = np.linalg.norm(x[1:] - x[:-1], axis=1) / curve.h
        return q
    return np.linalg.norm(x - np.roll(x, 1, axis=0), axis=1) / curve.h


def curve_area(curve: GridCurve) -> float:
    """Area of the surface of revolution:
    2 pi h * sum_j (x_j . e1) |delta^- x_j|."""
    q = _curve_q(curve)
    x1 = curve.positions[:, 0]
    if curve.topology == "open":
        total = float(np.sum(x1[1:] * q[1:]))
    else:
        total = float(np.sum(x1 * q))
    return 2.0 * np.pi * curve.h * total


def _curve_node_measure(curve: GridCurve) -> np.ndarray:
    q = _curve_q(curve)
    n = curve.positions.shape[0]
    w = np.empty(n)
    if curve.topology == "open":
        w[1:-1] = 0.5 * (q[1:-1] + q[2:])
        w[0] = 0.5 * q[1]
        w[-1] = 0.5 * q[-1]
    else:
        w = 0.5 * (q + np.roll(q, -1))
    return 2.0 * np.pi * curve.positions[:, 0] * w * curve.h


def kinf(curve: GridCurve) -> float:
    """Singularity indicator: max nodal magnitude of the discrete curvature
    vector.  Its reciprocal tending to zero signals curvature blow-up."""
    y = axi_fd.discrete_curvature_vector(curve)
    return float(np.max(np.linalg.norm(y, axis=1)))


def discrete_energies(state) -> tuple[float, float]:
    """(E, Etilde) for a FemState or a GridCurve.

    E = <s/2 + 1, 1> and Etilde = <exp(s/2), 1> with s the nodal squared
    speed from the two stored time levels.
    """
    if hasattr(state, "surface"):
        surface = state.surface
        s = (
            np.sum((surface.vertices - surface.prev_positions) ** 2, axis=1)
            / state.dt**2
        )
        measure = mesh.lumped_mass_diagonal(surface)
    else:
        s = (
            np.sum((state.positions - state.prev_positions) ** 2, axis=1)
            / state.dt**2
        )
        measure = _curve_node_measure(state)
    energy = float(np.sum(measure * (0.5 * s + 1.0)))
    # cap the exponent: near a collapse nodal speeds blow up and exp
    # overflows; 1e304 is still an unambiguous "conservation lost" signal
    energy_tilde = float(np.sum(measure * np.exp(np.minimum(0.5 * s, 700.0))))
    return energy, energy_tilde


def curve_report_row(curve: GridCurve) -> ReportRow:
    e, et = discrete_energies(curve)
    k = kinf(curve)
    q = _curve_q(curve)
    q_valid = q[1:] if curve.topology == "open" else q
    return ReportRow(
        step=curve.step,
        time=curve.time,
        area=curve_area(curve),
        energy_E=e,
        energy_Etilde=et,
        inv_kinf=1.0 / max(k, 1e-300),
        quality=float(np.max(q_valid) / np.min(q_valid)),
    )


def fem_report_row(state) -> ReportRow:
    e, et = discrete_energies(state)
    k = surface_kinf(state.surface)
    return ReportRow(
        step=state.step,
        time=state.time,
        area=surface_area(state.surface),
        energy_E=e,
        energy_Etilde=et,
        inv_kinf=1.0 / max(k, 1e-300),
        quality=mesh.quality_ratio(state.surface),
    )


def format_row(row: ReportRow) -> str:
    vals = (row.area, row.energy_E, row.energy_Etilde, row.inv_kinf, row.quality)
    body = ",".join(f"{v:.9e}" for v in vals)
    return f"{row.step},{row.time:.9e},{body}"


def write_report_csv(report: EvolutionReport, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(CSV_HEADER + "\n")
        for row in report.rows:
            f.write(format_row(row) + "\n")


def read_report_csv(path) -> EvolutionReport:
    rows = []
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected report header: {header!r}")
        for line in f:
            if not line.strip():
                continue
            parts = line.split(",")
            rows.append(
                ReportRow(
                    step=int(parts[0]),
                    time=float(parts[1]),
                    area=float(parts[2]),
                    energy_E=float(parts[3]),
                    energy_Etilde=float(parts[4]),
                    inv_kinf=float(parts[5]),
                    quality=float(parts[6]),
                )
            )
    return EvolutionReport(rows=rows)
