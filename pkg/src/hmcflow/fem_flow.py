"""Fully discrete parametric finite element evolution of closed surfaces.

One step solves, in the piecewise linear space over the current surface,

    <(X - 2 id + prev) / dt^2, phi>_lumped + c <w grad(X + prev), grad phi>
        = -c_rhs <grad I[s], phi>

where s is the nodal squared speed |id - prev|^2 / dt^2 and I[.] the nodal
interpolant.  The constant law uses c = 1/2, w = 1, c_rhs = 1/2; the
lefloch law uses c = 1/4, w = I[s] + 2, c_rhs = 1.  The three coordinate
components share one symmetric positive definite matrix.  The surface for
the next step is the solution itself: vertices move, connectivity stays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.sparse import diags

from . import diagnostics, mesh
from .laws import CONSTANT, FlowLaw
from .linsolve import SolverError, SparseSystem, solve_spd
from .mesh import DegenerateTriangleError, TriSurface


@dataclass
class FemState:
    surface: TriSurface
    dt: float
    law: FlowLaw
    time: float = 0.0
    step: int = 0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")


def fem_initialize(surface: TriSurface, v0: float, dt: float, law: FlowLaw = CONSTANT) -> FemState:
    """Backward Taylor step for the previous level from a constant initial
    normal speed: prev = id - dt v0 omega + dt^2/2 g(v0^2) Y, with omega the
    lumped vertex normal and Y the discrete mean curvature vector."""
    omega = mesh.discrete_normal(surface)
    curv = mesh.discrete_mean_curvature(surface)
    prev = (
        surface.vertices
        - dt * v0 * omega
        + 0.5 * dt * dt * law.evaluate(v0 * v0) * curv
    )
    return FemState(
        surface=surface.with_positions(surface.vertices.copy(), prev),
        dt=dt,
        law=law,
        time=0.0,
        step=0,
    )


def assemble_step_system(state: FemState) -> tuple[SparseSystem, np.ndarray]:
    """Matrix and right-hand sides (n, 3) of one time step."""
    surface = state.surface
    dt = state.dt
    pos = surface.vertices
    prev = surface.prev_positions
    mass = mesh.lumped_mass_diagonal(surface)
    speed_sq = np.sum((pos - prev) ** 2, axis=1) / dt**2
    if state.law.kind == "constant":
        coef = 0.5
        stiff = mesh.stiffness_matrix(surface)
        rhs_coef = 0.5
    else:
        coef = 0.25
        stiff = mesh.stiffness_matrix(surface, weight=speed_sq + 2.0)
        rhs_coef = 1.0
    matrix = diags(mass / dt**2).tocsr() + coef * stiff
    rhs = (
        (mass / dt**2)[:, None] * (2.0 * pos - prev)
        - coef * (stiff @ prev)
        - rhs_coef * mesh.gradient_rhs(surface, speed_sq)
    )
    return SparseSystem(matrix.tocsr()), rhs


def fem_step(state: FemState, tol: float = 1e-10) -> FemState:
    """Advance one time level; the previous level becomes the old vertices."""
    system, rhs = assemble_step_system(state)
    new_pos = solve_spd(system, rhs, tol=tol)
    new_surface = state.surface.with_positions(new_pos, state.surface.vertices.copy())
    mesh.triangle_areas(new_surface)  # degeneracy check on the moved mesh
    step = state.step + 1
    return FemState(
        surface=new_surface,
        dt=state.dt,
        law=state.law,
        time=step * state.dt,
        step=step,
    )


def fem_run(
    state: FemState,
    t_final: float,
    observer: Callable[[FemState], None] | None = None,
    record_every: int = 1,
    metadata: dict | None = None,
    tol: float = 1e-10,
) -> diagnostics.EvolutionReport:
    """Step until t_final, a degenerate triangle, or a solver failure.

    Early halts are recorded outcomes (halt_reason), not exceptions; the
    last valid state is kept on the report.
    """
    if t_final < state.time:
        raise ValueError("t_final must not precede the current time")
    try:
        rows = [diagnostics.fem_report_row(state)]
    except DegenerateTriangleError:
        return diagnostics.EvolutionReport(
            rows=[], metadata=dict(metadata or {}),
            halt_reason="degenerate_triangle", final_state=state,
        )
    halt = "reached_t_final"
    while state.time < t_final - 1e-12:
        try:
            state = fem_step(state, tol=tol)
        except DegenerateTriangleError:
            halt = "degenerate_triangle"
            break
        except SolverError:
            halt = "solver_failure"
            break
        if observer is not None:
            observer(state)
        if state.step % record_every == 0 or state.time >= t_final - 1e-12:
            rows.append(diagnostics.fem_report_row(state))
    return diagnostics.EvolutionReport(
        rows=rows, metadata=dict(metadata or {}), halt_reason=halt, final_state=state
    )
