"""Finite difference scheme for axisymmetric surfaces via their generating
curves.

The curve x(rho, t) in the (e1, e2) half-plane generates the surface by
rotation about the e2 axis.  Open curves (genus-0 surfaces) meet the axis
vertically at both ends; periodic curves (genus-1) stay strictly in the
right half-plane.  One time step solves, per coordinate component, a
strictly diagonally dominant tridiagonal system (cyclic for periodic
topology); the e1 component of open curves carries exact on-axis Dirichlet
rows.

Index conventions for open curves with J intervals: nodes j = 0..J, and
q[j], tau[j] describe segment (j-1, j) for j = 1..J (entry 0 is unused).
Ghost nodes beyond the boundary are reflections across the e2 axis,
(a, b) -> (-a, b); they appear only in the discrete curvature vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .laws import FlowLaw
from .linsolve import DominanceError, TridiagSystem, solve_tridiagonal

TANGENT_CUSP_TOL = 1e-12

# Automatic halt thresholds: the experiments run arbitrarily close to
# singularities, so batch runs stop themselves instead of crashing.
Q_COLLAPSE_FRACTION = 1e-8
AXIS_EPS = 1e-8
INV_KINF_MIN = 1e-6


class CurveGeometryError(RuntimeError):
    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


def perp(v: np.ndarray) -> np.ndarray:
    """Clockwise rotation through pi/2: (a, b) -> (b, -a)."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = v[..., 1]
    out[..., 1] = -v[..., 0]
    return out


@dataclass
class GridCurve:
    """Generating-curve grid function with one previous time level."""

    topology: str  # "open" | "periodic"
    positions: np.ndarray  # (N, 2); N = J + 1 open, N = J periodic
    prev_positions: np.ndarray
    dt: float
    law: FlowLaw
    time: float = 0.0
    step: int = 0

    def __post_init__(self):
        if self.topology not in ("open", "periodic"):
            raise ValueError(f"unknown topology {self.topology!r}")
        self.positions = np.ascontiguousarray(self.positions, dtype=float)
        self.prev_positions = np.ascontiguousarray(self.prev_positions, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError("positions must have shape (N, 2)")
        if self.positions.shape != self.prev_positions.shape:
            raise ValueError("prev_positions must match positions in shape")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")

    @property
    def grid_count(self) -> int:
        """Number of grid intervals J."""
        n = self.positions.shape[0]
        return n - 1 if self.topology == "open" else n

    @property
    def h(self) -> float:
        return 1.0 / self.grid_count

    def rho(self) -> np.ndarray:
        return np.arange(self.positions.shape[0]) * self.h

    def validate(self) -> None:
        x = self.positions
        if self.topology == "open":
            if x[0, 0] != 0.0 or x[-1, 0] != 0.0:
                raise CurveGeometryError(
                    "axis_collision", "open curve endpoints must lie exactly on the axis"
                )
            if np.any(x[1:-1, 0] <= 0.0):
                raise CurveGeometryError(
                    "axis_collision", "interior nodes must have positive distance to the axis"
                )
        else:
            if np.any(x[:, 0] <= 0.0):
                raise CurveGeometryError(
                    "axis_collision", "periodic curve must stay in the right half-plane"
                )
        if np.any(_segment_norms(x, self.topology) <= 0.0):
            raise CurveGeometryError("segment_collapse", "zero-length segment")


def _segment_norms(x: np.ndarray, topology: str) -> np.ndarray:
    if topology == "open":
        return np.linalg.norm(x[1:] - x[:-1], axis=1)
    return np.linalg.norm(x - np.roll(x, 1, axis=0), axis=1)


class _Geometry(NamedTuple):
    q: np.ndarray      # segment length elements |delta^- x| (chord / h)
    tau: np.ndarray    # unit segment tangents
    theta: np.ndarray  # averaged vertex tangents (open: rows 1..J-1 valid)


def _geometry(x: np.ndarray, topology: str, h: float, need_theta: bool = True) -> _Geometry:
    n = x.shape[0]
    if topology == "open":
        seg = x[1:] - x[:-1]
        norms = np.linalg.norm(seg, axis=1)
        if np.any(norms <= 0.0):
            raise CurveGeometryError("segment_collapse", "zero-length segment")
        q = np.empty(n)
        q[0] = np.nan  # no segment ends at node 0
        q[1:] = norms / h
        tau = np.empty_like(x)
        tau[0] = np.nan
        tau[1:] = seg / norms[:, None]
        theta = np.full_like(x, np.nan)
        if need_theta and n > 2:
            s = tau[1:-1] + tau[2:]
            sn = np.linalg.norm(s, axis=1)
            if np.any(sn <= TANGENT_CUSP_TOL):
                j = int(np.argmin(sn)) + 1
                raise CurveGeometryError(
                    "tangent_cusp", f"antipodal tangents at node {j}"
                )
            theta[1:-1] = s / sn[:, None]
        return _Geometry(q, tau, theta)
    seg = x - np.roll(x, 1, axis=0)
    norms = np.linalg.norm(seg, axis=1)
    if np.any(norms <= 0.0):
        raise CurveGeometryError("segment_collapse", "zero-length segment")
    q = norms / h
    tau = seg / norms[:, None]
    theta = np.empty_like(x)
    if need_theta:
        s = tau + np.roll(tau, -1, axis=0)
        sn = np.linalg.norm(s, axis=1)
        if np.any(sn <= TANGENT_CUSP_TOL):
            j = int(np.argmin(sn))
            raise CurveGeometryError("tangent_cusp", f"antipodal tangents at node {j}")
        theta = s / sn[:, None]
    return _Geometry(q, tau, theta)


class DifferenceQuotients(NamedTuple):
    backward: np.ndarray
    forward: np.ndarray
    central: np.ndarray


def difference_quotients(curve: GridCurve, j: int) -> DifferenceQuotients:
    """Backward, forward and central difference quotients at node j.

    Open topology requires 1 <= j <= J-1 so that all three exist;
    periodic indices wrap.
    """
    x = curve.positions
    n = x.shape[0]
    h = curve.h
    if curve.topology == "open":
        if not 0 < j < n - 1:
            raise IndexError(f"node {j} has no two-sided neighbourhood")
        xm, xj, xp = x[j - 1], x[j], x[j + 1]
    else:
        xm, xj, xp = x[(j - 1) % n], x[j % n], x[(j + 1) % n]
    return DifferenceQuotients(
        (xj - xm) / h, (xp - xj) / h, (xp - xm) / (2.0 * h)
    )


def vertex_tangent(curve: GridCurve, j: int) -> np.ndarray:
    """Averaged unit tangent at node j: normalized tau_j + tau_{j+1}."""
    x = curve.positions
    n = x.shape[0]
    if curve.topology == "open":
        if not 0 < j < n - 1:
            raise IndexError(f"node {j} has no averaged tangent")
        left = x[j] - x[j - 1]
        right = x[j + 1] - x[j]
    else:
        left = x[j % n] - x[(j - 1) % n]
        right = x[(j + 1) % n] - x[j % n]
    s = left / np.linalg.norm(left) + right / np.linalg.norm(right)
    sn = float(np.linalg.norm(s))
    if sn <= TANGENT_CUSP_TOL:
        raise CurveGeometryError("tangent_cusp", f"antipodal tangents at node {j}")
    return s / sn


def discrete_curvature_vector(curve: GridCurve) -> np.ndarray:
    """Nodal mean curvature vector of the generated surface.

    Interior nodes combine the tangent turning rate with the rotational
    term -(x_rho . e2) / (|x_rho| x . e1) along the vertex normal; on-axis
    boundary nodes use ghost reflection, which doubles the curve curvature
    (the rotational term tends to kappa nu on the axis).  For the unit
    semicircle profile the magnitude tends to 2.
    """
    x = curve.positions
    h = curve.h
    n = x.shape[0]
    geo = _geometry(x, curve.topology, h)
    if curve.topology == "periodic":
        q_next = np.roll(geo.q, -1)
        tau_next = np.roll(geo.tau, -1, axis=0)
        a = 0.5 * (geo.q + q_next)
        axis = (np.roll(x[:, 1], -1) - np.roll(x[:, 1], 1)) / 2.0
        if np.any(x[:, 0] <= 0.0):
            raise CurveGeometryError("axis_collision", "node on or behind the axis")
        axis = axis / x[:, 0]
        return (tau_next - geo.tau - axis[:, None] * perp(geo.theta)) / (h * a)[:, None]
    if np.any(x[1:-1, 0] <= 0.0):
        raise CurveGeometryError("axis_collision", "interior node on or behind the axis")
    y = np.empty_like(x)
    a_int = 0.5 * (geo.q[1:-1] + geo.q[2:])
    axis = (x[2:, 1] - x[:-2, 1]) / 2.0 / x[1:-1, 0]
    y[1:-1] = (
        geo.tau[2:] - geo.tau[1:-1] - axis[:, None] * perp(geo.theta[1:-1])
    ) / (h * a_int)[:, None]
    # ghost reflection (a, b) -> (-a, b); the mirrored segment has the same
    # length, so the ghost q equals its interior partner
    ghost_lo = np.array([-x[1, 0], x[1, 1]])
    seg_lo = x[0] - ghost_lo
    tau_lo = seg_lo / np.linalg.norm(seg_lo)
    y[0] = 2.0 * (geo.tau[1] - tau_lo) / (h * geo.q[1])
    ghost_hi = np.array([-x[-2, 0], x[-2, 1]])
    seg_hi = ghost_hi - x[-1]
    tau_hi = seg_hi / np.linalg.norm(seg_hi)
    y[-1] = 2.0 * (tau_hi - geo.tau[-1]) / (h * geo.q[-1])
    return y


def axi_initialize(
    x0_samples: np.ndarray,
    v0: float,
    dt: float,
    law: FlowLaw,
    topology: str = "open",
) -> GridCurve:
    """Build the two-level initial data from curve samples and a constant
    initial normal speed.

    The previous level is the Taylor step backward in time: the nodes move
    by -dt v0 along the vertex normal plus dt^2/2 g(v0^2) times the
    discrete curvature vector; on-axis endpoints move along e2 with the
    sign fixed by the adjacent tangent.
    """
    x0 = np.ascontiguousarray(x0_samples, dtype=float)
    curve = GridCurve(topology, x0, x0.copy(), dt, law)
    curve.validate()
    y0 = discrete_curvature_vector(curve)
    geo = _geometry(x0, topology, curve.h)
    g0 = law.evaluate(v0 * v0)
    prev = x0 + 0.5 * dt * dt * g0 * y0
    if topology == "periodic":
        prev -= dt * v0 * perp(geo.theta)
    else:
        prev[1:-1] -= dt * v0 * perp(geo.theta[1:-1])
        # tau at the first node is borrowed from the first segment
        prev[0, 1] += dt * v0 * math.copysign(1.0, geo.tau[1, 0])
        prev[-1, 1] += dt * v0 * math.copysign(1.0, geo.tau[-1, 0])
        prev[0, 0] = 0.0
        prev[-1, 0] = 0.0
    return GridCurve(topology, x0, prev, dt, law, time=0.0, step=0)


def axi_step(curve: GridCurve) -> GridCurve:
    """Advance one time level.

    Assembles the two decoupled tridiagonal systems (cyclic for periodic
    topology, Dirichlet/Robin boundary rows for open) and shifts the time
    levels.  Raises CurveGeometryError or DominanceError when the geometry
    has degenerated; callers treat that as a detected singularity.
    """
    x = curve.positions
    xp = curve.prev_positions
    h = curve.h
    dt = curve.dt
    n = x.shape[0]
    geo = _geometry(x, curve.topology, h)
    geop = _geometry(xp, curve.topology, h)
    vel2 = np.sum((x - xp) ** 2, axis=1) / (dt * dt)
    ghat = np.asarray(curve.law.evaluate(vel2), dtype=float)

    if curve.topology == "periodic":
        if np.any(x[:, 0] <= 0.0):
            raise CurveGeometryError("axis_collision", "node on or behind the axis")
        q = geo.q
        q_next = np.roll(q, -1)
        mass = 0.5 * (q + q_next) * h
        c_minus = ghat / (2.0 * h * q)
        c_plus = ghat / (2.0 * h * q_next)
        diag = mass / dt**2 + c_minus + c_plus
        flux_prev = (ghat / (2.0 * h))[:, None] * (
            (np.roll(xp, -1, axis=0) - xp) / q_next[:, None]
            - (xp - np.roll(xp, 1, axis=0)) / q[:, None]
        )
        axis = (np.roll(x[:, 1], -1) - np.roll(x[:, 1], 1)) / 2.0 / x[:, 0]
        tang = np.sum((x - xp) / dt * (geo.theta - geop.theta) / dt, axis=1)
        rhs = (
            (mass / dt**2)[:, None] * (2.0 * x - xp)
            + flux_prev
            - (ghat * axis)[:, None] * perp(geo.theta)
            - (mass * tang)[:, None] * geo.theta
        )
        system = TridiagSystem(-c_minus, diag, -c_plus, rhs, cyclic=True)
        x_new = solve_tridiagonal(system)
    else:
        if np.any(x[1:-1, 0] <= 0.0):
            raise CurveGeometryError("axis_collision", "interior node on or behind the axis")
        j_max = n - 1  # = J
        q = geo.q
        mass = 0.5 * (q[1:-1] + q[2:]) * h
        c_minus = ghat[1:-1] / (2.0 * h * q[1:-1])
        c_plus = ghat[1:-1] / (2.0 * h * q[2:])
        diag_int = mass / dt**2 + c_minus + c_plus
        flux_prev = (ghat[1:-1] / (2.0 * h))[:, None] * (
            (xp[2:] - xp[1:-1]) / q[2:, None] - (xp[1:-1] - xp[:-2]) / q[1:-1, None]
        )
        axis = (x[2:, 1] - x[:-2, 1]) / 2.0 / x[1:-1, 0]
        tang = np.sum(
            (x[1:-1] - xp[1:-1]) / dt * (geo.theta[1:-1] - geop.theta[1:-1]) / dt,
            axis=1,
        )
        rhs_int = (
            (mass / dt**2)[:, None] * (2.0 * x[1:-1] - xp[1:-1])
            + flux_prev
            - (ghat[1:-1] * axis)[:, None] * perp(geo.theta[1:-1])
            - (mass * tang)[:, None] * geo.theta[1:-1]
        )
        # e1 component: on-axis Dirichlet rows eliminated exactly
        sub_e1 = -c_minus
        sup_e1 = -c_plus
        sub_e1 = sub_e1.copy()
        sup_e1 = sup_e1.copy()
        sub_e1[0] = 0.0
        sup_e1[-1] = 0.0
        sol_e1 = solve_tridiagonal(
            TridiagSystem(sub_e1, diag_int, sup_e1, rhs_int[:, 0])
        )
        # e2 component: Robin-type rows at j = 0 and j = J
        beta0 = 0.25 * h * h * q[1] ** 2 / (ghat[0] * dt * dt)
        beta_j = 0.25 * h * h * q[j_max] ** 2 / (ghat[j_max] * dt * dt)
        sub_e2 = np.concatenate(([0.0], -c_minus, [-1.0]))
        diag_e2 = np.concatenate(([1.0 + beta0], diag_int, [1.0 + beta_j]))
        sup_e2 = np.concatenate(([-1.0], -c_plus, [0.0]))
        rhs_e2 = np.concatenate(
            (
                [beta0 * (2.0 * x[0, 1] - xp[0, 1])],
                rhs_int[:, 1],
                [beta_j * (2.0 * x[-1, 1] - xp[-1, 1])],
            )
        )
        sol_e2 = solve_tridiagonal(TridiagSystem(sub_e2, diag_e2, sup_e2, rhs_e2))
        x_new = np.empty_like(x)
        x_new[:, 0] = 0.0
        x_new[1:-1, 0] = sol_e1
        x_new[:, 1] = sol_e2

    step = curve.step + 1
    return GridCurve(
        curve.topology, x_new, x.copy(), dt, curve.law,
        time=step * dt, step=step,
    )


def axi_run(
    curve: GridCurve,
    t_final: float,
    observer: Callable[[GridCurve], None] | None = None,
    record_every: int = 1,
    metadata: dict | None = None,
) -> "EvolutionReport":
    """Run the evolution until t_final or a detected singularity.

    Early halts are recorded outcomes, not failures: the report's
    halt_reason names what stopped the run and final_state holds the last
    valid curve.
    """
    from .diagnostics import EvolutionReport, curve_report_row

    if t_final < curve.time:
        raise ValueError("t_final must not precede the current time")
    try:
        rows = [curve_report_row(curve)]
    except CurveGeometryError as err:
        return EvolutionReport(
            rows=[], metadata=dict(metadata or {}),
            halt_reason=err.reason, final_state=curve,
        )
    mean_q0 = float(np.mean(_segment_norms(curve.positions, curve.topology))) / curve.h
    halt = "reached_t_final"
    while curve.time < t_final - 1e-12:
        try:
            stepped = axi_step(curve)
            row = curve_report_row(stepped)
        except (CurveGeometryError, DominanceError) as err:
            halt = getattr(err, "reason", "dominance_lost")
            break
        curve = stepped
        if observer is not None:
            observer(curve)
        if curve.step % record_every == 0 or curve.time >= t_final - 1e-12:
            rows.append(row)
        q_min = float(np.min(_segment_norms(curve.positions, curve.topology))) / curve.h
        interior = (
            curve.positions[1:-1, 0] if curve.topology == "open" else curve.positions[:, 0]
        )
        if q_min < Q_COLLAPSE_FRACTION * mean_q0:
            halt = "segment_collapse"
        elif interior.size and float(np.min(interior)) < AXIS_EPS:
            halt = "axis_collision"
        elif row.inv_kinf < INV_KINF_MIN:
            halt = "curvature_blowup"
        else:
            continue
        if rows[-1] is not row:
            rows.append(row)
        break
    return EvolutionReport(
        rows=rows, metadata=dict(metadata or {}), halt_reason=halt, final_state=curve
    )
