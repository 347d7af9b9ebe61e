"""Reference solutions for radially symmetric evolutions, error norms and EOC.

A sphere of radius r(t) evolving under either flow law stays a sphere; the
radius obeys

    constant law:  r'' = -2 / r
    lefloch law:   r'' = -((r')^2 + 2) / r

The lefloch law has the closed form r(t) = sqrt(r0^2 + 2 r0 V0 t - 2 t^2),
vanishing at T_max = (r0/2) (V0 + sqrt(V0^2 + 2)).  The constant law with
V0 = 0 has the closed form r(t) = r0 * exp(-[erfinv(sqrt(4/pi) t / r0)]^2);
for V0 != 0 an adaptive Runge-Kutta integration of the ODE is the reference.

erf and its inverse are implemented here (series plus continued fraction,
Newton iteration for the inverse) so the numerical contract does not depend
on the platform's libm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .laws import FlowLaw

_SQRT_PI = 1.7724538509055160273

ERF_TOL = 1e-13


def erf(x: float) -> float:
    """Gauss error function via Maclaurin series (|x| <= 2.5) or the
    Laplace continued fraction for the complement (|x| > 2.5)."""
    if x != x:
        return x
    ax = abs(x)
    if ax == 0.0:
        return 0.0
    if ax > 6.5:
        # erfc underflows below double precision beyond here
        return math.copysign(1.0, x)
    if ax <= 2.5:
        # sum_{n>=0} (-1)^n ax^(2n+1) / (n! (2n+1)), scaled by 2/sqrt(pi)
        term = ax
        total = ax
        n = 0
        while abs(term) > 1e-18 * abs(total):
            n += 1
            term *= -ax * ax / n
            total += term / (2 * n + 1)
        return math.copysign(2.0 / _SQRT_PI * total, x)
    # erfc(ax) = exp(-ax^2)/sqrt(pi) * 1/(ax + (1/2)/(ax + (2/2)/(ax + ...)))
    # evaluated with the modified Lentz algorithm.
    tiny = 1e-300
    f = ax
    c = ax
    d = 0.0
    for n in range(1, 300):
        a_n = 0.5 * n
        d = ax + a_n * d
        if d == 0.0:
            d = tiny
        c = ax + a_n / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-17:
            break
    erfc = math.exp(-ax * ax) / (_SQRT_PI * f)
    return math.copysign(1.0 - erfc, x)


def erf_inv(y: float) -> float:
    """Inverse error function by safeguarded Newton iteration.

    Converges to |erf(z) - y| <= ERF_TOL for y in (-1, 1).
    """
    if not -1.0 < y < 1.0:
        raise ValueError(f"erf_inv requires |y| < 1, got {y}")
    if y == 0.0:
        return 0.0
    ay = abs(y)
    # crude but monotone initial guess, refined below
    if ay < 0.9:
        z = ay * _SQRT_PI / 2.0 * (1.0 + ay * ay)
    else:
        z = math.sqrt(-math.log((1.0 - ay) * (1.0 + ay)))
    lo, hi = 0.0, 7.0
    for _ in range(100):
        r = erf(z) - ay
        if abs(r) <= ERF_TOL:
            break
        if r > 0.0:
            hi = z
        else:
            lo = z
        step = r * _SQRT_PI / 2.0 * math.exp(z * z)
        z_new = z - step
        if not lo < z_new < hi:
            z_new = 0.5 * (lo + hi)
        if z_new == z:
            break
        z = z_new
    return math.copysign(z, y)


class ExistenceError(ValueError):
    """Requested time lies beyond the solution's existence interval."""

    def __init__(self, t: float, t_max: float):
        super().__init__(
            f"time {t} is beyond the vanishing time (T_max estimate {t_max:.12g})"
        )
        self.t_max = t_max


@dataclass
class SphereSolution:
    """Radius history of an evolving sphere with initial speed v0."""

    law: FlowLaw
    r0: float
    v0: float = 0.0

    def __post_init__(self):
        if self.r0 <= 0.0:
            raise ValueError("r0 must be positive")
        self._ode = None  # lazy dense ODE solution, constant law with v0 != 0

    def shrink_time(self) -> float:
        """Vanishing time of the sphere.

        lefloch: (r0/2)(V0 + sqrt(V0^2 + 2)).  constant: integrating
        dr/dt = -sqrt(4 ln(r0/r) + V0^2) in closed form gives
        (sqrt(pi)/2) r0 exp(V0^2/4) (1 + erf(V0/2)).
        """
        if self.law.kind == "lefloch":
            return 0.5 * self.r0 * (self.v0 + math.sqrt(self.v0 * self.v0 + 2.0))
        return (
            0.5 * _SQRT_PI * self.r0 * math.exp(0.25 * self.v0**2)
            * (1.0 + erf(0.5 * self.v0))
        )

    def radius(self, t: float) -> float:
        t = float(t)
        t_max = self.shrink_time()
        if self.law.kind == "lefloch":
            disc = self.r0**2 + 2.0 * self.r0 * self.v0 * t - 2.0 * t * t
            if disc <= 0.0:
                raise ExistenceError(t, t_max)
            return math.sqrt(disc)
        if t >= t_max:
            raise ExistenceError(t, t_max)
        if self.v0 == 0.0:
            if t < 0.0:
                raise ExistenceError(t, t_max)
            if t == 0.0:
                return self.r0
            z = erf_inv(math.sqrt(4.0 / math.pi) * t / self.r0)
            return self.r0 * math.exp(-z * z)
        return self._ode_radius(t)

    def speed(self, t: float) -> float:
        """dr/dt.  Signed: positive while an initially expanding sphere grows."""
        if self.law.kind == "lefloch":
            r = self.radius(t)
            return (self.r0 * self.v0 - 2.0 * t) / r
        if self.v0 == 0.0 and t == 0.0:
            return 0.0
        if self._ode is None or self._ode.t_max < t:
            self._ode_radius(t)
        return float(self._ode.sol(t)[1]) if t > 0 else self.v0

    def _ode_radius(self, t: float) -> float:
        if t < 0.0:
            raise ExistenceError(t, self.shrink_time())
        if self._ode is None or self._ode.t_max < t:
            t_span = min(1.25 * t + 1e-6, self.shrink_time() * (1.0 - 1e-12))
            if t > t_span:
                raise ExistenceError(t, self.shrink_time())
            res = solve_ivp(
                lambda _t, y: [y[1], -2.0 / y[0]],
                (0.0, t_span),
                [self.r0, self.v0],
                method="RK45",
                rtol=1e-12,
                atol=1e-12,
                dense_output=True,
            )
            if not res.success:
                raise ExistenceError(t, self.shrink_time())
            res.t_max = t_span
            self._ode = res
        return float(self._ode.sol(t)[0])


# Backwards-style functional aliases used throughout the harness.
def sphere_radius(sol: SphereSolution, t: float) -> float:
    return sol.radius(t)


def error_surface(run: Iterable[tuple[float, "TriSurface"]], sol: SphereSolution) -> float:
    """Max over recorded steps and vertices of | |p_k| - r(t) |.

    The first entry of ``run`` is taken to be the state after one step; the
    initial data is not included in the maximum.
    """
    worst = 0.0
    for t, surface in run:
        r = sol.radius(t)
        radii = np.linalg.norm(surface.vertices, axis=1)
        worst = max(worst, float(np.max(np.abs(radii - r))))
    return worst


def error_curve(
    run: Iterable[tuple[float, "GridCurve"]],
    exact_map: Callable[[np.ndarray, float], np.ndarray],
) -> float:
    """Max over recorded steps and nodes of | x_exact(rho_j, t) - x_j |."""
    worst = 0.0
    for t, curve in run:
        target = exact_map(curve.rho(), t)
        diff = np.linalg.norm(target - curve.positions, axis=1)
        worst = max(worst, float(np.max(diff)))
    return worst


@dataclass
class ConvergenceRecord:
    label: str
    h: float
    error: float
    eoc: float | None = None


def eoc(records: Sequence[tuple[float, float]]) -> list[float | None]:
    """Experimental orders of convergence for (h, error) rows, coarse first.

    Entry i is log(e_{i-1}/e_i) / log(h_{i-1}/h_i); the first entry is None.
    """
    if len(records) < 2:
        raise ValueError("need at least two rows")
    out: list[float | None] = [None]
    for (h_prev, e_prev), (h_cur, e_cur) in zip(records, records[1:]):
        if h_prev <= 0 or h_cur <= 0 or e_prev <= 0 or e_cur <= 0:
            raise ValueError("h and error values must be positive")
        if h_cur >= h_prev:
            raise ValueError("resolutions must be strictly decreasing in h")
        out.append(math.log(e_prev / e_cur) / math.log(h_prev / h_cur))
    return out


class SurfaceErrorTracker:
    """Streaming form of error_surface, usable as a run observer."""

    def __init__(self, sol: SphereSolution):
        self.sol = sol
        self.max_error = 0.0

    def __call__(self, state) -> None:
        r = self.sol.radius(state.time)
        radii = np.linalg.norm(state.surface.vertices, axis=1)
        self.max_error = max(self.max_error, float(np.max(np.abs(radii - r))))


class CurveErrorTracker:
    """Streaming form of error_curve, usable as a run observer."""

    def __init__(self, exact_map: Callable[[np.ndarray, float], np.ndarray]):
        self.exact_map = exact_map
        self.max_error = 0.0

    def __call__(self, curve) -> None:
        target = self.exact_map(curve.rho(), curve.time)
        diff = np.linalg.norm(target - curve.positions, axis=1)
        self.max_error = max(self.max_error, float(np.max(diff)))
