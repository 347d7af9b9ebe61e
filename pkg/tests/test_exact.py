import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hmcflow.exact import (ConvergenceRecord, ExistenceError, SphereSolution,
                           eoc, erf, erf_inv, error_curve, error_surface)
from hmcflow.laws import CONSTANT, LEFLOCH
from hmcflow.mesh import TriSurface
from hmcflow.shapes import ShapeSpec, make_curve, make_sphere_mesh
from hmcflow.axi_fd import GridCurve


@given(st.floats(min_value=-6.0, max_value=6.0))
def test_erf_matches_libm(x):
    assert erf(x) == pytest.approx(math.erf(x), abs=1e-14)


def test_erf_extremes():
    assert erf(0.0) == 0.0
    assert erf(10.0) == 1.0
    assert erf(-10.0) == -1.0


def test_erf_inv_round_trip():
    for y in np.arange(0.1, 1.0, 0.1):
        assert abs(erf(erf_inv(y)) - y) <= 1e-12
        assert abs(erf(erf_inv(-y)) + y) <= 1e-12


@given(st.floats(min_value=-0.999, max_value=0.999))
def test_erf_inv_round_trip_hypothesis(y):
    assert erf(erf_inv(y)) == pytest.approx(y, abs=1e-12)


def test_erf_inv_domain():
    with pytest.raises(ValueError):
        erf_inv(1.0)


def test_radius_at_zero_is_r0():
    for law in (CONSTANT, LEFLOCH):
        for v0 in (-1.0, 0.0, 2.0):
            assert SphereSolution(law, 1.7, v0).radius(0.0) == pytest.approx(1.7)


def test_lefloch_closed_form_value():
    # r(0.5) = sqrt(1 + 2*1*0.5 - 2*0.25) = sqrt(1.5)
    sol = SphereSolution(LEFLOCH, 1.0, 1.0)
    assert sol.radius(0.5) == pytest.approx(math.sqrt(1.5), rel=1e-14)
    assert sol.radius(0.5) == pytest.approx(1.2247449, abs=1e-7)


def test_lefloch_shrink_time():
    # (r0/2)(V0 + sqrt(V0^2 + 2)); for r0=1, V0=0 this is sqrt(2)/2
    sol = SphereSolution(LEFLOCH, 1.0, 0.0)
    assert sol.shrink_time() == pytest.approx(0.5 * math.sqrt(2.0), rel=1e-14)
    with pytest.raises(ExistenceError):
        sol.radius(0.75)


def test_constant_v0_zero_closed_form_matches_ode():
    # two independent evaluations of the same radius history must agree
    closed = SphereSolution(CONSTANT, 1.0, 0.0)
    ode = SphereSolution(CONSTANT, 1.0, 0.0)
    ode.v0 = 0.0
    for t in np.linspace(0.0, 0.5, 21):
        r_closed = closed.radius(t)
        r_ode = ode._ode_radius(t) if t > 0 else 1.0
        assert abs(r_closed - r_ode) <= 1e-10


def test_constant_law_shrink_time_closed_form():
    # V0 = 0: sqrt(pi)/2 * r0
    sol = SphereSolution(CONSTANT, 1.0, 0.0)
    assert sol.shrink_time() == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-13)
    # general V0: the ODE radius must still be positive just below the bound
    sol2 = SphereSolution(CONSTANT, 1.0, -0.5)
    t_max = sol2.shrink_time()
    assert sol2.radius(0.98 * t_max) > 0.0
    with pytest.raises(ExistenceError):
        sol2.radius(t_max + 0.01)


def test_constant_law_monotone_shrink_for_nonpositive_v0():
    for v0 in (0.0, -1.0):
        sol = SphereSolution(CONSTANT, 1.0, v0)
        ts = np.linspace(0.0, 0.8 * sol.shrink_time(), 30)
        radii = [sol.radius(t) for t in ts]
        assert all(a > b for a, b in zip(radii, radii[1:]))


def test_constant_law_expands_then_shrinks_for_positive_v0():
    sol = SphereSolution(CONSTANT, 1.0, 1.0)
    # maximum where 4 ln(r0/r) + V0^2 = 0, i.e. r = exp(1/4)
    r_max = math.exp(0.25)
    ts = np.linspace(0.0, 0.95 * sol.shrink_time(), 400)
    radii = np.array([sol.radius(t) for t in ts])
    i = int(np.argmax(radii))
    assert 0 < i < len(ts) - 1
    assert radii[i] == pytest.approx(r_max, rel=1e-4)


def test_lefloch_maximum_at_half_r0_v0():
    sol = SphereSolution(LEFLOCH, 1.0, 1.0)
    t_peak = 0.5 * 1.0 * 1.0
    eps = 1e-6
    assert sol.radius(t_peak) > sol.radius(t_peak - eps)
    assert sol.radius(t_peak) > sol.radius(t_peak + eps)


def test_lefloch_closed_form_satisfies_its_ode():
    # central second difference of r(t) vs -((r')^2 + 2)/r
    sol = SphereSolution(LEFLOCH, 1.0, 0.5)
    dt = 1e-4  # balances truncation against roundoff in the quotient
    for t in (0.1, 0.3, 0.5):
        r = sol.radius(t)
        rdd = (sol.radius(t + dt) - 2.0 * r + sol.radius(t - dt)) / dt**2
        rd = (sol.radius(t + dt) - sol.radius(t - dt)) / (2.0 * dt)
        assert rdd == pytest.approx(-(rd**2 + 2.0) / r, abs=1e-6)


def test_error_surface_trivial_cases():
    sol = SphereSolution(LEFLOCH, 1.0, 0.0)
    surf = make_sphere_mesh(1.0, 1)
    run = []
    for t in (0.1, 0.2):
        r = sol.radius(t)
        run.append((t, TriSurface(r * surf.vertices, surf.triangles)))
    assert error_surface(run, sol) <= 1e-14

    one_vertex = TriSurface(
        1.1 * surf.vertices[: surf.vertex_count], surf.triangles
    )
    sol0 = SphereSolution(LEFLOCH, 1.0, 0.0)
    # every vertex at radius 1.1 against r(0) = 1
    assert error_surface([(0.0, one_vertex)], sol0) == pytest.approx(0.1, rel=1e-12)


def test_error_curve_trivial_cases():
    samples = make_curve(ShapeSpec("sphere"), 16)
    curve = GridCurve("open", samples, samples.copy(), dt=0.1, law=CONSTANT)

    def exact_map(rho, t):
        from hmcflow.shapes import sphere_profile
        return sphere_profile(rho)

    assert error_curve([(0.0, curve)], exact_map) <= 1e-15

    displaced = samples.copy()
    displaced[5] += (3e-4, 4e-4)
    curve2 = GridCurve("open", displaced, displaced.copy(), dt=0.1, law=CONSTANT)
    assert error_curve([(0.0, curve2)], exact_map) == pytest.approx(5e-4, rel=1e-10)


def test_eoc_halving_examples():
    assert eoc([(1.0, 4e-3), (0.5, 1e-3)])[1] == pytest.approx(2.0)
    assert eoc([(1.0, 2e-3), (0.5, 1e-3)])[1] == pytest.approx(1.0)
    assert eoc([(1.0, 4e-3), (0.5, 1e-3)])[0] is None


def test_eoc_rejects_bad_rows():
    with pytest.raises(ValueError):
        eoc([(1.0, 1e-3)])
    with pytest.raises(ValueError):
        eoc([(1.0, 1e-3), (0.5, 0.0)])
    with pytest.raises(ValueError):
        eoc([(0.5, 1e-3), (1.0, 1e-4)])


def test_convergence_record_fields():
    rec = ConvergenceRecord(label="J=32", h=1.0 / 32, error=6.3e-4, eoc=None)
    assert rec.h == pytest.approx(0.03125)


def test_sphere_radius_functional_alias():
    from hmcflow.exact import sphere_radius
    sol = SphereSolution(LEFLOCH, 2.0, 0.0)
    assert sphere_radius(sol, 0.0) == pytest.approx(2.0)


def test_sphere_speed():
    sol = SphereSolution(LEFLOCH, 1.0, 1.0)
    assert sol.speed(0.0) == pytest.approx(1.0)
    # dr/dt = (r0 v0 - 2t)/r vanishes at the radius maximum t = r0 v0 / 2
    assert sol.speed(0.5) == pytest.approx(0.0, abs=1e-14)
    ode = SphereSolution(CONSTANT, 1.0, -0.5)
    t = 0.2
    fd = (ode.radius(t + 1e-6) - ode.radius(t - 1e-6)) / 2e-6
    assert ode.speed(t) == pytest.approx(fd, abs=1e-7)
