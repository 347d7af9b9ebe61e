"""Solvers for hyperbolic mean curvature flows of closed surfaces in 3D.

Two discretizations of the same family of flows: a parametric P1 finite
element method on triangulated surfaces, and a finite difference method on
axisymmetric generating curves.  Includes exact radial reference solutions,
convergence and conservation diagnostics, and a batch CLI.
"""

from .axi_fd import GridCurve, axi_initialize, axi_run, axi_step, discrete_curvature_vector
from .diagnostics import EvolutionReport, curve_area, discrete_energies, kinf, surface_area
from .exact import SphereSolution, eoc, erf, erf_inv, error_curve, error_surface
from .fem_flow import FemState, fem_initialize, fem_run, fem_step
from .laws import CONSTANT, LEFLOCH, FlowLaw, law_from_name
from .mesh import TriSurface
from .shapes import ShapeSpec, make_curve, make_ellipsoid_mesh, make_sphere_mesh, make_torus_mesh

__version__ = "0.1.0"

__all__ = [
    "CONSTANT",
    "LEFLOCH",
    "EvolutionReport",
    "FemState",
    "FlowLaw",
    "GridCurve",
    "ShapeSpec",
    "SphereSolution",
    "TriSurface",
    "axi_initialize",
    "axi_run",
    "axi_step",
    "curve_area",
    "discrete_curvature_vector",
    "discrete_energies",
    "eoc",
    "erf",
    "erf_inv",
    "error_curve",
    "error_surface",
    "fem_initialize",
    "fem_run",
    "fem_step",
    "kinf",
    "law_from_name",
    "make_curve",
    "make_ellipsoid_mesh",
    "make_sphere_mesh",
    "make_torus_mesh",
    "surface_area",
]
