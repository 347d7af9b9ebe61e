"""Closed triangulated surfaces and the discrete operators used by the
surface evolution scheme.

A piecewise linear field on a surface is represented by its nodal values:
an array of shape (K,) for scalars or (K, 3) for vector fields, K being the
vertex count.  All operators integrate exactly: hat-function gradients are
per-triangle constants, and linear weights enter through their triangle
mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.sparse import csr_matrix

# A triangle is degenerate when area <= DEGENERACY_FACTOR * (max edge)^2.
# Degeneracy is detected and reported, never repaired: the evolution has no
# remeshing, so a collapsing triangle is a result, not a recoverable state.
DEGENERACY_FACTOR = 1e-14


class DegenerateTriangleError(RuntimeError):
    def __init__(self, tri_index: int, area: float):
        super().__init__(f"triangle {tri_index} is degenerate (area {area:.3e})")
        self.tri_index = tri_index
        self.area = area


class SurfaceTopologyError(ValueError):
    """Surface is not a closed, consistently oriented triangle 2-manifold."""


@dataclass
class TriSurface:
    """Triangulated closed surface with one previous time level.

    ``vertices`` are the current nodal positions, ``prev_positions`` the
    nodal values of the backward map to the previous surface.  Connectivity
    is immutable over an evolution; steps produce new position arrays on
    the shared triangle array.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    prev_positions: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if self.prev_positions is None:
            self.prev_positions = self.vertices.copy()
        self.prev_positions = np.ascontiguousarray(self.prev_positions, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must have shape (K, 3)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must have shape (J, 3)")
        if self.prev_positions.shape != self.vertices.shape:
            raise ValueError("prev_positions must match vertices in shape")

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def triangle_count(self) -> int:
        return self.triangles.shape[0]

    def with_positions(self, vertices: np.ndarray, prev_positions: np.ndarray) -> "TriSurface":
        return TriSurface(vertices, self.triangles, prev_positions)

    def validate(self, check_orientation: bool = True) -> None:
        """Check the closed-manifold invariants.

        Every directed edge must occur exactly once and its reverse exactly
        once (closed, consistently oriented, no hanging vertices), all
        triangles must be nondegenerate, and with ``check_orientation`` the
        enclosed signed volume must be positive (outward normals).
        """
        tris = self.triangles
        k = self.vertex_count
        if tris.min() < 0 or tris.max() >= k:
            raise SurfaceTopologyError("triangle indices out of range")
        used = np.zeros(k, dtype=bool)
        used[tris.ravel()] = True
        if not used.all():
            raise SurfaceTopologyError("surface has hanging vertices")
        edges = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        directed = set(map(tuple, edges))
        if len(directed) != len(edges):
            raise SurfaceTopologyError("duplicate directed edge (inconsistent orientation)")
        for a, b in directed:
            if (b, a) not in directed:
                raise SurfaceTopologyError(f"edge ({a}, {b}) is not shared by two triangles")
        triangle_areas(self)  # raises on degenerate triangles
        if check_orientation and signed_volume(self) <= 0.0:
            raise SurfaceTopologyError("orientation is inward (signed volume <= 0)")


class TriangleGeometry(NamedTuple):
    area: float
    normal: np.ndarray
    grad_basis: np.ndarray  # (3, 3); row i is the gradient of hat i


def _cross_normals(surface: TriSurface):
    p = surface.vertices[surface.triangles]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    norms = np.linalg.norm(cross, axis=1)
    return p, cross, norms


def _check_degeneracy(surface: TriSurface, areas: np.ndarray, p: np.ndarray) -> None:
    edges = np.stack(
        [p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1
    )
    max_edge_sq = np.max(np.sum(edges * edges, axis=2), axis=1)
    bad = areas <= DEGENERACY_FACTOR * max_edge_sq
    if np.any(bad):
        j = int(np.argmax(bad))
        raise DegenerateTriangleError(j, float(areas[j]))


def triangle_areas(surface: TriSurface) -> np.ndarray:
    p, _cross, norms = _cross_normals(surface)
    areas = 0.5 * norms
    _check_degeneracy(surface, areas, p)
    return areas


def triangle_areas_normals(surface: TriSurface) -> tuple[np.ndarray, np.ndarray]:
    p, cross, norms = _cross_normals(surface)
    areas = 0.5 * norms
    _check_degeneracy(surface, areas, p)
    return areas, cross / norms[:, None]


def hat_gradients(surface: TriSurface) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Areas, unit normals, and per-triangle hat-function gradients.

    Returns (areas (J,), normals (J, 3), grads (J, 3, 3)) where
    grads[j, i] is the in-plane gradient of the hat function of local
    vertex i on triangle j.  The three gradients of a triangle sum to zero.
    """
    p, cross, norms = _cross_normals(surface)
    areas = 0.5 * norms
    _check_degeneracy(surface, areas, p)
    normals = cross / norms[:, None]
    grads = np.empty_like(p)
    # grad hat_i = n x (opposite edge) / (2 area), edge oriented to make the
    # gradient point toward vertex i
    grads[:, 0] = np.cross(normals, p[:, 2] - p[:, 1])
    grads[:, 1] = np.cross(normals, p[:, 0] - p[:, 2])
    grads[:, 2] = np.cross(normals, p[:, 1] - p[:, 0])
    grads /= (2.0 * areas)[:, None, None]
    return areas, normals, grads


def triangle_geometry(surface: TriSurface, tri_index: int) -> TriangleGeometry:
    """Area, oriented unit normal and hat gradients of one triangle."""
    tri = surface.triangles[tri_index]
    p = surface.vertices[tri]
    cross = np.cross(p[1] - p[0], p[2] - p[0])
    norm = float(np.linalg.norm(cross))
    area = 0.5 * norm
    max_edge_sq = max(
        float(np.sum((p[1] - p[0]) ** 2)),
        float(np.sum((p[2] - p[1]) ** 2)),
        float(np.sum((p[0] - p[2]) ** 2)),
    )
    if area <= DEGENERACY_FACTOR * max_edge_sq:
        raise DegenerateTriangleError(int(tri_index), area)
    normal = cross / norm
    grad = np.empty((3, 3))
    grad[0] = np.cross(normal, p[2] - p[1])
    grad[1] = np.cross(normal, p[0] - p[2])
    grad[2] = np.cross(normal, p[1] - p[0])
    grad /= 2.0 * area
    return TriangleGeometry(area, normal, grad)


def lumped_mass_diagonal(surface: TriSurface) -> np.ndarray:
    """Vertex weights of the mass-lumped inner product: one third of the
    incident triangle area per vertex."""
    areas = triangle_areas(surface)
    out = np.zeros(surface.vertex_count)
    np.add.at(out, surface.triangles.ravel(), np.repeat(areas / 3.0, 3))
    return out


def _field_on(surface: TriSurface, values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape[0] != surface.vertex_count:
        raise ValueError(f"{name} must have one value per vertex")
    return arr


def stiffness_apply(
    surface: TriSurface, fld: np.ndarray, weight: np.ndarray | None = None
) -> np.ndarray:
    """Galerkin stiffness action sum_j w_j |t_j| grad(u) . grad(hat_k).

    ``weight`` is an optional positive nodal field entering through its
    triangle mean (exact for linear weights).  Works on scalar or 3-vector
    nodal fields.
    """
    u = _field_on(surface, fld, "field")
    areas, _normals, grads = hat_gradients(surface)
    coeff = areas
    if weight is not None:
        w = _field_on(surface, weight, "weight")
        if w.ndim != 1:
            raise ValueError("weight must be a scalar field")
        coeff = areas * np.mean(w[surface.triangles], axis=1)
    tri = surface.triangles
    scalar = u.ndim == 1
    uv = u[:, None] if scalar else u
    # per-triangle constant gradient of the interpolant: (J, 3, comps)
    grad_u = np.einsum("jik,jim->jkm", grads, uv[tri])
    contrib = coeff[:, None, None] * np.einsum("jik,jkm->jim", grads, grad_u)
    out = np.zeros_like(uv)
    np.add.at(out, tri.ravel(), contrib.reshape(-1, uv.shape[1]))
    return out[:, 0] if scalar else out


def stiffness_matrix(surface: TriSurface, weight: np.ndarray | None = None) -> csr_matrix:
    """Assembled sparse stiffness matrix matching :func:`stiffness_apply`."""
    areas, _normals, grads = hat_gradients(surface)
    coeff = areas
    if weight is not None:
        w = _field_on(surface, weight, "weight")
        coeff = areas * np.mean(w[surface.triangles], axis=1)
    local = np.einsum("j,jik,jlk->jil", coeff, grads, grads)
    tri = surface.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    k = surface.vertex_count
    return csr_matrix((local.ravel(), (rows, cols)), shape=(k, k))


def gradient_rhs(surface: TriSurface, scalar_field: np.ndarray) -> np.ndarray:
    """Weak load of the interpolant's gradient: vertex k receives
    |t| / 3 times the per-triangle gradient, for each incident triangle."""
    s = _field_on(surface, scalar_field, "scalar_field")
    if s.ndim != 1:
        raise ValueError("scalar_field must be a scalar field")
    if not np.all(np.isfinite(s)):
        raise ValueError("scalar_field must be finite")
    areas, _normals, grads = hat_gradients(surface)
    tri = surface.triangles
    grad_s = np.einsum("jik,ji->jk", grads, s[tri])
    contrib = (areas / 3.0)[:, None] * grad_s
    out = np.zeros((surface.vertex_count, 3))
    np.add.at(out, tri.ravel(), np.repeat(contrib, 3, axis=0))
    return out


def discrete_normal(surface: TriSurface) -> np.ndarray:
    """Mass-lumped vertex normal: area-weighted average of the incident
    triangle normals.  Not unit length in general."""
    areas, normals = triangle_areas_normals(surface)
    acc = np.zeros((surface.vertex_count, 3))
    wsum = np.zeros(surface.vertex_count)
    np.add.at(acc, surface.triangles.ravel(), np.repeat(areas[:, None] * normals, 3, axis=0))
    np.add.at(wsum, surface.triangles.ravel(), np.repeat(areas, 3))
    return acc / wsum[:, None]


def discrete_mean_curvature(surface: TriSurface) -> np.ndarray:
    """Mass-lumped mean curvature vector: minus the stiffness action on the
    positions, divided by the lumped mass.  Approximates H times the unit
    normal; roughly -2 p on the unit sphere."""
    mass = lumped_mass_diagonal(surface)
    return -stiffness_apply(surface, surface.vertices) / mass[:, None]


def signed_volume(surface: TriSurface) -> float:
    p = surface.vertices[surface.triangles]
    return float(np.sum(np.einsum("ji,ji->j", p[:, 0], np.cross(p[:, 1], p[:, 2])))) / 6.0


def mesh_size(surface: TriSurface) -> float:
    """Largest triangle diameter (the longest edge)."""
    p = surface.vertices[surface.triangles]
    edges = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
    return float(np.sqrt(np.max(np.sum(edges * edges, axis=2))))


def quality_ratio(surface: TriSurface) -> float:
    """Largest over smallest triangle area."""
    areas = triangle_areas(surface)
    return float(np.max(areas) / np.min(areas))
