"""Initial shapes: triangulated surfaces and axisymmetric generating curves.

Sphere meshes come from midpoint subdivision of an octahedron with radial
projection, giving triangle counts 8 * 4^level.  Ellipsoids scale a sphere
mesh anisotropically.  Tori are structured tube meshes rotating about the
e2 axis, consistent with the generating-curve convention (rotation of the
(e1, e2) half-plane).  Generating curves are sampled on the uniform grid
rho_j = j/J; open profiles hit the rotation axis exactly at both ends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import TriSurface, mesh_size


@dataclass(frozen=True)
class ShapeSpec:
    """Shape selector used by configs and the CLI.

    kind: sphere | ellipsoid | torus | biconcave.  The relevant dimensions
    are ``radius`` (sphere, biconcave), ``a``/``b``/``c`` (ellipsoid
    semi-axes along e1, e2, e3), ``big_radius``/``small_radius`` (torus).
    The biconcave profile is a generic two-lobed disk with adjustable
    coefficients; it is not calibrated to any published shape data.
    """

    kind: str
    radius: float = 1.0
    a: float = 1.0
    b: float = 2.0
    c: float = 1.0
    big_radius: float = 2.0
    small_radius: float = 1.0
    c0: float = 0.2072
    c2: float = 2.0026
    c4: float = -1.1228

    def __post_init__(self):
        if self.kind not in ("sphere", "ellipsoid", "torus", "biconcave"):
            raise ValueError(f"unknown shape kind {self.kind!r}")
        dims = (
            (self.radius,) if self.kind in ("sphere", "biconcave")
            else (self.a, self.b, self.c) if self.kind == "ellipsoid"
            else (self.big_radius, self.small_radius)
        )
        if any(d <= 0.0 for d in dims):
            raise ValueError("shape dimensions must be positive")
        if self.kind == "torus" and self.big_radius <= self.small_radius:
            raise ValueError("torus requires big_radius > small_radius")

    @property
    def periodic(self) -> bool:
        return self.kind == "torus"


_OCTAHEDRON_VERTICES = np.array(
    [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]
)
_OCTAHEDRON_TRIANGLES = np.array(
    [
        [0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
        [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5],
    ]
)


def _subdivide(vertices: np.ndarray, triangles: np.ndarray):
    verts = list(map(tuple, vertices))
    midpoint: dict[tuple[int, int], int] = {}

    def mid(i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        idx = midpoint.get(key)
        if idx is None:
            p = 0.5 * (np.asarray(verts[i]) + np.asarray(verts[j]))
            idx = len(verts)
            verts.append(tuple(p))
            midpoint[key] = idx
        return idx

    new_tris = []
    for a, b, c in triangles:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        new_tris.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    return np.asarray(verts, dtype=float), np.asarray(new_tris, dtype=np.int64)


def make_sphere_mesh(r: float, level: int) -> TriSurface:
    """Octahedron subdivided ``level`` times, projected to radius r.

    8 * 4^level triangles; the largest triangle diameter is available via
    :func:`hmcflow.mesh.mesh_size`.
    """
    if r <= 0.0:
        raise ValueError("radius must be positive")
    if level < 0:
        raise ValueError("level must be nonnegative")
    verts = _OCTAHEDRON_VERTICES.copy()
    tris = _OCTAHEDRON_TRIANGLES.copy()
    for _ in range(level):
        verts, tris = _subdivide(verts, tris)
        verts /= np.linalg.norm(verts, axis=1)[:, None]
    surface = TriSurface(r * verts / np.linalg.norm(verts, axis=1)[:, None], tris)
    surface.validate()
    return surface


def make_ellipsoid_mesh(a: float, b: float, c: float, level: int) -> TriSurface:
    """Sphere mesh scaled to semi-axes (a, b, c) along (e1, e2, e3).

    The 2:1:1 cigar of the experiments is (1, 2, 1): long axis along e2,
    matching the generating-curve profile.
    """
    sphere = make_sphere_mesh(1.0, level)
    surface = TriSurface(sphere.vertices * np.array([a, b, c]), sphere.triangles)
    surface.validate()
    return surface


def make_torus_mesh(big_radius: float, small_radius: float, nu: int, nv: int) -> TriSurface:
    """Structured torus about the e2 axis: 2 * nu * nv triangles.

    Vertices satisfy (sqrt(x1^2 + x3^2) - R)^2 + x2^2 = r^2.
    """
    if big_radius <= small_radius or small_radius <= 0.0:
        raise ValueError("torus requires big_radius > small_radius > 0")
    if nu < 3 or nv < 3:
        raise ValueError("need nu, nv >= 3")
    iu = np.arange(nu)
    iv = np.arange(nv)
    theta = 2.0 * np.pi * iu / nu
    phi = 2.0 * np.pi * iv / nv
    rad = big_radius + small_radius * np.cos(phi)  # distance to the e2 axis
    verts = np.empty((nu * nv, 3))
    verts[:, 0] = np.repeat(np.cos(theta), nv) * np.tile(rad, nu)
    verts[:, 1] = np.tile(small_radius * np.sin(phi), nu)
    verts[:, 2] = np.repeat(np.sin(theta), nv) * np.tile(rad, nu)

    def idx(i: int, j: int) -> int:
        return (i % nu) * nv + (j % nv)

    tris = []
    for i in range(nu):
        for j in range(nv):
            p00 = idx(i, j)
            p10 = idx(i + 1, j)
            p11 = idx(i + 1, j + 1)
            p01 = idx(i, j + 1)
            tris.append((p00, p11, p10))
            tris.append((p00, p01, p11))
    surface = TriSurface(verts, np.asarray(tris, dtype=np.int64))
    surface.validate()
    return surface


def sphere_profile(rho: np.ndarray, r: float = 1.0) -> np.ndarray:
    """Semicircle from the south to the north pole:
    r * (cos(3 pi/2 + pi rho), sin(3 pi/2 + pi rho))."""
    ang = 1.5 * np.pi + np.pi * np.asarray(rho, dtype=float)
    return r * np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def make_curve(shape: ShapeSpec, grid_count: int) -> np.ndarray:
    """Sample a generating curve on the uniform grid with J = grid_count.

    Open shapes (sphere, ellipsoid, biconcave) return J + 1 nodes with the
    endpoints exactly on the rotation axis; the torus returns J periodic
    nodes.
    """
    if grid_count < 2:
        raise ValueError("need at least 2 grid intervals")
    j = np.arange(grid_count + 1, dtype=float)
    rho = j / grid_count
    if shape.kind == "torus":
        rho = rho[:-1]
        ang = 2.0 * np.pi * rho
        return np.stack(
            [shape.big_radius + shape.small_radius * np.cos(ang),
             shape.small_radius * np.sin(ang)],
            axis=-1,
        )
    if shape.kind == "sphere":
        pts = sphere_profile(rho, shape.radius)
    elif shape.kind == "ellipsoid":
        # ellipse arc meeting the axis vertically; e3 extent is ignored in
        # the axisymmetric setting (a surface of revolution needs a == c)
        pts = np.stack(
            [shape.a * np.sin(np.pi * rho), -shape.b * np.cos(np.pi * rho)],
            axis=-1,
        )
    else:  # biconcave
        w = np.sin(np.pi * rho)
        poly = shape.c0 + shape.c2 * w**2 + shape.c4 * w**4
        if np.any(poly <= 0.0):
            raise ValueError("biconcave profile coefficients give nonpositive thickness")
        pts = np.stack(
            [shape.radius * w,
             -0.5 * shape.radius * np.cos(np.pi * rho) * poly],
            axis=-1,
        )
    pts[0, 0] = 0.0
    pts[-1, 0] = 0.0
    return pts


def sphere_mesh_size(level: int) -> float:
    """Largest triangle diameter of the unit sphere mesh at ``level``."""
    return mesh_size(make_sphere_mesh(1.0, level))
