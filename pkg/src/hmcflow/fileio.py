"""File formats: OFF surface meshes, curve snapshot CSVs, and run configs.

OFF files are plain ASCII with a counts line "V F 0"; coordinates are
written with 17 significant digits so a write-read round trip reproduces
the doubles exactly.  Configs are flat key=value text files; unknown keys
are rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .laws import FlowLaw, law_from_name
from .mesh import TriSurface
from .shapes import ShapeSpec


class OffFormatError(ValueError):
    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.line_no = line_no


class ConfigError(ValueError):
    pass


def write_off(surface: TriSurface, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("OFF\n")
        f.write(f"{surface.vertex_count} {surface.triangle_count} 0\n")
        for p in surface.vertices:
            f.write(f"{p[0]:.17e} {p[1]:.17e} {p[2]:.17e}\n")
        for t in surface.triangles:
            f.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def read_off(path) -> TriSurface:
    """Parse an ASCII OFF file and validate the closed-surface invariants."""
    with open(path, "r", encoding="ascii") as f:
        raw = f.readlines()
    lines: list[tuple[int, str]] = []
    for i, line in enumerate(raw, start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            lines.append((i, stripped))
    if not lines or lines[0][1] != "OFF":
        raise OffFormatError(path, lines[0][0] if lines else 1, "missing OFF header")
    if len(lines) < 2:
        raise OffFormatError(path, lines[0][0], "missing counts line")
    no, counts = lines[1]
    parts = counts.split()
    if len(parts) != 3:
        raise OffFormatError(path, no, f"counts line must have 3 fields, got {counts!r}")
    try:
        n_vert, n_face, _n_edge = (int(p) for p in parts)
    except ValueError:
        raise OffFormatError(path, no, f"bad counts line {counts!r}") from None
    body = lines[2:]
    if len(body) != n_vert + n_face:
        raise OffFormatError(
            path, no, f"expected {n_vert + n_face} data lines, found {len(body)}"
        )
    vertices = np.empty((n_vert, 3))
    for k in range(n_vert):
        no_k, text = body[k]
        fields = text.split()
        if len(fields) != 3:
            raise OffFormatError(path, no_k, "vertex line must have 3 coordinates")
        try:
            vertices[k] = [float(v) for v in fields]
        except ValueError:
            raise OffFormatError(path, no_k, f"bad vertex line {text!r}") from None
    triangles = np.empty((n_face, 3), dtype=np.int64)
    for k in range(n_face):
        no_k, text = body[n_vert + k]
        fields = text.split()
        if not fields or fields[0] != "3" or len(fields) != 4:
            raise OffFormatError(path, no_k, f"face {k} is not a triangle")
        try:
            triangles[k] = [int(v) for v in fields[1:]]
        except ValueError:
            raise OffFormatError(path, no_k, f"bad face line {text!r}") from None
    surface = TriSurface(vertices, triangles)
    surface.validate()
    return surface


def write_curve_csv(curve, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("rho,x1,x2\n")
        for rho, (x1, x2) in zip(curve.rho(), curve.positions):
            f.write(f"{rho:.9e},{x1:.17e},{x2:.17e}\n")


def read_curve_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (rho, positions); topology is not stored in the snapshot."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:3]


_SHAPE_KEYS = {
    "sphere": ("radius",),
    "ellipsoid": ("a", "b", "c"),
    "torus": ("R", "r"),
    "biconcave": ("radius", "c0", "c2", "c4"),
}

_KNOWN_KEYS = {
    "law", "shape", "v0", "dt", "dt_factor", "dt_power", "t_final",
    "level", "J", "output_dir", "output_every",
    "radius", "a", "b", "c", "R", "r", "c0", "c2", "c4",
}


@dataclass
class RunConfig:
    law: FlowLaw
    shape: ShapeSpec
    v0: float
    t_final: float
    dt: float | None = None
    dt_factor: float | None = None
    dt_power: float = 1.0
    levels: tuple[int, ...] | None = None
    grid_counts: tuple[int, ...] | None = None
    output_dir: str | None = None
    output_every: int = 1
    raw: dict = field(default_factory=dict)

    @property
    def solver(self) -> str:
        """'fem' when a refinement level is given, 'axi' for a grid count."""
        return "fem" if self.levels is not None else "axi"

    def time_step(self, h: float) -> float:
        if self.dt is not None:
            return self.dt
        return self.dt_factor * h**self.dt_power


def _parse_kv(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="ascii") as f:
        for i, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{i}: expected key=value, got {text!r}")
            key, value = (part.strip() for part in text.split("=", 1))
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"{path}:{i}: unknown key {key!r}")
            if key in out:
                raise ConfigError(f"{path}:{i}: duplicate key {key!r}")
            out[key] = value
    return out


def _floats(kv: dict[str, str], key: str, default=None) -> float | None:
    if key not in kv:
        return default
    try:
        return float(kv[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: bad number {kv[key]!r}") from None


def _int_list(kv: dict[str, str], key: str) -> tuple[int, ...] | None:
    if key not in kv:
        return None
    try:
        values = tuple(int(part) for part in kv[key].split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"key {key!r}: bad integer list {kv[key]!r}") from None
    if not values or any(v < 0 for v in values):
        raise ConfigError(f"key {key!r}: need nonnegative integers")
    return values


def read_config(path) -> RunConfig:
    kv = _parse_kv(path)
    for required in ("law", "shape", "t_final"):
        if required not in kv:
            raise ConfigError(f"missing required key {required!r}")
    try:
        law = law_from_name(kv["law"])
    except ValueError as err:
        raise ConfigError(str(err)) from None
    kind = kv["shape"].strip().lower()
    if kind == "cigar":  # 2:1:1 cigar shorthand, unit long semi-axis along e2
        kind, kv = "ellipsoid", {**kv, "a": kv.get("a", "0.5"), "b": kv.get("b", "1"),
                                 "c": kv.get("c", "0.5")}
    if kind not in _SHAPE_KEYS:
        raise ConfigError(f"unknown shape {kv['shape']!r}")
    shape_kwargs = {}
    for key in _SHAPE_KEYS[kind]:
        if key in kv:
            name = {"R": "big_radius", "r": "small_radius"}.get(key, key)
            shape_kwargs[name] = _floats(kv, key)
    try:
        shape = ShapeSpec(kind, **shape_kwargs)
    except ValueError as err:
        raise ConfigError(str(err)) from None

    dt = _floats(kv, "dt")
    dt_factor = _floats(kv, "dt_factor")
    if dt is None and dt_factor is None:
        raise ConfigError("missing required key 'dt' (or 'dt_factor')")
    if dt is not None and dt <= 0.0:
        raise ConfigError("dt must be positive")
    levels = _int_list(kv, "level")
    grids = _int_list(kv, "J")
    if (levels is None) == (grids is None):
        raise ConfigError("exactly one of 'level' (fem) or 'J' (axisymmetric) is required")
    output_every = int(_floats(kv, "output_every", 1.0))
    if output_every < 1:
        raise ConfigError("output_every must be >= 1")
    return RunConfig(
        law=law,
        shape=shape,
        v0=_floats(kv, "v0", 0.0),
        t_final=_floats(kv, "t_final"),
        dt=dt,
        dt_factor=dt_factor,
        dt_power=_floats(kv, "dt_power", 1.0),
        levels=levels,
        grid_counts=grids,
        output_dir=kv.get("output_dir"),
        output_every=output_every,
        raw=kv,
    )


def write_metadata(path, entries: dict) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        for key, value in entries.items():
            f.write(f"{key} = {value}\n")


def read_metadata(path) -> dict[str, str]:
    out = {}
    with open(path, "r", encoding="ascii") as f:
        for line in f:
            text = line.strip()
            if not text or "=" not in text:
                continue
            key, value = (part.strip() for part in text.split("=", 1))
            out[key] = value
    return out
