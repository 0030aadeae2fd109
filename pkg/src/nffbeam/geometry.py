"""Frequency, array lattice and observation grids.

Coordinate convention: the array lies in the z = 0 plane and radiates
towards +z. Each waveguide column runs along x (H-plane = x-z) and columns
are stacked along y (E-plane = y-z).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

C0 = 299_792_458.0  # m/s
MU0 = 4e-7 * math.pi  # H/m, classical SI value

# Minimum source-observation distance.
EPS_GEO = 1e-6  # m

GRID_KINDS = ("axial-line", "line", "plane-cut", "box", "points")


def _finite_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise InvalidInputError(f"{name} must be finite and > 0, got {value!r}")
    return value


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def as_point(p: Sequence[float]) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"expected a finite 3D point, got {p!r}")
    return arr


@dataclass(frozen=True)
class FrequencySpec:
    f: float
    lambda0: float
    k0: float
    omega: float
    c: float = C0
    mu0: float = MU0


def build_frequency(f: float) -> FrequencySpec:
    """Return the free-space quantities for operating frequency ``f`` in Hz."""
    f = _finite_positive("frequency f (FrequencySpec)", f)
    lambda0 = C0 / f
    return FrequencySpec(f=f, lambda0=lambda0, k0=2.0 * math.pi / lambda0, omega=2.0 * math.pi * f)


@dataclass(frozen=True)
class SlotColumnSpec:
    """One slotted waveguide column. Defaults are the 5.8 GHz design."""

    n_slots: int = 10
    slot_pitch: float = 0.032
    slot_length: float = 0.0224
    slot_width: float = 0.004
    guide_width_a: float = 0.0404
    guide_height_b: float = 0.0198
    end_gap: float = 0.010
    sidewall_offset: float = 0.011

    def __post_init__(self):
        if isinstance(self.n_slots, bool) or int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise InvalidInputError(f"SlotColumnSpec.n_slots must be an integer >= 1, got {self.n_slots!r}")
        for name in (
            "slot_pitch",
            "slot_length",
            "slot_width",
            "guide_width_a",
            "guide_height_b",
            "end_gap",
            "sidewall_offset",
        ):
            _finite_positive(f"SlotColumnSpec.{name}", getattr(self, name))
        if self.slot_length >= self.guide_width_a:
            raise InvalidInputError("SlotColumnSpec requires slot_length < guide_width_a")


@dataclass(frozen=True, eq=False)
class ArrayLayout:
    """Phase-controlled columns and their slot sub-sources.

    ``element_centers`` has shape (n_columns, 3); ``slot_centers`` has shape
    (n_columns, n_slots, 3). Both arrays are read-only.
    """

    n_columns: int
    column_pitch: float
    column_spec: SlotColumnSpec
    element_centers: np.ndarray
    slot_centers: np.ndarray

    @property
    def n_slots(self) -> int:
        return self.column_spec.n_slots

    @property
    def centroid(self) -> np.ndarray:
        return self.element_centers.mean(axis=0)

    def translated(self, offset: Sequence[float]) -> ArrayLayout:
        """Rigidly shifted copy. The result is no longer centered."""
        off = as_point(offset)
        return ArrayLayout(
            n_columns=self.n_columns,
            column_pitch=self.column_pitch,
            column_spec=self.column_spec,
            element_centers=_readonly(self.element_centers + off),
            slot_centers=_readonly(self.slot_centers + off),
        )

    def layout_hash(self) -> str:
        h = hashlib.sha256()
        h.update(repr((self.n_columns, self.column_pitch, self.column_spec)).encode())
        h.update(self.element_centers.tobytes())
        h.update(self.slot_centers.tobytes())
        return h.hexdigest()[:16]


def build_layout(n_columns: int = 8, column_pitch: float = 0.0208, spec: SlotColumnSpec | None = None) -> ArrayLayout:
    """Stack ``n_columns`` slotted columns along y, centered on the origin.

    Slots sit on the column axis; their transverse offsets from the guide
    centerline are ignored by the point-source model.
    """
    spec = SlotColumnSpec() if spec is None else spec
    if isinstance(n_columns, bool) or int(n_columns) != n_columns or n_columns < 1:
        raise InvalidInputError(f"n_columns must be an integer >= 1, got {n_columns!r}")
    n_columns = int(n_columns)
    column_pitch = _finite_positive("column_pitch", column_pitch)

    col_y = (np.arange(n_columns) - (n_columns - 1) / 2.0) * column_pitch
    slot_x = (np.arange(spec.n_slots) - (spec.n_slots - 1) / 2.0) * spec.slot_pitch

    elements = np.zeros((n_columns, 3))
    elements[:, 1] = col_y
    slots = np.zeros((n_columns, spec.n_slots, 3))
    slots[:, :, 0] = slot_x[None, :]
    slots[:, :, 1] = col_y[:, None]
    return ArrayLayout(
        n_columns=n_columns,
        column_pitch=column_pitch,
        column_spec=spec,
        element_centers=_readonly(elements),
        slot_centers=_readonly(slots),
    )


def aperture_extent(layout: ArrayLayout) -> float:
    """Largest of the slot-line x-span and the column y-span."""
    xs = layout.slot_centers[:, :, 0]
    ys = layout.element_centers[:, 1]
    return float(max(xs.max() - xs.min(), ys.max() - ys.min()))


def fraunhofer_distance(layout: ArrayLayout, freq: FrequencySpec) -> float:
    """Far-field boundary 2 D^2 / lambda0 of the layout's aperture."""
    d = aperture_extent(layout)
    return 2.0 * d * d / freq.lambda0


@dataclass(frozen=True)
class FocalTarget:
    r_s: np.ndarray

    def __post_init__(self):
        p = _readonly(as_point(self.r_s))
        if not p[2] > 0:
            raise InvalidInputError(f"FocalTarget requires z > 0 (in front of the aperture), got {p.tolist()}")
        object.__setattr__(self, "r_s", p)

    @classmethod
    def at(cls, x: float, y: float, z: float) -> FocalTarget:
        return cls(np.array([x, y, z], dtype=float))


@dataclass(frozen=True, eq=False)
class ObservationGrid:
    """Structured set of observation points.

    Swept grids are ``origin + sum_a t_a * axes[a]`` with ``t_a`` running
    over ``linspace(0, 1, counts[a])``; axis 0 varies fastest in scan order.
    The ``points`` kind carries an explicit coordinate list instead.
    """

    kind: str
    origin: np.ndarray
    axes: tuple = ()
    counts: tuple = ()
    coords: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise InvalidInputError(f"unknown grid kind {self.kind!r}; expected one of {GRID_KINDS}")
        object.__setattr__(self, "origin", _readonly(as_point(self.origin)))
        if self.kind == "points":
            pts = np.asarray(self.coords, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) == 0 or not np.all(np.isfinite(pts)):
                raise InvalidInputError("points grid needs a non-empty (N, 3) array of finite coordinates")
            object.__setattr__(self, "coords", _readonly(pts))
            object.__setattr__(self, "counts", (len(pts),))
            return
        expected = {"axial-line": 1, "line": 1, "plane-cut": 2, "box": 3}[self.kind]
        if len(self.axes) != expected or len(self.counts) != expected:
            raise InvalidInputError(f"{self.kind} grid needs {expected} axes and sample counts")
        axes = tuple(_readonly(as_point(a)) for a in self.axes)
        for a in axes:
            if not np.linalg.norm(a) > 0:
                raise InvalidInputError("grid extents must be > 0")
        counts = tuple(int(n) for n in self.counts)
        if any(n < 2 for n in counts):
            raise InvalidInputError(f"sample counts must be >= 2 per swept axis, got {counts}")
        if self.kind == "axial-line" and (axes[0][0] != 0 or axes[0][1] != 0):
            raise InvalidInputError("axial-line grid must run along z")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "counts", counts)

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def shape(self) -> tuple:
        """Array shape with the fastest axis last (C order), i.e. reversed counts."""
        return tuple(reversed(self.counts))

    def steps(self) -> list[float]:
        """Spacing in metres along each swept axis."""
        if self.kind == "points":
            return []
        return [float(np.linalg.norm(a)) / (n - 1) for a, n in zip(self.axes, self.counts)]

    def points(self) -> np.ndarray:
        """All points in scan order, shape (size, 3)."""
        if self.kind == "points":
            return np.array(self.coords)
        pts = np.broadcast_to(self.origin, self.shape + (3,)).copy()
        ndim = len(self.counts)
        for a, (axis, n) in enumerate(zip(self.axes, self.counts)):
            offs = np.linspace(np.zeros(3), axis, n)
            # axis 0 is fastest, so it maps to the last array dimension
            view = [1] * ndim + [3]
            view[ndim - 1 - a] = n
            pts = pts + offs.reshape(view)
        return pts.reshape(-1, 3)


def axial_line(z_min: float, z_max: float, n_samples: int, x: float = 0.0, y: float = 0.0) -> ObservationGrid:
    if not z_max > z_min:
        raise InvalidInputError("axial line needs z_max > z_min")
    return ObservationGrid("axial-line", np.array([x, y, z_min]), (np.array([0.0, 0.0, z_max - z_min]),), (n_samples,))


def line(start: Sequence[float], stop: Sequence[float], n_samples: int) -> ObservationGrid:
    start, stop = as_point(start), as_point(stop)
    return ObservationGrid("line", start, (stop - start,), (n_samples,))


def ray_line(target: FocalTarget, s_min: float, s_max: float, n_samples: int) -> ObservationGrid:
    """Line from the aperture center through ``target``, at ranges s_min..s_max."""
    u = target.r_s / np.linalg.norm(target.r_s)
    if not s_max > s_min > 0:
        raise InvalidInputError("ray line needs 0 < s_min < s_max")
    return line(s_min * u, s_max * u, n_samples)


def plane_cut_grid(
    plane: str,
    lateral: tuple[float, float],
    z: tuple[float, float],
    samples: tuple[int, int],
) -> ObservationGrid:
    """E-plane (y-z at x=0) or H-plane (x-z at y=0) cut; lateral axis is fastest."""
    if plane not in ("E-plane", "H-plane"):
        raise InvalidInputError(f"plane must be 'E-plane' or 'H-plane', got {plane!r}")
    lat_axis = 1 if plane == "E-plane" else 0
    origin = np.zeros(3)
    origin[lat_axis] = lateral[0]
    origin[2] = z[0]
    a0 = np.zeros(3)
    a0[lat_axis] = lateral[1] - lateral[0]
    a1 = np.array([0.0, 0.0, z[1] - z[0]])
    return ObservationGrid("plane-cut", origin, (a0, a1), tuple(samples))


def box_grid(
    x: tuple[float, float], y: tuple[float, float], z: tuple[float, float], samples: tuple[int, int, int]
) -> ObservationGrid:
    origin = np.array([x[0], y[0], z[0]])
    axes = (
        np.array([x[1] - x[0], 0.0, 0.0]),
        np.array([0.0, y[1] - y[0], 0.0]),
        np.array([0.0, 0.0, z[1] - z[0]]),
    )
    return ObservationGrid("box", origin, axes, tuple(samples))


def point_grid(points: Sequence[Sequence[float]]) -> ObservationGrid:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise InvalidInputError("points grid needs a non-empty (N, 3) array")
    return ObservationGrid("points", pts[0], coords=pts)
