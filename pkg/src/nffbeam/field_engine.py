"""Superposition of column contributions on observation grids.

Evaluation is split into fixed-size chunks of grid points that may run on
worker threads. Chunk boundaries never depend on the worker count, and all
arithmetic inside a chunk is element-wise on real arrays in a fixed order
(column ascending, slot ascending), so results are bit-identical for any
number of workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, SingularityError
from .geometry import EPS_GEO, ArrayLayout, FrequencySpec, ObservationGrid, as_point, axial_line, plane_cut_grid
from .synthesis import ExcitationSet

ELEMENT_KINDS = ("isotropic", "cosine-q", "slot-subarray")
CHUNK = 4096
THREADS_ENV = "NFFBEAM_THREADS"
FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class ElementModel:
    """Radiation model of one column.

    ``cosine-q`` and ``slot-subarray`` weight each point source by cos^q of
    the angle off +z and drop the back hemisphere. ``isotropic`` is
    unclamped.
    """

    kind: str = "slot-subarray"
    q: float = 1.0

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise InvalidInputError(f"unknown element model {self.kind!r}; expected one of {ELEMENT_KINDS}")
        if not (math.isfinite(self.q) and self.q >= 0):
            raise InvalidInputError(f"element model exponent q must be >= 0, got {self.q!r}")

    def sources(self, layout: ArrayLayout) -> np.ndarray:
        """Point sources per column, shape (n_columns, n_sources, 3)."""
        if self.kind == "slot-subarray":
            return layout.slot_centers
        return layout.element_centers[:, None, :]


@dataclass(frozen=True, eq=False)
class FieldMap:
    grid: ObservationGrid
    values: np.ndarray
    freq: FrequencySpec
    method: str = ""
    layout_hash: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).reshape(-1)
        if len(vals) != self.grid.size:
            raise InvalidInputError(f"FieldMap has {len(vals)} values for a grid of {self.grid.size} points")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("FieldMap values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def points(self) -> np.ndarray:
        return self.grid.points()


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else $NFFBEAM_THREADS (0 = auto)."""
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            workers = int(raw)
        except ValueError:
            raise InvalidInputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if workers < 0:
        raise InvalidInputError(f"worker count must be >= 0, got {workers}")
    if workers == 0:
        workers = os.cpu_count() or 1
    return workers


def _unit_chunk(sources: np.ndarray, pts: np.ndarray, k0: float, model: ElementModel, offset: int):
    """Unit-excitation field of every column at ``pts``; returns (re, im), each (n_columns, N)."""
    n_el, n_src, _ = sources.shape
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    out_re = np.empty((n_el, len(pts)))
    out_im = np.empty((n_el, len(pts)))
    phasor = np.zeros(len(pts), dtype=complex)
    for e in range(n_el):
        acc_re = np.zeros(len(pts))
        acc_im = np.zeros(len(pts))
        for s in range(n_src):
            sx, sy, sz = sources[e, s]
            dx = x - sx
            dy = y - sy
            dz = z - sz
            d = np.sqrt(dx * dx + dy * dy + dz * dz)
            bad = np.flatnonzero(d < EPS_GEO)
            if len(bad):
                idx = offset + int(bad[0])
                raise SingularityError(
                    f"grid point {idx} at {pts[bad[0]].tolist()} is within {EPS_GEO} m of a source", point_index=idx
                )
            phasor.imag = -(k0 * d)
            g = np.exp(phasor)
            denom = FOUR_PI * d
            t_re = g.real / denom
            t_im = g.imag / denom
            if model.kind != "isotropic":
                cos = dz / d
                pat = np.where(cos > 0, np.abs(cos) ** model.q, 0.0)
                t_re = t_re * pat
                t_im = t_im * pat
            acc_re = acc_re + t_re
            acc_im = acc_im + t_im
        if n_src > 1:
            acc_re = acc_re / n_src
            acc_im = acc_im / n_src
        out_re[e] = acc_re
        out_im[e] = acc_im
    return out_re, out_im


def element_unit_fields(
    layout: ArrayLayout,
    model: ElementModel,
    points: np.ndarray,
    freq: FrequencySpec,
    workers: int | None = None,
) -> np.ndarray:
    """Field of each column under unit excitation, complex (n_columns, N).

    Kept separate so several excitation sets can reuse one evaluation.
    """
    points = np.ascontiguousarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3:
        raise InvalidInputError("points must have shape (N, 3)")
    sources = np.ascontiguousarray(model.sources(layout))
    starts = list(range(0, len(points), CHUNK))

    def run(start):
        return _unit_chunk(sources, points[start : start + CHUNK], freq.k0, model, start)

    n_workers = min(resolve_workers(workers), max(len(starts), 1))
    if n_workers <= 1:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(run, starts))
    out = np.empty((layout.n_columns, len(points)), dtype=complex)
    out.real = np.concatenate([p[0] for p in parts], axis=1)
    out.imag = np.concatenate([p[1] for p in parts], axis=1)
    return out


def _weighted(w: complex, u_re: np.ndarray, u_im: np.ndarray):
    wr, wi = w.real, w.imag
    return wr * u_re - wi * u_im, wr * u_im + wi * u_re


def superpose(unit: np.ndarray, exc: ExcitationSet) -> np.ndarray:
    """Sum of a_n exp(j phi_n) times each column's unit field, columns ascending."""
    if len(exc) != unit.shape[0]:
        raise InvalidInputError(f"excitation has {len(exc)} entries for {unit.shape[0]} columns")
    weights = exc.weights()
    u_re = np.ascontiguousarray(unit.real)
    u_im = np.ascontiguousarray(unit.imag)
    acc_re, acc_im = _weighted(complex(weights[0]), u_re[0], u_im[0])
    for n in range(1, len(weights)):
        t_re, t_im = _weighted(complex(weights[n]), u_re[n], u_im[n])
        acc_re = acc_re + t_re
        acc_im = acc_im + t_im
    out = np.empty(unit.shape[1], dtype=complex)
    out.real = acc_re
    out.imag = acc_im
    return out


def element_contribution(
    layout: ArrayLayout,
    n: int,
    exc: ExcitationSet,
    model: ElementModel,
    r_obs,
    freq: FrequencySpec,
) -> complex:
    """Field of column ``n`` alone at ``r_obs``."""
    if not 0 <= n < layout.n_columns:
        raise InvalidInputError(f"element index {n} out of range")
    pt = as_point(r_obs)[None, :]
    sources = np.ascontiguousarray(model.sources(layout)[n : n + 1])
    u_re, u_im = _unit_chunk(sources, pt, freq.k0, model, 0)
    re, im = _weighted(complex(exc.weights()[n]), u_re[0], u_im[0])
    return complex(re[0], im[0])


def total_field(
    layout: ArrayLayout,
    exc: ExcitationSet,
    model: ElementModel,
    grid: ObservationGrid,
    freq: FrequencySpec,
    workers: int | None = None,
) -> FieldMap:
    unit = element_unit_fields(layout, model, grid.points(), freq, workers)
    return FieldMap(grid, superpose(unit, exc), freq, method=exc.method, layout_hash=layout.layout_hash())


def axial_profile(
    layout: ArrayLayout,
    exc: ExcitationSet,
    model: ElementModel,
    freq: FrequencySpec,
    z_min: float,
    z_max: float,
    n_samples: int,
    lateral_offset: tuple[float, float] = (0.0, 0.0),
    workers: int | None = None,
) -> FieldMap:
    if not z_min > 0:
        raise InvalidInputError("axial profile needs z_min > 0")
    grid = axial_line(z_min, z_max, n_samples, x=lateral_offset[0], y=lateral_offset[1])
    return total_field(layout, exc, model, grid, freq, workers)


def plane_cut(
    layout: ArrayLayout,
    exc: ExcitationSet,
    model: ElementModel,
    freq: FrequencySpec,
    plane: str,
    lateral: tuple[float, float],
    z: tuple[float, float],
    samples: tuple[int, int],
    workers: int | None = None,
) -> FieldMap:
    """E-plane (y-z) or H-plane (x-z) map through the array center."""
    grid = plane_cut_grid(plane, lateral, z, samples)
    return total_field(layout, exc, model, grid, freq, workers)
