"""Focal metrics, method comparisons and steering sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from .errors import InvalidInputError
from .field_engine import ElementModel, FieldMap, element_unit_fields, resolve_workers, superpose
from .geometry import ArrayLayout, FocalTarget, FrequencySpec, ObservationGrid, line, ray_line
from .propagation import TWO_PI, phase_difference, phase_of, scalar_green
from .synthesis import ExcitationSet, normalize_phases, quantize_phases, synthesize

SPOT_DEFINITION = "-3 dB: contiguous region around the peak with |E| >= peak/sqrt(2), linear interpolation"

GridLike = Union[ObservationGrid, Callable[[FocalTarget], ObservationGrid], None]


class Peak(NamedTuple):
    point: np.ndarray
    magnitude: float
    index: int


@dataclass(frozen=True)
class SpotSize:
    axial_width_3db: float | None
    lateral_width_3db: float | None
    truncated: bool


@dataclass
class FocalReport:
    method: str
    target: list
    peak_position: list
    peak_magnitude: float
    axial_width_3db: float | None
    lateral_width_3db: float | None
    truncated: bool
    focal_shift: float
    alignment_spread: float
    lateral_peak_error: float | None = None
    spot_definition: str = SPOT_DEFINITION

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ComparisonReport:
    reports: dict
    phase_deltas: dict
    peak_position_deltas: dict
    peak_magnitude_deltas: dict
    checks: dict
    maps: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "reports": {m: r.to_dict() for m, r in self.reports.items()},
            "phase_deltas": self.phase_deltas,
            "peak_position_deltas": self.peak_position_deltas,
            "peak_magnitude_deltas": self.peak_magnitude_deltas,
            "checks": self.checks,
        }


def find_peak(fmap: FieldMap) -> Peak:
    """Grid point of maximum |E|; ties go to the smallest scan index."""
    mag = fmap.magnitude
    if mag.size == 0:
        raise InvalidInputError("cannot locate the peak of an empty field map")
    i = int(np.argmax(mag))
    return Peak(fmap.points()[i], float(mag[i]), i)


def _half_power_span(profile: np.ndarray, i: int) -> tuple[float, float, bool]:
    """Fractional sample positions where ``profile`` drops below peak/sqrt(2) around index i."""
    th = profile[i] / math.sqrt(2.0)
    truncated = False
    j = i
    while j > 0 and profile[j - 1] >= th:
        j -= 1
    if j == 0:
        left = 0.0
        truncated = True
    else:
        lo, hi = profile[j - 1], profile[j]
        left = (j - 1) + (th - lo) / (hi - lo)
    k = i
    last = len(profile) - 1
    while k < last and profile[k + 1] >= th:
        k += 1
    if k == last:
        right = float(last)
        truncated = True
    else:
        hi, lo = profile[k], profile[k + 1]
        right = k + (hi - th) / (hi - lo)
    return left, right, truncated


def _is_axial(axis: np.ndarray) -> bool:
    return abs(axis[2]) >= np.linalg.norm(axis) / math.sqrt(2.0)


def spot_size(fmap: FieldMap, peak: Peak | None = None) -> SpotSize:
    """-3 dB widths through the peak along each swept grid axis.

    Axes mostly along z count as axial, the rest as lateral. When the
    contour leaves the grid the width runs to the grid edge and
    ``truncated`` is set.
    """
    grid = fmap.grid
    if grid.kind not in ("axial-line", "line", "plane-cut"):
        raise InvalidInputError(f"spot size needs a line or plane-cut map, not {grid.kind!r}")
    peak = find_peak(fmap) if peak is None else peak
    mag = fmap.magnitude.reshape(grid.shape)
    idx = np.unravel_index(peak.index, grid.shape)
    ndim = len(grid.counts)
    widths: dict[str, float] = {}
    truncated = False
    for a, (axis, step) in enumerate(zip(grid.axes, grid.steps())):
        dim = ndim - 1 - a
        sl = list(idx)
        sl[dim] = slice(None)
        profile = mag[tuple(sl)]
        left, right, trunc = _half_power_span(profile, int(idx[dim]))
        truncated |= trunc
        widths["axial" if _is_axial(axis) else "lateral"] = float((right - left) * step)
    return SpotSize(widths.get("axial"), widths.get("lateral"), truncated)


def _circular_spread(angles: np.ndarray) -> float:
    if len(angles) < 2:
        return 0.0
    a = np.sort(np.mod(angles, TWO_PI))
    gaps = np.diff(np.concatenate([a, [a[0] + TWO_PI]]))
    return float(max(TWO_PI - gaps.max(), 0.0))


def contribution_phasors(layout: ArrayLayout, exc: ExcitationSet, target, freq: FrequencySpec) -> np.ndarray:
    """Per-column isotropic contributions a_n exp(j phi_n) G(p_n, r_s) at the target."""
    r_s = target.r_s if isinstance(target, FocalTarget) else np.asarray(target, dtype=float)
    g = np.array([scalar_green(freq.k0, p, r_s) for p in layout.element_centers])
    return exc.weights() * g


def phase_alignment_check(layout: ArrayLayout, exc: ExcitationSet, target, freq: FrequencySpec) -> float:
    """Smallest arc (rad) containing every non-zero contribution phase at the target."""
    c = contribution_phasors(layout, exc, target, freq)
    c = c[exc.amplitudes > 0]
    return _circular_spread(phase_of(c))


def _range_along(point: np.ndarray, target: FocalTarget) -> float:
    u = target.r_s / np.linalg.norm(target.r_s)
    return float(point @ u)


def focal_report(
    fmap: FieldMap, target: FocalTarget, layout: ArrayLayout, exc: ExcitationSet, freq: FrequencySpec
) -> FocalReport:
    peak = find_peak(fmap)
    spot = spot_size(fmap, peak) if fmap.grid.kind in ("axial-line", "line", "plane-cut") else SpotSize(None, None, False)
    shift = float(np.linalg.norm(target.r_s)) - _range_along(peak.point, target)
    lateral_err = math.hypot(peak.point[0] - target.r_s[0], peak.point[1] - target.r_s[1])
    return FocalReport(
        method=exc.method,
        target=target.r_s.tolist(),
        peak_position=peak.point.tolist(),
        peak_magnitude=peak.magnitude,
        axial_width_3db=spot.axial_width_3db,
        lateral_width_3db=spot.lateral_width_3db,
        truncated=spot.truncated,
        focal_shift=shift,
        alignment_spread=phase_alignment_check(layout, exc, target, freq),
        lateral_peak_error=lateral_err,
    )


def default_compare_grid(target: FocalTarget) -> ObservationGrid:
    """Line from the aperture center through the target, ranges 0.1-1.5 m, 2.5 mm steps."""
    return ray_line(target, 0.1, 1.5, 561)


def default_steer_grid(target: FocalTarget) -> ObservationGrid:
    """Lateral y-line at the target depth, y in [-0.4, 0.4] m, 1 mm steps."""
    x, _, z = target.r_s
    return line((x, -0.4, z), (x, 0.4, z), 801)


def _resolve_grid(grid: GridLike, target: FocalTarget, default) -> ObservationGrid:
    if grid is None:
        return default(target)
    if isinstance(grid, ObservationGrid):
        return grid
    return grid(target)


def _synth(method, layout, target, freq, bits):
    exc = synthesize(method, layout, target, freq)
    return exc if bits is None else quantize_phases(exc, bits)


def compare_methods(
    layout: ArrayLayout,
    target: FocalTarget,
    freq: FrequencySpec,
    model: ElementModel | None = None,
    grid: GridLike = None,
    methods: Sequence[str] = ("tr", "ray-optic", "far-field"),
    workers: int | None = None,
    quantization_bits: int | None = None,
) -> ComparisonReport:
    """Run every synthesis method on one scenario and record how they differ.

    Checks recorded (never raised): TR and ray-optic normalized phases
    agree, the TR peak is no farther along the target ray than the
    far-field peak, and the TR peak is no weaker.
    """
    methods = list(dict.fromkeys(methods))
    if len(methods) < 2:
        raise InvalidInputError("comparison needs at least two methods")
    model = ElementModel() if model is None else model
    g = _resolve_grid(grid, target, default_compare_grid)
    unit = element_unit_fields(layout, model, g.points(), freq, workers)

    excitations = {m: _synth(m, layout, target, freq, quantization_bits) for m in methods}
    maps, reports = {}, {}
    for m, exc in excitations.items():
        fmap = FieldMap(g, superpose(unit, exc), freq, method=m, layout_hash=layout.layout_hash())
        maps[m] = fmap
        reports[m] = focal_report(fmap, target, layout, exc, freq)

    normalized = {m: normalize_phases(e, 0).phases for m, e in excitations.items()}
    phase_deltas, pos_deltas, mag_deltas = {}, {}, {}
    for i, a in enumerate(methods):
        for b in methods[i + 1 :]:
            key = f"{a}|{b}"
            phase_deltas[key] = float(np.max(np.abs(phase_difference(normalized[a], normalized[b]))))
            pa, pb = np.array(reports[a].peak_position), np.array(reports[b].peak_position)
            pos_deltas[key] = float(np.linalg.norm(pa - pb))
            mag_deltas[key] = abs(reports[a].peak_magnitude - reports[b].peak_magnitude)

    checks = {}
    if "tr" in reports and "ray-optic" in reports:
        checks["tr_equals_ray_optic"] = phase_deltas["tr|ray-optic"] < 1e-9
    if "tr" in reports and "far-field" in reports:
        tr_range = _range_along(np.array(reports["tr"].peak_position), target)
        ff_range = _range_along(np.array(reports["far-field"].peak_position), target)
        checks["tr_peak_not_farther"] = tr_range <= ff_range
        checks["tr_peak_stronger"] = reports["tr"].peak_magnitude >= reports["far-field"].peak_magnitude
    return ComparisonReport(reports, phase_deltas, pos_deltas, mag_deltas, checks, maps)


def steer_sweep(
    layout: ArrayLayout,
    targets: Sequence[FocalTarget],
    freq: FrequencySpec,
    model: ElementModel | None = None,
    grid: GridLike = None,
    workers: int | None = None,
    return_maps: bool = False,
    quantization_bits: int | None = None,
):
    """TR focusing on each target in turn; reports keep the input order."""
    if len(targets) == 0:
        raise InvalidInputError("steer sweep needs at least one target")
    model = ElementModel() if model is None else model

    def one(target):
        exc = _synth("tr", layout, target, freq, quantization_bits)
        g = _resolve_grid(grid, target, default_steer_grid)
        unit = element_unit_fields(layout, model, g.points(), freq, workers=1)
        fmap = FieldMap(g, superpose(unit, exc), freq, method="tr", layout_hash=layout.layout_hash())
        return focal_report(fmap, target, layout, exc, freq), fmap

    n = min(resolve_workers(workers), len(targets))
    if n <= 1:
        results = [one(t) for t in targets]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(one, targets))
    reports = [r for r, _ in results]
    if return_maps:
        return reports, [m for _, m in results]
    return reports
