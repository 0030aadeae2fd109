"""Per-column excitation phases: time reversal, ray optics and far field."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInputError
from .geometry import ArrayLayout, FocalTarget, FrequencySpec, as_point
from .propagation import dipole_field, phase_of, scalar_green, wrap_phase

METHODS = ("tr", "ray-optic", "far-field")


@dataclass(frozen=True, eq=False)
class ExcitationSet:
    method: str
    phases: np.ndarray
    amplitudes: np.ndarray = field(default=None)
    reference_index: int | None = None

    def __post_init__(self):
        phases = np.array(self.phases, dtype=float).reshape(-1)
        amps = np.ones_like(phases) if self.amplitudes is None else np.array(self.amplitudes, dtype=float).reshape(-1)
        if amps.shape != phases.shape:
            raise InvalidInputError("phases and amplitudes must have the same length")
        if not (np.all(np.isfinite(phases)) and np.all(np.isfinite(amps))):
            raise InvalidInputError("excitations must be finite")
        if np.any(amps < 0):
            raise InvalidInputError("amplitudes must be >= 0")
        phases = np.asarray(wrap_phase(phases), dtype=float).reshape(-1)
        phases.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self) -> int:
        return len(self.phases)

    def weights(self) -> np.ndarray:
        """Complex excitation a_n exp(j phi_n)."""
        return self.amplitudes * np.exp(1j * self.phases)


def _point(target) -> np.ndarray:
    if isinstance(target, FocalTarget):
        return target.r_s
    return as_point(target)


def tr_phases(layout: ArrayLayout, target, freq: FrequencySpec) -> ExcitationSet:
    """Time-reversal phases.

    A probe dipole at the target illuminates each column phase center; the
    conjugate of the received field sets that column's phase.
    """
    r_s = _point(target)
    received = [dipole_field(freq, r_s, p) for p in layout.element_centers]
    phases = [phase_of(e.conjugate()) for e in received]
    return ExcitationSet("tr", np.array(phases))


def ray_optic_phases(layout: ArrayLayout, target, freq: FrequencySpec) -> ExcitationSet:
    """Path-length compensation: phi_n = k0 |p_n - r_s|."""
    r_s = _point(target)
    # scalar_green enforces the standoff
    for p in layout.element_centers:
        scalar_green(freq.k0, p, r_s)
    dist = np.array([math.dist(p, r_s) for p in layout.element_centers])
    return ExcitationSet("ray-optic", wrap_phase(freq.k0 * dist))


def far_field_phases(layout: ArrayLayout, target, freq: FrequencySpec) -> ExcitationSet:
    """Progressive phase that steers a plane wave toward the target direction.

    Direction and positions are taken relative to the layout centroid (the
    origin for layouts from ``build_layout``).
    """
    center = layout.centroid
    rel = _point(target) - center
    norm = float(np.linalg.norm(rel))
    if not norm > 0:
        raise InvalidInputError("far-field steering needs a target away from the array center")
    u = rel / norm
    return ExcitationSet("far-field", wrap_phase(-freq.k0 * ((layout.element_centers - center) @ u)))


def synthesize(method: str, layout: ArrayLayout, target, freq: FrequencySpec) -> ExcitationSet:
    try:
        fn = {"tr": tr_phases, "ray-optic": ray_optic_phases, "far-field": far_field_phases}[method]
    except KeyError:
        raise InvalidInputError(f"unknown synthesis method {method!r}; expected one of {METHODS}") from None
    return fn(layout, target, freq)


def normalize_phases(exc: ExcitationSet, reference_index: int = 0) -> ExcitationSet:
    if isinstance(reference_index, bool) or not 0 <= int(reference_index) < len(exc):
        raise InvalidInputError(f"reference_index {reference_index!r} out of range for {len(exc)} elements")
    ref = exc.phases[int(reference_index)]
    return replace(exc, phases=wrap_phase(exc.phases - ref), reference_index=int(reference_index))


def quantize_phases(exc: ExcitationSet, bits: int) -> ExcitationSet:
    """Snap phases to the 2^bits-level lattice, rounding half away from zero."""
    if isinstance(bits, bool) or int(bits) != bits or not 1 <= bits <= 16:
        raise InvalidInputError(f"bits must be an integer in [1, 16], got {bits!r}")
    step = 2.0 * math.pi / (1 << int(bits))
    x = exc.phases / step
    n = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return replace(exc, phases=wrap_phase(n * step))


def with_global_phase(exc: ExcitationSet, offset: float) -> ExcitationSet:
    return replace(exc, phases=wrap_phase(exc.phases + offset))
