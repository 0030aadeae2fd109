"""Free-space scalar Green's function and the probe-dipole field.

Complex fields are plain Python/numpy complex values. All phases use the
(-pi, pi] convention.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import SingularityError
from .geometry import EPS_GEO, FrequencySpec, as_point

PI = math.pi
TWO_PI = 2.0 * math.pi


def wrap_phase(angle):
    """Wrap radians into (-pi, pi]. Values already in range are returned as-is."""
    a = np.asarray(angle, dtype=float)
    wrapped = np.where((a > -PI) & (a <= PI), a, PI - np.mod(PI - a, TWO_PI))
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def phase_of(value):
    """Argument of a complex value (or array) in (-pi, pi]."""
    return wrap_phase(np.angle(value))


def phase_difference(a, b):
    """Wrapped difference a - b, useful for comparing phase sets."""
    return wrap_phase(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))


def scalar_green(k0: float, r1, r2) -> complex:
    """exp(-j k0 d) / (4 pi d) with d = |r1 - r2|."""
    d = math.dist(as_point(r1), as_point(r2))
    if d < EPS_GEO:
        raise SingularityError(f"source and observation points are {d:.3g} m apart (< {EPS_GEO} m)")
    return cmath.exp(-1j * k0 * d) / (4.0 * PI * d)


def dipole_field(freq: FrequencySpec, r_s, r_obs) -> complex:
    """Field at ``r_obs`` radiated by an infinitesimal probe dipole at ``r_s``.

    Scalar model: j omega mu0 times the free-space Green's function.
    """
    return 1j * freq.omega * freq.mu0 * scalar_green(freq.k0, r_obs, r_s)
