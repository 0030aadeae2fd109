import cmath
import math

import pytest

from nffbeam import ElementModel, FocalTarget, build_frequency, build_layout

C = 299_792_458.0


@pytest.fixture
def freq():
    return build_frequency(5.8e9)


@pytest.fixture
def layout():
    return build_layout(8, 0.0208)


@pytest.fixture
def slot_model():
    return ElementModel("slot-subarray", 1.0)


@pytest.fixture
def iso():
    return ElementModel("isotropic")


@pytest.fixture
def boresight():
    return FocalTarget.at(0.0, 0.0, 0.5)


def naive_field(layout, phases, amplitudes, kind, q, k0, point):
    """Reference superposition written with plain scalar math, no numpy."""
    total = 0j
    for n in range(layout.n_columns):
        if kind == "slot-subarray":
            srcs = [tuple(float(v) for v in s) for s in layout.slot_centers[n]]
        else:
            srcs = [tuple(float(v) for v in layout.element_centers[n])]
        col = 0j
        for sx, sy, sz in srcs:
            dx, dy, dz = point[0] - sx, point[1] - sy, point[2] - sz
            d = math.sqrt(dx * dx + dy * dy + dz * dz)
            g = cmath.exp(-1j * k0 * d) / (4 * math.pi * d)
            if kind != "isotropic":
                cos = dz / d
                g *= cos**q if cos > 0 else 0.0
            col += g
        col /= len(srcs)
        total += amplitudes[n] * cmath.exp(1j * phases[n]) * col
    return total


def naive_terms_scale(layout, amplitudes, kind, q, k0, point):
    """Sum of term magnitudes; the scale for relative comparisons."""
    s = 0.0
    for n in range(layout.n_columns):
        srcs = layout.slot_centers[n] if kind == "slot-subarray" else [layout.element_centers[n]]
        for src in srcs:
            d = math.dist(point, src)
            s += amplitudes[n] / (4 * math.pi * d) / len(srcs)
    return s


# acceptance criteria results, printed once at the end of the run
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
