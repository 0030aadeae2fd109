import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nffbeam import (
    ExcitationSet,
    FocalTarget,
    InvalidInputError,
    SingularityError,
    build_frequency,
    build_layout,
    far_field_phases,
    normalize_phases,
    quantize_phases,
    ray_optic_phases,
    tr_phases,
)
from nffbeam.propagation import phase_difference

C = 299_792_458.0
MU0 = 4e-7 * math.pi


def _oracle_tr(k0, omega, p, r_s):
    # probe dipole field at p, conjugated, angle
    d = math.dist(p, r_s)
    e = 1j * omega * MU0 * cmath.exp(-1j * k0 * d) / (4 * math.pi * d)
    return cmath.phase(e.conjugate())


class TestTimeReversal:
    def test_single_element(self, freq):
        lay = build_layout(1, 0.02)
        phi = tr_phases(lay, FocalTarget.at(0, 0, 0.5), freq).phases[0]
        k0 = 2 * math.pi * 5.8e9 / C
        assert phi == pytest.approx(_oracle_tr(k0, 2 * math.pi * 5.8e9, (0, 0, 0), (0, 0, 0.5)), abs=1e-9)
        assert phi == pytest.approx(math.remainder(k0 * 0.5 - math.pi / 2, 2 * math.pi), abs=1e-9)
        assert phi == pytest.approx(2.66004, abs=1e-5)

    def test_boresight_symmetric(self, layout, freq, boresight):
        ph = tr_phases(layout, boresight, freq).phases
        assert np.array_equal(ph, ph[::-1])

    def test_equidistant_pair(self, freq):
        lay = build_layout(2, 0.03)
        ph = tr_phases(lay, FocalTarget.at(0.2, 0.0, 0.3), freq).phases
        assert ph[0] == ph[1]

    def test_amplitudes_unit(self, layout, freq, boresight):
        assert np.all(tr_phases(layout, boresight, freq).amplitudes == 1.0)

    def test_singularity(self, freq):
        lay = build_layout(1, 0.02)
        with pytest.raises(SingularityError):
            tr_phases(lay, np.array([0.0, 0.0, 0.0]), freq)
        with pytest.raises(SingularityError):
            ray_optic_phases(lay, np.array([0.0, 0.0, 0.0]), freq)


class TestRayOptic:
    def test_single_element(self, freq):
        lay = build_layout(1, 0.02)
        phi = ray_optic_phases(lay, FocalTarget.at(0, 0, 0.5), freq).phases[0]
        k0 = 2 * math.pi * 5.8e9 / C
        assert phi == pytest.approx(k0 * 0.5 - 10 * 2 * math.pi, abs=1e-9)
        assert phi == pytest.approx(-2.05235, abs=1e-5)

    def test_matches_tr_after_normalization(self, layout, freq, boresight):
        t = FocalTarget.at(0.05, -0.1, 0.4)
        a = normalize_phases(tr_phases(layout, t, freq)).phases
        b = normalize_phases(ray_optic_phases(layout, t, freq)).phases
        assert np.max(np.abs(phase_difference(a, b))) < 1e-9

    def test_boresight_symmetric(self, layout, freq, boresight):
        ph = ray_optic_phases(layout, boresight, freq).phases
        assert np.array_equal(ph, ph[::-1])


class TestFarField:
    def test_broadside_zero(self, layout, freq, boresight):
        assert np.all(far_field_phases(layout, boresight, freq).phases == 0)

    def test_endfire_quarter_wave(self):
        fs = build_frequency(5.8e9)
        lay = build_layout(2, fs.lambda0 / 2)  # elements at y = -+lambda/4
        ph = far_field_phases(lay, np.array([0.0, 1.0, 0.0]), fs).phases
        # -k0 * (u . p) = -k0 * (-+lambda/4) = +-pi/2
        assert ph[0] == pytest.approx(math.pi / 2, abs=1e-12)
        assert ph[1] == pytest.approx(-math.pi / 2, abs=1e-12)

    def test_differs_from_tr_in_near_field(self, layout, freq, boresight):
        ff = normalize_phases(far_field_phases(layout, boresight, freq)).phases
        tr = normalize_phases(tr_phases(layout, boresight, freq)).phases
        # oracle: both formulas evaluated in this test
        k0 = freq.k0
        ys = layout.element_centers[:, 1]
        tr_ref = k0 * np.sqrt(ys**2 + 0.25) - k0 * np.sqrt(ys[0] ** 2 + 0.25)
        np.testing.assert_allclose(np.cos(tr), np.cos(tr_ref), atol=1e-9)
        assert np.max(np.abs(phase_difference(ff, tr))) > 0.1

    def test_zero_target(self, layout, freq):
        with pytest.raises(InvalidInputError):
            far_field_phases(layout, np.zeros(3), freq)

    @pytest.mark.parametrize("direction_deg", [0.0, 12.0, -25.0, 40.0])
    def test_array_factor_peaks_toward_target(self, direction_deg):
        fs = build_frequency(5.8e9)
        lay = build_layout(8, 0.0208)
        th = math.radians(direction_deg)
        u = np.array([0.0, math.sin(th), math.cos(th)])
        exc = far_field_phases(lay, u, fs)
        big_r = 1e6 * 0.288
        scan = np.radians(np.arange(-89.0, 90.0, 1.0))
        af = []
        for a in scan:
            r = big_r * np.array([0.0, math.sin(a), math.cos(a)])
            d = np.linalg.norm(r - lay.element_centers, axis=1)
            # drop the common range so the sum is well conditioned
            af.append(abs(np.sum(np.exp(1j * exc.phases) * np.exp(-1j * fs.k0 * (d - big_r)))))
        assert scan[int(np.argmax(af))] == pytest.approx(th, abs=1e-9)


class TestNormalize:
    def test_equal_phases_to_zero(self):
        exc = ExcitationSet("tr", [1.2, 1.2, 1.2])
        assert normalize_phases(exc).phases.tolist() == [0, 0, 0]

    def test_idempotent(self, layout, freq):
        exc = tr_phases(layout, FocalTarget.at(0.1, 0.05, 0.3), freq)
        once = normalize_phases(exc, 3)
        twice = normalize_phases(once, 3)
        assert np.array_equal(once.phases, twice.phases)
        assert once.phases[3] == 0 and once.reference_index == 3

    def test_out_of_range(self):
        with pytest.raises(InvalidInputError):
            normalize_phases(ExcitationSet("tr", [0.0, 1.0]), 2)
        with pytest.raises(InvalidInputError):
            normalize_phases(ExcitationSet("tr", [0.0, 1.0]), -1)

    def test_amplitudes_unchanged(self):
        exc = ExcitationSet("tr", [0.5, 1.0], [0.3, 2.0])
        assert normalize_phases(exc).amplitudes.tolist() == [0.3, 2.0]


class TestQuantize:
    def test_one_bit(self):
        q = quantize_phases(ExcitationSet("tr", [0.1, 1.7, -1.4, 3.0, -3.0]), 1)
        assert set(q.phases.tolist()) <= {0.0, math.pi}

    @pytest.mark.parametrize("bits", range(1, 17))
    def test_zero_fixed_point(self, bits):
        assert quantize_phases(ExcitationSet("tr", [0.0]), bits).phases[0] == 0.0

    def test_six_bits(self):
        step = 2 * math.pi / 64
        q = quantize_phases(ExcitationSet("tr", [0.05]), 6).phases[0]
        assert q == pytest.approx(round(0.05 / step) * step, abs=1e-15)
        assert q == pytest.approx(0.0982, abs=5e-5)

    def test_half_away_from_zero(self):
        step = 2 * math.pi / 4
        q = quantize_phases(ExcitationSet("tr", [step / 2, -step / 2]), 2).phases
        assert q.tolist() == pytest.approx([step, -step])

    @pytest.mark.parametrize("bits", [0, 17, 2.5])
    def test_invalid_bits(self, bits):
        with pytest.raises(InvalidInputError):
            quantize_phases(ExcitationSet("tr", [0.0]), bits)


def test_excitation_validation():
    with pytest.raises(InvalidInputError):
        ExcitationSet("tr", [0.0, 1.0], [1.0])
    with pytest.raises(InvalidInputError):
        ExcitationSet("tr", [0.0], [-1.0])
    assert ExcitationSet("tr", [4.0]).phases[0] == pytest.approx(4.0 - 2 * math.pi)


coords = st.floats(-0.15, 0.15)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 16), coords, coords, st.floats(0.2, 1.0), st.floats(1e9, 2e10), st.integers(0, 15))
def test_tr_ray_optic_equivalence(n, x, y, z, f, ref):
    fs = build_frequency(f)
    lay = build_layout(n, 0.0208)
    t = FocalTarget.at(x, y, z)
    ref = ref % n
    a = normalize_phases(tr_phases(lay, t, fs), ref).phases
    b = normalize_phases(ray_optic_phases(lay, t, fs), ref).phases
    assert np.max(np.abs(phase_difference(a, b))) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), coords, coords, st.floats(0.2, 1.0), st.tuples(*[st.floats(-2, 2)] * 3))
def test_synthesis_translation_invariant(n, x, y, z, off):
    fs = build_frequency(5.8e9)
    lay = build_layout(n, 0.0208)
    t = np.array([x, y, z])
    moved = lay.translated(off)
    for fn in (tr_phases, ray_optic_phases, far_field_phases):
        a = normalize_phases(fn(lay, t, fs)).phases
        b = normalize_phases(fn(moved, t + np.array(off), fs)).phases
        assert np.max(np.abs(phase_difference(a, b))) < 1e-8
