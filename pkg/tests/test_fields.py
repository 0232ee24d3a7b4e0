import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anc_desync.clocks import ClockModel
from anc_desync.fields import ChirpField, ToneField, sample_reference

TWO_PI = 2.0 * math.pi


class TestToneField:
    def test_zero_phase(self):
        field = ToneField(1.0, TWO_PI, 343.0)
        assert field.pressure(0.0, 0.0) == pytest.approx(1.0 + 0.0j)

    def test_quarter_period_is_ninety_degrees(self):
        field = ToneField(1.0, TWO_PI, 343.0)
        assert field.pressure(0.25, 0.0) == pytest.approx(1.0j, abs=1e-12)

    def test_propagation_phase_lag(self):
        field = ToneField(2.0, TWO_PI * 100.0, 343.0)
        expected = 2.0 * cmath.exp(-1j * (TWO_PI * 100.0 / 343.0) * 0.343)
        got = field.pressure(0.0, 0.343)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got.real == pytest.approx(1.618, abs=1e-3)
        assert got.imag == pytest.approx(-1.176, abs=1e-3)

    def test_wavenumber_derived(self):
        field = ToneField(1.0, TWO_PI * 100.0, 343.0)
        assert field.wavenumber == pytest.approx(TWO_PI * 100.0 / 343.0)

    @given(st.floats(0.0, 10.0), st.floats(1.0, 1e4), st.floats(-1.0, 1.0), st.floats(0.0, 10.0))
    def test_unit_modulus(self, amplitude, f0, t, x):
        field = ToneField(amplitude, TWO_PI * f0)
        assert abs(field.pressure(t, x)) == pytest.approx(amplitude, abs=1e-12 * max(amplitude, 1.0))

    @given(st.floats(1.0, 5e3), st.floats(-0.5, 0.5), st.floats(0.0, 5.0))
    def test_plane_wave_is_pure_delay(self, f0, t, distance):
        field = ToneField(1.0, TWO_PI * f0)
        at_mic = field.pressure(t, distance)
        delayed = field.pressure(t - distance / field.sound_speed, 0.0)
        assert at_mic == pytest.approx(delayed, rel=1e-9)

    def test_invalid_fields(self):
        with pytest.raises(ValueError):
            ToneField(-1.0, 1.0)
        with pytest.raises(ValueError):
            ToneField(1.0, 0.0)
        with pytest.raises(ValueError):
            ToneField(1.0, 1.0, sound_speed=0.0)


class TestChirpField:
    def test_zero_phase(self):
        field = ChirpField(1.0, 1000.0, 1.0)
        assert field.pressure(0.0, 0.0) == pytest.approx(1.0 + 0.0j)

    def test_quadratic_phase(self):
        field = ChirpField(1.0, 1000.0, 1.0)
        expected = cmath.exp(1j * math.pi * 1000.0 * 0.01**2)
        assert field.pressure(0.01, 0.0) == pytest.approx(expected, rel=1e-12)
        assert cmath.phase(field.pressure(0.01, 0.0)) == pytest.approx(0.3142, abs=1e-4)

    def test_wavenumber_at_origin(self):
        field = ChirpField(1.0, 1000.0, 1.0, sound_speed=343.0)
        expected = cmath.exp(-1j * math.sqrt(2.0 * 1000.0) / 343.0)
        assert field.pressure(0.0, 1.0) == pytest.approx(expected, rel=1e-12)
        assert field.wavenumber(0.0) == pytest.approx(0.1304, abs=1e-4)

    def test_chirp_rate(self):
        assert ChirpField(1.0, 1000.0, 4.0).chirp_rate == pytest.approx(250.0)

    @given(st.floats(0.1, 5.0), st.floats(-2.0, 2.0), st.floats(0.0, 3.0))
    def test_unit_modulus(self, amplitude, t, x):
        field = ChirpField(amplitude, 500.0, 2.0)
        assert abs(field.pressure(t, x)) == pytest.approx(amplitude, rel=1e-12)


class TestSampleReference:
    def test_uniform_tone_sampling_walks_roots_of_unity(self):
        field = ToneField(1.0, TWO_PI * 1000.0)
        clock = ClockModel(1.0 / 8000.0)
        got = sample_reference(field, clock, 0, 8)
        expected = np.exp(1j * TWO_PI * 1000.0 * np.arange(8) / 8000.0)
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_phase_offset_is_a_constant_factor_for_tones(self):
        field = ToneField(1.0, TWO_PI * 1000.0)
        T = 1.0 / 8000.0
        plain = sample_reference(field, ClockModel(T), -4, 16)
        shifted = sample_reference(field, ClockModel(T, initial_phase=math.pi), -4, 16)
        factor = np.exp(1j * TWO_PI * 1000.0 * 0.5 * T)
        assert complex(factor) == pytest.approx(cmath.exp(1j * math.pi / 8.0))
        np.testing.assert_allclose(shifted, plain * factor, rtol=1e-12)

    def test_chirp_sampling_matches_shifted_field(self):
        field = ChirpField(1.0, 1000.0, 1.0)
        T = 1e-3
        dtheta = 1.1
        clock = ClockModel(T, initial_phase=dtheta)
        got = sample_reference(field, clock, 0, 32)
        n = np.arange(32)
        m = field.chirp_rate
        expected = np.exp(1j * math.pi * m * (n * T + (dtheta / TWO_PI) * T) ** 2)
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_reference(ToneField(1.0, 1.0), ClockModel(1.0), 0, 0)
