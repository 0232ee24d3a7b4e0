import math

import numpy as np
import pytest

from anc_desync.clocks import ClockModel
from anc_desync.fields import ToneField
from anc_desync.simulate import (
    PHYSICAL,
    FixedFilter,
    ReconstructionFilter,
    SecondaryPath,
    SimScenario,
    run_scenario,
)
from anc_desync.training import (
    DivergenceError,
    InsufficientTapsError,
    TrainingConfig,
    estimate_secondary_path,
    load_filter,
    noise_reduction_db,
    save_filter,
    train_fxlms,
)

TWO_PI = 2.0 * math.pi
FS = 16000.0
T = 1.0 / FS


class TestEstimateSecondaryPath:
    def test_integer_delay_is_a_unit_impulse(self):
        filt = estimate_secondary_path(SecondaryPath(3.0 * T), T, 8)
        expected = np.zeros(8)
        expected[3] = 1.0
        np.testing.assert_array_equal(filt.coefficients, expected)

    def test_zero_delay(self):
        filt = estimate_secondary_path(SecondaryPath(0.0), T, 4)
        np.testing.assert_array_equal(filt.coefficients, [1.0, 0.0, 0.0, 0.0])

    def test_half_sample_delay_is_symmetric_about_the_delay(self):
        filt = estimate_secondary_path(SecondaryPath(3.5 * T), T, 64)
        w = filt.coefficients
        # support is the 8 taps around 3.5; the pattern mirrors across it
        np.testing.assert_allclose(w[:8], w[7::-1], rtol=1e-12)
        assert np.all(w[8:] == 0.0)
        assert w[3] == w[4] == max(w)

    def test_half_sample_delay_phase_accuracy(self):
        delay = 3.5 * T
        filt = estimate_secondary_path(SecondaryPath(delay), T, 64)
        omega = 0.1 * TWO_PI * FS
        response = filt.frequency_response(omega, T)
        phase_err = np.angle(response * np.exp(1j * omega * delay))
        assert abs(math.degrees(phase_err)) < 1.0
        assert np.angle(response) == pytest.approx(-0.35 * TWO_PI, abs=math.radians(1.0))

    def test_centered_fractional_delay_meets_band_tolerances(self):
        delay = 16.5 * T
        filt = estimate_secondary_path(SecondaryPath(delay), T, 64)
        omega = np.linspace(1.0, 0.4 * TWO_PI * FS, 500)
        response = filt.frequency_response(omega, T)
        mag_err_db = 20.0 * np.log10(np.abs(response))
        phase_err_deg = np.degrees(np.angle(response * np.exp(1j * omega * delay)))
        assert np.abs(mag_err_db).max() < 0.1
        assert np.abs(phase_err_deg).max() < 1.0

    def test_insufficient_taps(self):
        with pytest.raises(InsufficientTapsError):
            estimate_secondary_path(SecondaryPath(3.5 * T), T, 3)
        with pytest.raises(InsufficientTapsError):
            estimate_secondary_path(SecondaryPath(63.5 * T), T, 64)


def reference_setup(step_size=1e-3, n_iterations=1500, n_taps=32):
    field = ToneField(1.0, TWO_PI * 200.0)
    true_path = SecondaryPath(10.0 * T)
    estimate = estimate_secondary_path(true_path, T, n_taps)
    config = TrainingConfig(
        step_size=step_size,
        n_taps=n_taps,
        n_iterations=n_iterations,
        secondary_path_estimate=estimate,
    )
    mic_distance = field.sound_speed * 12.0 * T
    return field, true_path, estimate, config, mic_distance


class TestTrainFxlms:
    def test_tone_training_reaches_deep_reduction(self):
        field, true_path, estimate, config, l = reference_setup()
        result = train_fxlms(field, estimate, true_path, config, T, mic_distance=l)
        assert result.loop_reduction_db >= 40.0

    def test_zero_step_size_keeps_zero_filter(self):
        field, true_path, estimate, _, l = reference_setup()
        config = TrainingConfig(0.0, 32, 2000, estimate)
        result = train_fxlms(field, estimate, true_path, config, T, mic_distance=l)
        np.testing.assert_array_equal(result.filter.coefficients, np.zeros(32))
        assert result.loop_reduction_db == pytest.approx(0.0, abs=1e-9)

    def test_replay_through_simulation_preserves_reduction(self):
        field, true_path, estimate, config, l = reference_setup()
        result = train_fxlms(field, estimate, true_path, config, T, mic_distance=l)
        scenario = SimScenario(
            field=field,
            mic_distance=l,
            reference_clock=ClockModel(T),
            error_clock=ClockModel(T),
            secondary_path=true_path,
            reconstruction=ReconstructionFilter.closed_form(),
            filter=result.filter,
            disturbance_mode=PHYSICAL,
        )
        replay = run_scenario(scenario)
        assert abs(replay.reduction_db - result.loop_reduction_db) <= 1.0

    def test_training_is_bit_deterministic(self):
        field, true_path, estimate, config, l = reference_setup()
        a = train_fxlms(field, estimate, true_path, config, T, mic_distance=l, seed=1)
        b = train_fxlms(field, estimate, true_path, config, T, mic_distance=l, seed=2)
        np.testing.assert_array_equal(a.filter.coefficients, b.filter.coefficients)
        np.testing.assert_array_equal(a.error_trace, b.error_trace)

    def test_error_trace_trends_downward(self):
        field, true_path, estimate, config, l = reference_setup()
        result = train_fxlms(field, estimate, true_path, config, T, mic_distance=l)
        blocks = result.error_trace.reshape(-1, 250).sum(axis=1)
        assert blocks[-1] < 1e-4 * blocks[0]

    def test_stability_bound_rejected_upfront(self):
        field, true_path, estimate, _, l = reference_setup()
        config = TrainingConfig(0.2, 32, 1000, estimate)  # bound is 2/(32*0.5) = 0.125
        with pytest.raises(ValueError, match="stability"):
            train_fxlms(field, estimate, true_path, config, T, mic_distance=l)

    def test_delayed_update_divergence_detected(self):
        field, true_path, estimate, _, l = reference_setup()
        config = TrainingConfig(0.02, 32, 6000, estimate)
        with pytest.raises(DivergenceError):
            train_fxlms(field, estimate, true_path, config, T, mic_distance=l)

    def test_fractional_true_delay_rejected(self):
        field, true_path, estimate, config, l = reference_setup()
        with pytest.raises(ValueError, match="integer"):
            train_fxlms(field, estimate, SecondaryPath(10.5 * T), config, T, mic_distance=l)


class TestNoiseReductionDb:
    def test_values(self):
        assert noise_reduction_db(1.0, 1.0) == 0.0
        assert noise_reduction_db(1.0, 0.01) == pytest.approx(20.0)
        assert noise_reduction_db(4.0, 0.0004) == pytest.approx(40.0)

    def test_zero_after_power_is_infinite(self):
        assert noise_reduction_db(1.0, 0.0) == math.inf

    def test_domain(self):
        with pytest.raises(ValueError):
            noise_reduction_db(0.0, 1.0)
        with pytest.raises(ValueError):
            noise_reduction_db(1.0, -1.0)


class TestFilterFiles:
    def test_round_trip_is_lossless(self, tmp_path):
        rng = np.random.default_rng(0)
        filt = FixedFilter(rng.standard_normal(17) * 10.0 ** rng.integers(-8, 8, 17))
        path = tmp_path / "coeffs.txt"
        save_filter(filt, FS, path)
        loaded, fs = load_filter(path)
        assert fs == FS
        np.testing.assert_array_equal(loaded.coefficients, filt.coefficients)

    def test_header_format(self, tmp_path):
        path = tmp_path / "coeffs.txt"
        save_filter(FixedFilter([0.5, -0.25]), 8000.0, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "n_taps=2 fs=8000.0"
        assert len(lines) == 3
        assert float(lines[1]) == 0.5
