"""Time-domain single-channel simulation of a frozen-filter ANC chain.

The chain is: sample the reference field on the error clock, apply the frozen
FIR control filter, reconstruct to continuous time, delay through the
secondary path, and superpose with the disturbance at the error microphone.

Two reconstruction paths are implemented so they can cross-check each other:

* ``closed_form`` evaluates the exact continuous-time result (tones and
  linear chirps admit closed-form convolution with the ideal lowpass);
* ``windowed_sinc`` numerically interpolates the digitally filtered sample
  sequence with a Kaiser-windowed truncated sinc.

Sample values are always taken at the error clock's true sample times (so the
power-on phase offset shifts the sampled waveform), while the reconstruction
impulses sit on the grid n*(T + dt); the phase offset therefore survives the
chain as a time advance of the anti-noise, and the period offset as a skew of
the effective tap spacing.

Two disturbance conventions are supported:

* ``implied``: the disturbance is defined as minus the zero-clock-error
  anti-noise, i.e. the frozen filter cancels perfectly when the clocks agree,
  whatever the filter is.  This matches the derivation order of the
  closed-form residual laws and is the default.
* ``physical``: the disturbance is the field evaluated at the error
  microphone.  Use with a filter actually designed to cancel it (see
  :func:`design_cancelling_filter`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clocks import ClockModel, validate_nyquist
from .fields import ChirpField, ToneField

TWO_PI = 2.0 * math.pi

CLOSED_FORM = "closed_form"
WINDOWED_SINC = "windowed_sinc"

IMPLIED = "implied"
PHYSICAL = "physical"


@dataclass(frozen=True)
class FixedFilter:
    """Frozen FIR control filter w[0..n_taps-1] clocked at the sample period."""

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coefficients, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ValueError("coefficients must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def n_taps(self) -> int:
        return self.coefficients.size

    def frequency_response(self, omega, sample_period: float):
        """Sum over taps of w[n] * exp(-j*omega*n*sample_period)."""
        n = np.arange(self.n_taps)
        omega = np.asarray(omega, dtype=float)
        resp = np.sum(
            self.coefficients * np.exp(-1j * omega[..., None] * n * sample_period), axis=-1
        )
        return complex(resp) if resp.ndim == 0 else resp


@dataclass(frozen=True)
class SecondaryPath:
    """Free-field loudspeaker-to-error-mic path: a pure delay in seconds."""

    delay: float

    def __post_init__(self) -> None:
        if not self.delay >= 0.0:
            raise ValueError("delay must be nonnegative")


@dataclass(frozen=True)
class ReconstructionFilter:
    """DAC reconstruction model: exact closed form or Kaiser-windowed sinc.

    half_width is the truncation half-width in samples (windowed_sinc only,
    at least 8); window_beta is the Kaiser shape parameter, default chosen so
    the kernel's spectral sidelobes sit below -90 dB.
    """

    mode: str = CLOSED_FORM
    half_width: int = 64
    window_beta: float = 12.0

    def __post_init__(self) -> None:
        if self.mode not in (CLOSED_FORM, WINDOWED_SINC):
            raise ValueError(f"unknown reconstruction mode {self.mode!r}")
        if self.mode == WINDOWED_SINC and self.half_width < 8:
            raise ValueError("windowed_sinc requires half_width >= 8")
        if not self.window_beta >= 0.0:
            raise ValueError("window_beta must be nonnegative")

    @classmethod
    def closed_form(cls) -> "ReconstructionFilter":
        return cls(mode=CLOSED_FORM)

    @classmethod
    def windowed_sinc(cls, half_width: int = 64, window_beta: float = 12.0) -> "ReconstructionFilter":
        return cls(mode=WINDOWED_SINC, half_width=half_width, window_beta=window_beta)


@dataclass(frozen=True)
class SimScenario:
    """One single-channel experiment: field, geometry, clocks, filter, chain.

    measure_start / measure_duration / grid_points default to None and are
    resolved by :func:`measurement_window` and :func:`measurement_grid`
    (tone: skip (n_taps + half_width) periods, then average 50 carrier
    periods at 16 points each; chirp: the pulse [0, period]).

    Chirp scenarios follow the pure-delay control-filter model: the filter
    negates and delays by control_filter_delay, so ``filter`` may be None and
    the clock pair may differ only in phase.
    """

    field: ToneField | ChirpField
    mic_distance: float
    reference_clock: ClockModel
    error_clock: ClockModel
    secondary_path: SecondaryPath
    reconstruction: ReconstructionFilter
    filter: FixedFilter | None = None
    control_filter_delay: float = 0.0
    disturbance_mode: str = IMPLIED
    measure_start: float | None = None
    measure_duration: float | None = None
    grid_points: int | None = None

    def __post_init__(self) -> None:
        if not self.mic_distance >= 0.0:
            raise ValueError("mic_distance must be nonnegative")
        ref = self.reference_clock
        if ref.frequency_error != 0.0 or ref.initial_phase != 0.0:
            raise ValueError("reference_clock must have zero frequency and phase error")
        if ref.nominal_period != self.error_clock.nominal_period:
            raise ValueError("reference and error clocks must share the nominal period")
        if self.disturbance_mode not in (IMPLIED, PHYSICAL):
            raise ValueError(f"unknown disturbance_mode {self.disturbance_mode!r}")
        if isinstance(self.field, ToneField):
            if self.filter is None:
                raise ValueError("tone scenarios require a control filter")
            if self.control_filter_delay != 0.0:
                raise ValueError("control_filter_delay applies to chirp scenarios only")
        elif isinstance(self.field, ChirpField):
            if self.error_clock.frequency_error != 0.0:
                raise ValueError("chirp scenarios support phase offsets only (zero frequency error)")
            if self.disturbance_mode != IMPLIED:
                raise ValueError("chirp scenarios define the disturbance from the cancellation premise")
            if not self.control_filter_delay >= 0.0:
                raise ValueError("control_filter_delay must be nonnegative")
        else:
            raise TypeError("field must be a ToneField or a ChirpField")
        if self.measure_start is not None and not self.measure_start >= 0.0:
            raise ValueError("measure_start must be nonnegative")
        if self.measure_duration is not None and not self.measure_duration > 0.0:
            raise ValueError("measure_duration must be positive")
        if self.grid_points is not None and self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")


@dataclass(frozen=True)
class ResidualReport:
    """Measured residual statistics of one scenario run."""

    residual_power: float
    disturbance_power: float
    reduction_db: float
    sample_series: tuple[np.ndarray, np.ndarray] | None = None


def max_angular_frequency(scenario: SimScenario) -> float:
    """Largest instantaneous angular frequency the chain must represent."""
    if isinstance(scenario.field, ToneField):
        return scenario.field.angular_frequency
    start, duration = measurement_window(scenario)
    t_extent = max(abs(start), abs(start + duration), scenario.field.period)
    return TWO_PI * scenario.field.chirp_rate * t_extent


def measurement_window(scenario: SimScenario) -> tuple[float, float]:
    """Resolved (start, duration) of the measurement window in seconds."""
    T = scenario.reference_clock.nominal_period
    if isinstance(scenario.field, ToneField):
        pad = scenario.reconstruction.half_width if scenario.reconstruction.mode == WINDOWED_SINC else 0
        start = (scenario.filter.n_taps + pad) * T
        duration = 50.0 * TWO_PI / scenario.field.angular_frequency
    else:
        start = 0.0
        duration = scenario.field.period
    if scenario.measure_start is not None:
        start = scenario.measure_start
    if scenario.measure_duration is not None:
        duration = scenario.measure_duration
    return start, duration


def measurement_grid(scenario: SimScenario) -> np.ndarray:
    """Midpoint evaluation grid: 16 points per period of the highest frequency."""
    start, duration = measurement_window(scenario)
    if scenario.grid_points is not None:
        n = scenario.grid_points
    else:
        f_max = max_angular_frequency(scenario) / TWO_PI
        if isinstance(scenario.field, ToneField):
            n = max(32, int(round(16.0 * duration * f_max)))
        else:
            n = max(512, int(round(16.0 * duration * f_max)))
    step = duration / n
    return start + (np.arange(n) + 0.5) * step


def _interp_kernel(u: np.ndarray, half_width: int, beta: float) -> np.ndarray:
    """Kaiser-windowed sinc kernel evaluated at sample offsets u."""
    inside = np.abs(u) <= half_width
    v = np.where(inside, u / half_width, 1.0)
    window = np.i0(beta * np.sqrt(np.maximum(0.0, 1.0 - v * v))) / np.i0(beta)
    return np.where(inside, np.sinc(u) * window, 0.0)


def _closed_tone_antinoise(filt, field, clock, t_s, t):
    # amplitude * G(omega0 at the clock's tap spacing) * exp(j*w0*(t + offset - t_s))
    gain = filt.frequency_response(field.angular_frequency, clock.period)
    return (
        field.amplitude
        * gain
        * np.exp(1j * field.angular_frequency * (t + clock.phase_offset_seconds - t_s))
    )


def _closed_chirp_antinoise(field, phase_offset, t_c, t_s, t):
    # pure-delay control filter: negate and shift by t_c + t_s
    return -field.pressure(t + phase_offset - t_c - t_s, 0.0)


def _sinc_reconstruct(samples_of, spacing, filt_coeffs, delay, rec, t):
    """Interpolate the filtered sample stream at times t.

    samples_of(n) must return sample values for an integer index array; the
    reconstruction impulses sit at n*spacing while the values carry whatever
    time offset samples_of applies, so a clock phase offset survives the
    chain as a waveform shift.
    """
    H, beta = rec.half_width, rec.window_beta
    t = np.atleast_1d(np.asarray(t, dtype=float))
    kc = (t - delay) / spacing
    k0 = np.floor(kc).astype(np.int64)
    kmat = k0[:, None] + np.arange(-H, H + 2)[None, :]
    kmin = int(kmat.min())
    kmax = int(kmat.max())
    n_taps = filt_coeffs.size
    n = np.arange(kmin - n_taps + 1, kmax + 1)
    xs = samples_of(n)
    ys = np.convolve(xs, filt_coeffs)[n_taps - 1 : n_taps + kmax - kmin]
    kern = _interp_kernel(kc[:, None] - kmat, H, beta)
    return (ys[kmat - kmin] * kern).sum(axis=1)


def antinoise_at(scenario: SimScenario, t):
    """Anti-noise pressure at the error microphone at time(s) t."""
    clock = scenario.error_clock
    t_s = scenario.secondary_path.delay
    scalar = np.ndim(t) == 0
    if isinstance(scenario.field, ToneField):
        if scenario.reconstruction.mode == CLOSED_FORM:
            out = _closed_tone_antinoise(scenario.filter, scenario.field, clock, t_s, np.asarray(t, dtype=float))
        else:
            out = _sinc_reconstruct(
                lambda n: scenario.field.pressure(n * clock.period + clock.phase_offset_seconds, 0.0),
                clock.period,
                scenario.filter.coefficients,
                t_s,
                scenario.reconstruction,
                t,
            )
    else:
        t_c = scenario.control_filter_delay
        if scenario.reconstruction.mode == CLOSED_FORM:
            out = _closed_chirp_antinoise(
                scenario.field, clock.phase_offset_seconds, t_c, t_s, np.asarray(t, dtype=float)
            )
        else:
            out = _sinc_reconstruct(
                lambda n: -scenario.field.pressure(n * clock.period + clock.phase_offset_seconds, 0.0),
                clock.period,
                np.ones(1),
                t_c + t_s,
                scenario.reconstruction,
                t,
            )
    out = np.asarray(out)
    return complex(out.reshape(-1)[0]) if scalar else out


def disturbance_at(scenario: SimScenario, t):
    """Disturbance pressure at the error microphone at time(s) t."""
    scalar = np.ndim(t) == 0
    t_arr = np.asarray(t, dtype=float)
    if scenario.disturbance_mode == PHYSICAL:
        out = scenario.field.pressure(t_arr, scenario.mic_distance)
    elif isinstance(scenario.field, ToneField):
        out = -_closed_tone_antinoise(
            scenario.filter, scenario.field, scenario.reference_clock, scenario.secondary_path.delay, t_arr
        )
    else:
        out = -_closed_chirp_antinoise(
            scenario.field, 0.0, scenario.control_filter_delay, scenario.secondary_path.delay, t_arr
        )
    out = np.asarray(out)
    return complex(out.reshape(-1)[0]) if scalar else out


def run_scenario(scenario: SimScenario, keep_series: bool = False) -> ResidualReport:
    """Superpose disturbance and anti-noise on the measurement grid.

    Deterministic; raises NyquistViolation if either clock undersamples the
    field and ArithmeticError if any residual sample is non-finite.
    """
    omega_max = max_angular_frequency(scenario)
    validate_nyquist(scenario.reference_clock, omega_max)
    validate_nyquist(scenario.error_clock, omega_max)

    t = measurement_grid(scenario)
    d = np.asarray(disturbance_at(scenario, t))
    a = np.asarray(antinoise_at(scenario, t))
    e = d + a
    if not np.all(np.isfinite(e.view(float))):
        raise ArithmeticError("non-finite residual samples")

    residual_power = float(np.mean(np.abs(e) ** 2))
    disturbance_power = float(np.mean(np.abs(d) ** 2))
    if residual_power == 0.0:
        reduction_db = math.inf
    elif disturbance_power == 0.0:
        reduction_db = -math.inf
    else:
        reduction_db = 10.0 * math.log10(disturbance_power / residual_power)
    return ResidualReport(
        residual_power=residual_power,
        disturbance_power=disturbance_power,
        reduction_db=reduction_db,
        sample_series=(t, e) if keep_series else None,
    )


def full_sum_freq_error_residual(
    filt: FixedFilter, p_a: float, omega0: float, sample_period: float, dt: float, t_s: float
) -> float:
    """Time-averaged squared residual from a period offset, keeping all taps.

    The residual field is amplitude * sum_n w[n] * exp(j*w0*(t - n*T - t_s))
    * (exp(-j*w0*n*dt) - 1); its squared magnitude is constant in t, so the
    time average is |sum|^2 scaled by p_a^2.  For a two-tap filter this
    reduces exactly to freq_error_residual_power.
    """
    validate_nyquist(ClockModel(sample_period, dt), omega0)
    n = np.arange(filt.n_taps)
    terms = (
        filt.coefficients
        * np.exp(-1j * omega0 * (n * sample_period + t_s))
        * (np.exp(-1j * omega0 * n * dt) - 1.0)
    )
    return p_a * p_a * float(np.abs(np.sum(terms)) ** 2)


def design_cancelling_filter(
    field: ToneField,
    mic_distance: float,
    secondary_path: SecondaryPath,
    sample_period: float,
    n_taps: int = 2,
    anchor: int = 0,
) -> FixedFilter:
    """Two live taps solving G(w0) = -exp(-j*w0*(l/c - t_s)) for exact cancellation.

    The taps at positions anchor and anchor+1 realize the complex gain that
    makes the anti-noise equal minus the physical disturbance at the error
    microphone; remaining taps are zero.
    """
    if n_taps < 2 or anchor < 0 or anchor + 1 > n_taps - 1:
        raise ValueError("need n_taps >= 2 and 0 <= anchor <= n_taps - 2")
    omega0 = field.angular_frequency
    theta = omega0 * sample_period
    if abs(math.sin(theta)) < 1e-6:
        raise ValueError("tone too close to DC or Nyquist for a two-tap design")
    target = -np.exp(-1j * omega0 * (mic_distance / field.sound_speed - secondary_path.delay))
    basis = np.array(
        [
            [math.cos(theta * anchor), math.cos(theta * (anchor + 1))],
            [-math.sin(theta * anchor), -math.sin(theta * (anchor + 1))],
        ]
    )
    pair = np.linalg.solve(basis, np.array([target.real, target.imag]))
    coeffs = np.zeros(n_taps)
    coeffs[anchor : anchor + 2] = pair
    return FixedFilter(coeffs)
