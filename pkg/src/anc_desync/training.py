"""Offline adaptive training of the frozen control filter.

The trainer runs a filtered-reference LMS loop entirely at the discrete
sample rate with perfect clocks (the trained system's clock is the reference
clock).  Signals are the real projections of the analytic fields; a filter
that drives the real loop error to zero cancels the analytic tone as well,
because real coefficients act identically on both quadratures.

Filter files use a plain-text format: one header line ``n_taps=<N> fs=<Hz>``
followed by one coefficient per line with 17 significant digits, which
round-trips doubles losslessly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clocks import ClockModel, validate_nyquist
from .fields import ToneField
from .simulate import FixedFilter, SecondaryPath


class InsufficientTapsError(ValueError):
    """The requested delay does not fit in the available taps."""


class DivergenceError(RuntimeError):
    """The adaptation loop is blowing up."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"error energy grew 10x within 1000 iterations around iteration {iteration}")


@dataclass(frozen=True)
class TrainingConfig:
    """Adaptation parameters for the LMS loop.

    step_size = 0 disables adaptation (useful as a control).  The stability
    bound step_size < 2 / (n_taps * filtered-reference power) is checked when
    training starts, once the reference signal is known.
    """

    step_size: float
    n_taps: int
    n_iterations: int
    secondary_path_estimate: FixedFilter

    def __post_init__(self) -> None:
        if not self.step_size >= 0.0:
            raise ValueError("step_size must be nonnegative")
        if self.n_taps < 1:
            raise ValueError("n_taps must be at least 1")
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be at least 1")


def estimate_secondary_path(
    true_delay: SecondaryPath, sample_period: float, n_taps: int, window_beta: float = 8.6
) -> FixedFilter:
    """Discrete FIR model of a pure delay: impulse or windowed-sinc fractional delay.

    Integer delays give an exact unit impulse.  Fractional delays use a sinc
    centered on the delay under a Kaiser window of half-width
    min(delay, n_taps - 1 - delay) in samples; keeping the window symmetric
    about the delay makes the response exactly linear-phase, at the cost of
    magnitude accuracy when the delay sits within a few taps of either end of
    the span.
    """
    if not sample_period > 0.0:
        raise ValueError("sample_period must be positive")
    if n_taps < 1:
        raise ValueError("n_taps must be at least 1")
    if not n_taps * sample_period > true_delay.delay:
        raise InsufficientTapsError("n_taps * sample_period must exceed the delay")
    pos = true_delay.delay / sample_period
    nearest = round(pos)
    if abs(pos - nearest) < 1e-9:
        if nearest > n_taps - 1:
            raise InsufficientTapsError("integer delay lands past the last tap")
        coeffs = np.zeros(n_taps)
        coeffs[int(nearest)] = 1.0
        return FixedFilter(coeffs)
    half_width = min(pos, (n_taps - 1) - pos)
    if half_width <= 0.0:
        raise InsufficientTapsError("fractional delay needs at least one tap on each side")
    u = np.arange(n_taps) - pos
    inside = np.abs(u) <= half_width
    v = np.where(inside, u / half_width, 1.0)
    window = np.i0(window_beta * np.sqrt(np.maximum(0.0, 1.0 - v * v))) / np.i0(window_beta)
    coeffs = np.where(inside, np.sinc(u) * window, 0.0)
    return FixedFilter(coeffs / coeffs.sum())


@dataclass(frozen=True)
class TrainingResult:
    """Trained filter plus the convergence trace of the adaptation loop."""

    filter: FixedFilter
    error_trace: np.ndarray
    loop_reduction_db: float
    filtered_reference_power: float
    stability_bound: float


def train_fxlms(
    field: ToneField,
    path_estimate: FixedFilter,
    true_path: SecondaryPath,
    config: TrainingConfig,
    sample_period: float,
    mic_distance: float = 0.0,
    seed: int = 0,
) -> TrainingResult:
    """Filtered-reference LMS from zero initial coefficients.

    The true secondary path must be an integer number of samples (the loop
    runs at the sample rate); the path estimate may be any FIR.  Training is
    fully deterministic -- the seed is accepted for interface stability and
    does not influence tonal training.

    loop_reduction_db is measured by replaying the frozen final coefficients
    through the same discrete loop, so it is directly comparable with a
    continuous-time replay of the trained filter.
    """
    del seed  # deterministic loop; see docstring
    validate_nyquist(ClockModel(sample_period), field.angular_frequency)
    delay_samples = true_path.delay / sample_period
    if abs(delay_samples - round(delay_samples)) > 1e-9:
        raise ValueError("training loop requires an integer-sample true path delay")
    delay_samples = int(round(delay_samples))

    n_iter = config.n_iterations
    n_taps = config.n_taps
    mu = config.step_size
    n = np.arange(n_iter)
    x = np.real(field.pressure(n * sample_period, 0.0))
    d = np.real(field.pressure(n * sample_period, mic_distance))
    x_filtered = np.convolve(x, path_estimate.coefficients)[:n_iter]

    p_xf = float(np.mean(x_filtered**2))
    bound = math.inf if p_xf == 0.0 else 2.0 / (n_taps * p_xf)
    if mu >= bound:
        raise ValueError(f"step_size {mu} exceeds the stability bound {bound}")

    pad = np.zeros(n_taps - 1)
    x_windows = np.lib.stride_tricks.sliding_window_view(np.concatenate([pad, x]), n_taps)[:, ::-1]
    f_windows = np.lib.stride_tricks.sliding_window_view(np.concatenate([pad, x_filtered]), n_taps)[:, ::-1]

    w = np.zeros(n_taps)
    y = np.zeros(n_iter)
    trace = np.empty(n_iter)
    block = 1000
    prev_energy = None
    for i in range(n_iter):
        y[i] = w @ x_windows[i]
        anti = y[i - delay_samples] if i >= delay_samples else 0.0
        e = d[i] + anti
        trace[i] = e * e
        w = w - mu * e * f_windows[i]
        if (i + 1) % block == 0:
            energy = float(np.sum(trace[i + 1 - block : i + 1]))
            if prev_energy is not None and energy > 10.0 * prev_energy and energy > float(
                np.sum(trace[:block])
            ):
                raise DivergenceError(i)
            prev_energy = energy

    # frozen replay of the final coefficients through the same loop
    y_frozen = np.convolve(x, w)[:n_iter]
    anti_frozen = np.concatenate([np.zeros(delay_samples), y_frozen[: n_iter - delay_samples]])
    e_frozen = d + anti_frozen
    window = min(4000, n_iter // 2) or n_iter
    p_e = float(np.mean(e_frozen[-window:] ** 2))
    p_d = float(np.mean(d[-window:] ** 2))
    return TrainingResult(
        filter=FixedFilter(w),
        error_trace=trace,
        loop_reduction_db=noise_reduction_db(p_d, p_e),
        filtered_reference_power=p_xf,
        stability_bound=bound,
    )


def noise_reduction_db(before_power: float, after_power: float) -> float:
    """10*log10(before/after); positive means the noise went down."""
    if not before_power > 0.0:
        raise ValueError("before_power must be positive")
    if after_power < 0.0:
        raise ValueError("after_power must be nonnegative")
    if after_power == 0.0:
        return math.inf
    return 10.0 * math.log10(before_power / after_power)


def save_filter(filt: FixedFilter, sample_rate: float, path) -> None:
    """Write coefficients in the plain-text interchange format."""
    lines = [f"n_taps={filt.n_taps} fs={sample_rate!r}"]
    lines.extend(f"{c:.16e}" for c in filt.coefficients)
    Path(path).write_text("\n".join(lines) + "\n")


def load_filter(path) -> tuple[FixedFilter, float]:
    """Read a filter file written by :func:`save_filter`; lossless round trip."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError("empty filter file")
    header = lines[0].split()
    fields = dict(item.split("=", 1) for item in header)
    n_taps = int(fields["n_taps"])
    sample_rate = float(fields["fs"])
    coeffs = np.array([float(line) for line in lines[1 : 1 + n_taps]])
    if coeffs.size != n_taps:
        raise ValueError("coefficient count does not match the header")
    return FixedFilter(coeffs), sample_rate
