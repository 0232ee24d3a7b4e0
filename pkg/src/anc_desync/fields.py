"""Continuous plane-wave pressure fields and clocked sampling of them.

Fields are complex analytic signals (unit-modulus exponentials scaled by the
amplitude) defined for all t, propagating along +x in a free field with no
attenuation.  A finite analysis window is imposed by the simulation scenario,
not by the field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clocks import ClockModel

SPEED_OF_SOUND = 343.0


@dataclass(frozen=True)
class ToneField:
    """Single-frequency plane wave: amplitude * exp(j*(w0*t - k*x)), k = w0/c."""

    amplitude: float
    angular_frequency: float
    sound_speed: float = SPEED_OF_SOUND

    def __post_init__(self) -> None:
        if not self.amplitude >= 0.0:
            raise ValueError("amplitude must be nonnegative")
        if not self.angular_frequency > 0.0:
            raise ValueError("angular_frequency must be positive")
        if not self.sound_speed > 0.0:
            raise ValueError("sound_speed must be positive")

    @property
    def wavenumber(self) -> float:
        return self.angular_frequency / self.sound_speed

    def pressure(self, t, x=0.0):
        """Complex pressure at time t (s) and position x (m)."""
        return self.amplitude * np.exp(1j * (self.angular_frequency * t - self.wavenumber * x))


@dataclass(frozen=True)
class ChirpField:
    """Linear-FM plane wave with quadratic phase pi*m*t^2, m = bandwidth/period.

    The phase is not wrapped modulo the period: the sweep continues for all t,
    and the time-varying wavenumber is sqrt(4*m^2*t^2 + 2*m)/c.
    """

    amplitude: float
    bandwidth: float
    period: float
    sound_speed: float = SPEED_OF_SOUND

    def __post_init__(self) -> None:
        if not self.amplitude >= 0.0:
            raise ValueError("amplitude must be nonnegative")
        if not self.bandwidth > 0.0:
            raise ValueError("bandwidth must be positive")
        if not self.period > 0.0:
            raise ValueError("period must be positive")
        if not self.sound_speed > 0.0:
            raise ValueError("sound_speed must be positive")

    @property
    def chirp_rate(self) -> float:
        """Sweep rate m in Hz/s."""
        return self.bandwidth / self.period

    def wavenumber(self, t):
        m = self.chirp_rate
        return np.sqrt(4.0 * m * m * np.square(t) + 2.0 * m) / self.sound_speed

    def pressure(self, t, x=0.0):
        """Complex pressure at time t (s) and position x (m)."""
        m = self.chirp_rate
        phase = math.pi * m * np.square(t)
        if np.any(np.asarray(x) != 0.0):
            phase = phase - self.wavenumber(t) * x
        return self.amplitude * np.exp(1j * phase)


def sample_reference(field, clock: ClockModel, n_start: int, n_count: int) -> np.ndarray:
    """Reference-microphone samples (x = 0) for indices n_start .. n_start+n_count-1.

    Sample n is taken at clock.sample_time(n), so both the period offset and
    the power-on phase offset of the clock shift the sampled waveform.
    """
    if not n_count > 0:
        raise ValueError("n_count must be positive")
    n = np.arange(n_start, n_start + n_count)
    return np.asarray(field.pressure(clock.sample_time(n), 0.0))
