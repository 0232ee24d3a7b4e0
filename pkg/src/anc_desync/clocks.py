"""Sampling-clock models: constant period offset and power-on phase offset."""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ClockModel:
    """A sampling clock, possibly offset from the reference clock.

    nominal_period   -- reference sample period T in seconds
    frequency_error  -- constant per-sample period offset in seconds;
                        0 for the reference clock, may be negative as long
                        as the effective period stays positive
    initial_phase    -- power-on phase offset in radians; normalized into
                        [0, 2*pi) at construction

    Instances are immutable and safe to share across threads.
    """

    nominal_period: float
    frequency_error: float = 0.0
    initial_phase: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.nominal_period) and self.nominal_period > 0.0):
            raise ValueError("nominal_period must be positive and finite")
        if not self.nominal_period + self.frequency_error > 0.0:
            raise ValueError("effective period (nominal_period + frequency_error) must be positive")
        if not math.isfinite(self.initial_phase):
            raise ValueError("initial_phase must be finite")
        phase = self.initial_phase % TWO_PI
        if phase >= TWO_PI:  # % can round up to the modulus itself
            phase = 0.0
        object.__setattr__(self, "initial_phase", phase)

    @property
    def period(self) -> float:
        """Effective sample period in seconds."""
        return self.nominal_period + self.frequency_error

    @property
    def phase_offset_seconds(self) -> float:
        """Power-on phase offset expressed as a time shift in seconds."""
        return (self.initial_phase / TWO_PI) * self.nominal_period

    @property
    def omega_s(self) -> float:
        """Angular sampling rate 2*pi/nominal_period in rad/s."""
        return TWO_PI / self.nominal_period

    def sample_time(self, n):
        """Time of sample ``n`` in seconds.

        ``n`` may be a (possibly negative) integer or an integer array;
        the sequence is conceptually bi-infinite.  Affine in n:
        t[n] = n * (nominal_period + frequency_error) + phase offset.
        """
        return n * self.period + self.phase_offset_seconds


@dataclass(frozen=True)
class NyquistCheck:
    """Outcome of checking one tone frequency against both clock rates."""

    omega0: float
    reference_ok: bool  # 1/nominal_period > omega0/pi
    error_ok: bool      # 1/(nominal_period + frequency_error) > omega0/pi

    @property
    def ok(self) -> bool:
        return self.reference_ok and self.error_ok


class NyquistViolation(ValueError):
    """Raised when a clock undersamples the requested frequency."""

    def __init__(self, check: NyquistCheck):
        self.check = check
        sides = []
        if not check.reference_ok:
            sides.append("nominal rate 1/T <= omega0/pi")
        if not check.error_ok:
            sides.append("effective rate 1/(T + dt) <= omega0/pi")
        super().__init__(
            f"sampling below the Nyquist rate for omega0={check.omega0!r}: " + "; ".join(sides)
        )


def check_nyquist(clock: ClockModel, omega0: float) -> NyquistCheck:
    """Check both the nominal and the effective rate against ``omega0``."""
    if not omega0 > 0.0:
        raise ValueError("omega0 must be positive")
    limit = omega0 / math.pi
    return NyquistCheck(
        omega0=omega0,
        reference_ok=1.0 / clock.nominal_period > limit,
        error_ok=1.0 / clock.period > limit,
    )


def validate_nyquist(clock: ClockModel, omega0: float) -> NyquistCheck:
    """Like :func:`check_nyquist` but raises :class:`NyquistViolation` on failure.

    When this passes, ``omega0 * frequency_error`` is guaranteed to lie in
    (-pi, pi), which keeps the closed-form residual laws in their domain.
    """
    check = check_nyquist(clock, omega0)
    if not check.ok:
        raise NyquistViolation(check)
    return check
