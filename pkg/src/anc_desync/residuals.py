"""Closed-form residual-error laws and a seeded Monte Carlo cross-check.

Conventions: omega0 is the tone frequency and omega_s = 2*pi/T the angular
sampling rate, both in rad/s; powers are mean squared magnitudes of the
complex analytic signals.

Two closed forms are shipped for the expected residual under a uniform
power-on phase offset.  They disagree in the sinc argument:

* ``phase_error_expected_residual_reported`` uses sin(pi*f)/(pi*f) with
  f = omega0/omega_s;
* ``phase_error_expected_residual_exact`` integrates the instantaneous law
  over the uniform density on [0, 2*pi] directly, which gives the argument
  2*pi*f.

Both are reported side by side throughout the toolkit; the Monte Carlo
estimator arbitrates empirically (it converges to the exact variant).

Randomness contract: all draws use numpy's PCG64 generator via
``numpy.random.default_rng(seed)``.  Identical seed and parameters give a
bit-identical estimate on one platform.  Sweep drivers derive per-point seeds
with :func:`derive_seed` so points can be evaluated in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhaseErrorDensity:
    """Uniform law for the power-on phase offset on [0, 2*pi]."""

    def pdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        inside = (theta >= 0.0) & (theta <= TWO_PI)
        return np.where(inside, 1.0 / TWO_PI, 0.0)

    def sample(self, n_draws: int, seed: int) -> np.ndarray:
        if not n_draws >= 1:
            raise ValueError("n_draws must be at least 1")
        rng = np.random.default_rng(seed)
        return rng.uniform(0.0, TWO_PI, n_draws)


UNIFORM_PHASE = PhaseErrorDensity()


def derive_seed(seed: int, index: int) -> int:
    """Deterministic per-shard seed from a master seed and a shard index."""
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be nonnegative")
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


def freq_error_residual_power(w1: float, p_a: float, omega0: float, dt: float) -> float:
    """Residual power 2*w1^2*p_a^2*(1 - cos(omega0*dt)) from a clock-period offset dt.

    Exact for the two-tap filter shape [w0, w1]; even in dt, zero iff dt = 0,
    and strictly increasing in |dt| while |omega0*dt| < pi.
    """
    if not abs(omega0 * dt) < math.pi:
        raise ValueError("|omega0 * dt| must be below pi (Nyquist-valid clock pair)")
    return 2.0 * w1 * w1 * p_a * p_a * (1.0 - math.cos(omega0 * dt))


def phase_error_instant_residual(E_p2: float, omega0: float, omega_s: float, dtheta):
    """Instantaneous residual E_p2*(2 - 2*cos((omega0/omega_s)*dtheta)).

    dtheta is the power-on phase offset in radians, scalar or array,
    restricted to [0, 2*pi).
    """
    if not (omega0 > 0.0 and omega_s >= 2.0 * omega0):
        raise ValueError("requires omega_s >= 2*omega0 > 0")
    dtheta = np.asarray(dtheta, dtype=float)
    if np.any(dtheta < 0.0) or np.any(dtheta >= TWO_PI):
        raise ValueError("dtheta must lie in [0, 2*pi)")
    out = E_p2 * (2.0 - 2.0 * np.cos((omega0 / omega_s) * dtheta))
    return float(out) if out.ndim == 0 else out


def _check_band(omega0: float, omega_s: float) -> None:
    # the band edge omega0 = omega_s/2 is included: the formulas stay defined there
    if not (omega0 > 0.0 and omega0 <= 0.5 * omega_s):
        raise ValueError("requires 0 < omega0 <= omega_s/2")


def phase_error_expected_residual_reported(E_p2: float, omega0: float, omega_s: float) -> float:
    """Expected residual, reported closed form: 2*E_p2*(1 - sinc(pi*f)), f = omega0/omega_s.

    Kept verbatim alongside the exact integral because the two disagree;
    see the module docstring.
    """
    _check_band(omega0, omega_s)
    return 2.0 * E_p2 * (1.0 - float(np.sinc(omega0 / omega_s)))


def phase_error_expected_residual_exact(E_p2: float, omega0: float, omega_s: float) -> float:
    """Exact expectation of the instantaneous law over the uniform phase density.

    E{cos(a*theta)} over theta ~ U[0, 2*pi] is sin(2*pi*a)/(2*pi*a) with
    a = omega0/omega_s, hence 2*E_p2*(1 - sinc(2*pi*f)).  This is the value
    the Monte Carlo estimator converges to.
    """
    _check_band(omega0, omega_s)
    return 2.0 * E_p2 * (1.0 - float(np.sinc(2.0 * omega0 / omega_s)))


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample mean with its standard error."""

    value: float
    std_error: float
    n_draws: int
    seed: int


def phase_error_monte_carlo(
    E_p2: float, omega0: float, omega_s: float, n_draws: int, seed: int
) -> MonteCarloEstimate:
    """Monte Carlo estimate of the expected residual under a uniform phase offset.

    Averages the instantaneous residual over n_draws uniform draws of the
    phase offset.  Converges to phase_error_expected_residual_exact at rate
    O(1/sqrt(n_draws)).  Deterministic given (seed, parameters).
    """
    _check_band(omega0, omega_s)
    theta = UNIFORM_PHASE.sample(n_draws, seed)
    samples = E_p2 * (2.0 - 2.0 * np.cos((omega0 / omega_s) * theta))
    value = float(np.mean(samples))
    if n_draws > 1:
        std_error = float(np.std(samples, ddof=1) / math.sqrt(n_draws))
    else:
        std_error = 0.0
    return MonteCarloEstimate(value=value, std_error=std_error, n_draws=n_draws, seed=seed)


def chirp_residual_sq(
    p_a: float,
    bandwidth: float,
    period: float,
    t,
    t_c: float,
    t_s: float,
    dtheta: float,
    sample_period: float,
):
    """Squared residual of the phase-offset chirp scenario at time t.

    With sweep rate m = bandwidth/period and the offset expressed as the time
    shift delta = (dtheta/2pi)*sample_period:

        e2(t) = 2*p_a^2 * (1 - cos(2*pi*m*(t - t_c - t_s)*delta + pi*m*delta^2))

    Zero when dtheta = 0, and pointwise -> 0 as period -> inf at fixed
    bandwidth and t.
    """
    if not period > 0.0:
        raise ValueError("period must be positive")
    m = bandwidth / period
    delta = (dtheta / TWO_PI) * sample_period
    arg = TWO_PI * m * (np.asarray(t, dtype=float) - t_c - t_s) * delta + math.pi * m * delta * delta
    out = 2.0 * p_a * p_a * (1.0 - np.cos(arg))
    return float(out) if out.ndim == 0 else out


def chirp_mean_residual_sq(
    p_a: float,
    bandwidth: float,
    period: float,
    t_start: float,
    t_end: float,
    t_c: float,
    t_s: float,
    dtheta: float,
    sample_period: float,
) -> float:
    """Exact time average of :func:`chirp_residual_sq` over [t_start, t_end].

    The cosine argument is linear in t, so the average has the closed form
    2*p_a^2*(1 - cos(mid)*sinc(half-span)); no quadrature grid is involved,
    which keeps this independent of the time-domain simulation path.
    """
    if not period > 0.0:
        raise ValueError("period must be positive")
    if not t_end > t_start:
        raise ValueError("t_end must exceed t_start")
    m = bandwidth / period
    delta = (dtheta / TWO_PI) * sample_period
    a = TWO_PI * m * delta
    c = math.pi * m * delta * delta
    mid = 0.5 * (t_start + t_end) - t_c - t_s
    width = t_end - t_start
    mean_cos = math.cos(a * mid + c) * float(np.sinc(a * width / (2.0 * math.pi)))
    return 2.0 * p_a * p_a * (1.0 - mean_cos)
