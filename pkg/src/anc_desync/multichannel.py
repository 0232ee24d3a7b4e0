"""Frequency-domain multichannel residual analysis under a shared phase offset.

A multichannel scenario is specified at the single tone frequency omega0: a
reference spectrum vector X, a secondary-path matrix S (errors x sources), a
diagonal reconstruction matrix H (per-source DAC), a control matrix G
(sources x references) and the disturbance vector d at the error microphones.

The cancellation premise d = S @ H @ G @ X must hold at construction; a
common power-on phase offset of the reference ADC clock then multiplies the
anti-noise by exp(j*omega0*(dtheta/2pi)*T), so the residual reduces to
d * (1 - exp(j*phi)) elementwise.  Both the direct matrix evaluation and the
reduced product form are provided so they can check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .residuals import (
    phase_error_expected_residual_exact,
    phase_error_expected_residual_reported,
)

TWO_PI = 2.0 * math.pi

PREMISE_RTOL = 1e-10


class InfeasibleCancellation(ValueError):
    """The disturbance cannot be reached through the secondary paths."""


class PremiseViolation(ValueError):
    """The scenario matrices no longer satisfy the cancellation premise."""


def _as_complex_vector(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=complex)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-D vector")
    return arr


def _as_complex_matrix(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix")
    return arr


def premise_residual(
    disturbance: np.ndarray, S: np.ndarray, H: np.ndarray, G: np.ndarray, X: np.ndarray
) -> float:
    """Relative size of d - S @ H @ G @ X."""
    r = disturbance - S @ H @ G @ X
    scale = float(np.linalg.norm(disturbance))
    return float(np.linalg.norm(r)) / (scale if scale > 0.0 else 1.0)


@dataclass(frozen=True)
class MultichannelScenario:
    """Tonal multichannel setup validated against the cancellation premise."""

    omega0: float
    sample_period: float
    reference_vector: np.ndarray
    secondary_matrix: np.ndarray
    reconstruction_matrix: np.ndarray
    control_matrix: np.ndarray
    disturbance: np.ndarray

    def __post_init__(self) -> None:
        if not self.omega0 > 0.0:
            raise ValueError("omega0 must be positive")
        if not self.sample_period > 0.0:
            raise ValueError("sample_period must be positive")
        X = _as_complex_vector(self.reference_vector, "reference_vector")
        S = _as_complex_matrix(self.secondary_matrix, "secondary_matrix")
        H = _as_complex_matrix(self.reconstruction_matrix, "reconstruction_matrix")
        G = _as_complex_matrix(self.control_matrix, "control_matrix")
        d = _as_complex_vector(self.disturbance, "disturbance")
        n_errors, n_sources = S.shape
        if H.shape != (n_sources, n_sources):
            raise ValueError("reconstruction_matrix must be square with one row per source")
        if np.any(H[~np.eye(n_sources, dtype=bool)] != 0.0):
            raise ValueError("reconstruction_matrix must be diagonal")
        if G.shape != (n_sources, X.size):
            raise ValueError("control_matrix shape must be (n_sources, n_references)")
        if d.size != n_errors:
            raise ValueError("disturbance length must equal the number of error microphones")
        for name, arr in (("X", X), ("S", S), ("H", H), ("G", G), ("d", d)):
            if not np.all(np.isfinite(arr.view(float))):
                raise ValueError(f"{name} must be finite")
            arr.setflags(write=False)
        if premise_residual(d, S, H, G, X) > PREMISE_RTOL:
            raise PremiseViolation(
                "control matrix does not cancel the disturbance at zero clock error"
            )
        object.__setattr__(self, "reference_vector", X)
        object.__setattr__(self, "secondary_matrix", S)
        object.__setattr__(self, "reconstruction_matrix", H)
        object.__setattr__(self, "control_matrix", G)
        object.__setattr__(self, "disturbance", d)

    @property
    def n_references(self) -> int:
        return self.reference_vector.size

    @property
    def n_sources(self) -> int:
        return self.secondary_matrix.shape[1]

    @property
    def n_errors(self) -> int:
        return self.secondary_matrix.shape[0]

    @property
    def omega_s(self) -> float:
        return TWO_PI / self.sample_period

    def phase_factor(self, dtheta: float) -> complex:
        """exp(j*omega0*(dtheta/2pi)*T) applied to the whole reference vector."""
        return complex(np.exp(1j * self.omega0 * (dtheta / TWO_PI) * self.sample_period))


def build_cancelling_control(disturbance, S, H, X) -> np.ndarray:
    """Minimum-norm control matrix G with S @ H @ G @ X equal to the disturbance.

    Solves A y = d for the anti-noise drive y = G @ X with the minimum-norm
    least-squares solution, then spreads y over the reference vector; raises
    InfeasibleCancellation when d is not in the range of A = S @ H.
    """
    d = _as_complex_vector(disturbance, "disturbance")
    S = _as_complex_matrix(S, "S")
    H = _as_complex_matrix(H, "H")
    X = _as_complex_vector(X, "X")
    x_norm_sq = float(np.vdot(X, X).real)
    if x_norm_sq == 0.0:
        raise InfeasibleCancellation("reference vector is zero")
    A = S @ H
    y, *_ = np.linalg.lstsq(A, d, rcond=None)
    scale = float(np.linalg.norm(d))
    if float(np.linalg.norm(A @ y - d)) > PREMISE_RTOL * (scale if scale > 0.0 else 1.0):
        raise InfeasibleCancellation("disturbance is not reachable through the secondary paths")
    return np.outer(y, X.conj()) / x_norm_sq


def residual_vector(scenario: MultichannelScenario, dtheta: float) -> np.ndarray:
    """Residual at the error microphones, evaluated from the matrices directly."""
    d = scenario.disturbance
    S, H = scenario.secondary_matrix, scenario.reconstruction_matrix
    G, X = scenario.control_matrix, scenario.reference_vector
    if premise_residual(d, S, H, G, X) > PREMISE_RTOL:
        raise PremiseViolation("scenario matrices were modified after construction")
    return d - scenario.phase_factor(dtheta) * (S @ H @ G @ X)


def residual_vector_reduced(scenario: MultichannelScenario, dtheta: float) -> np.ndarray:
    """Residual via the premise shortcut d * (1 - exp(j*phi))."""
    return scenario.disturbance * (1.0 - scenario.phase_factor(dtheta))


@dataclass(frozen=True)
class ExpectedResidual:
    """Both closed forms for the expected residual power (see residuals module)."""

    reported: float
    exact: float


def expected_residual_power(scenario: MultichannelScenario) -> ExpectedResidual:
    """Expected residual power under a uniform phase offset, both variants.

    E{d^2} is the mean squared magnitude over the disturbance vector; the two
    closed forms mirror the single-channel pair and the Monte Carlo estimator
    arbitrates between them.
    """
    e_d2 = float(np.mean(np.abs(scenario.disturbance) ** 2))
    return ExpectedResidual(
        reported=phase_error_expected_residual_reported(e_d2, scenario.omega0, scenario.omega_s),
        exact=phase_error_expected_residual_exact(e_d2, scenario.omega0, scenario.omega_s),
    )


def random_scenario(
    seed,
    max_dim: int = 4,
    sample_period: float = 1.0 / 16000.0,
    frequency_ratio: float | None = None,
) -> MultichannelScenario:
    """Random feasible scenario (dimensions up to max_dim, premise satisfied).

    Draws at least as many sources as error microphones so the cancellation
    premise is achievable, builds the control matrix with
    :func:`build_cancelling_control`, and picks the tone inside the Nyquist
    band unless frequency_ratio (omega0/omega_s) is given.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n_errors = int(rng.integers(1, max_dim + 1))
    n_sources = int(rng.integers(n_errors, max_dim + 1))
    n_references = int(rng.integers(1, max_dim + 1))
    if frequency_ratio is None:
        frequency_ratio = float(rng.uniform(0.02, 0.45))
    omega0 = frequency_ratio * TWO_PI / sample_period

    def cgauss(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    X = cgauss(n_references)
    while float(np.linalg.norm(X)) < 1e-3:
        X = cgauss(n_references)
    S = cgauss(n_errors, n_sources)
    H = np.diag(sample_period * np.exp(1j * rng.uniform(0.0, TWO_PI, n_sources)))
    d = cgauss(n_errors)
    G = build_cancelling_control(d, S, H, X)
    return MultichannelScenario(
        omega0=omega0,
        sample_period=sample_period,
        reference_vector=X,
        secondary_matrix=S,
        reconstruction_matrix=H,
        control_matrix=G,
        disturbance=d,
    )
