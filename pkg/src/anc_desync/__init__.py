"""Clock-desynchronization analysis for fixed-filter active noise control.

Simulates a frozen-filter ANC chain (sample, FIR, reconstruct, secondary
path, superpose) whose ADC clock differs from the training clock in period
or power-on phase, and cross-validates the measured residuals against
closed-form laws, exact expectations and seeded Monte Carlo estimates, for
tonal, chirp and multichannel scenarios.
"""

from .clocks import ClockModel, NyquistCheck, NyquistViolation, check_nyquist, validate_nyquist
from .fields import ChirpField, ToneField, sample_reference
from .multichannel import (
    ExpectedResidual,
    InfeasibleCancellation,
    MultichannelScenario,
    PremiseViolation,
    build_cancelling_control,
    expected_residual_power,
    random_scenario,
    residual_vector,
    residual_vector_reduced,
)
from .residuals import (
    MonteCarloEstimate,
    PhaseErrorDensity,
    UNIFORM_PHASE,
    chirp_mean_residual_sq,
    chirp_residual_sq,
    derive_seed,
    freq_error_residual_power,
    phase_error_expected_residual_exact,
    phase_error_expected_residual_reported,
    phase_error_instant_residual,
    phase_error_monte_carlo,
)
from .simulate import (
    CLOSED_FORM,
    IMPLIED,
    PHYSICAL,
    WINDOWED_SINC,
    FixedFilter,
    ReconstructionFilter,
    ResidualReport,
    SecondaryPath,
    SimScenario,
    antinoise_at,
    design_cancelling_filter,
    disturbance_at,
    full_sum_freq_error_residual,
    measurement_grid,
    run_scenario,
)
from .training import (
    DivergenceError,
    InsufficientTapsError,
    TrainingConfig,
    TrainingResult,
    estimate_secondary_path,
    load_filter,
    noise_reduction_db,
    save_filter,
    train_fxlms,
)

__version__ = "0.1.0"
