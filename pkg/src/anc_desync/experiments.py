"""Reproducible experiment sweeps with deterministic CSV output.

Every experiment is a pure function of its SweepSpec: identical spec and seed
produce byte-identical files.  Numeric fields are written with 12 significant
digits; non-finite values (the p_a = 0 / perfect-cancellation sentinel) are
written as empty fields.  Resolved parameters are echoed as ``# key=value``
comment lines ahead of the column header.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .clocks import ClockModel
from .fields import ChirpField, ToneField
from .multichannel import random_scenario, residual_vector, residual_vector_reduced
from .residuals import (
    chirp_mean_residual_sq,
    derive_seed,
    freq_error_residual_power,
    phase_error_expected_residual_exact,
    phase_error_expected_residual_reported,
    phase_error_monte_carlo,
)
from .simulate import (
    IMPLIED,
    PHYSICAL,
    FixedFilter,
    ReconstructionFilter,
    SecondaryPath,
    SimScenario,
    design_cancelling_filter,
    full_sum_freq_error_residual,
    run_scenario,
)
from .training import (
    TrainingConfig,
    estimate_secondary_path,
    save_filter,
    train_fxlms,
)

TWO_PI = 2.0 * math.pi

DEFAULT_SEED = 13

EXPERIMENTS = ("figure5", "freq_error", "chirp", "multichannel", "train", "validate")

_DEFAULT_POINTS = {"figure5": 100, "freq_error": 21, "chirp": 4, "multichannel": 25}


@dataclass
class SweepSpec:
    """Parameters of one experiment run; unused fields are ignored.

    fmin/fmax bound the swept tone frequency (figure5, multichannel),
    dt_max the period-offset sweep (freq_error), tl_min/tl_max the chirp
    sweep-period range, and f0 the fixed tone of freq_error and train.
    """

    experiment: str
    fs: float = 16000.0
    f0: float | None = None
    fmin: float | None = None
    fmax: float | None = None
    n_points: int | None = None
    n_draws: int = 1_000_000
    seed: int = DEFAULT_SEED
    dtheta: float = math.pi
    dt_max: float = 2e-5
    tl_min: float = 0.1
    tl_max: float = 100.0
    bandwidth: float = 1000.0
    output_path: str | None = None
    plot_path: str | None = None
    inject_dtheta: float = 0.0

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.fs > 0.0:
            raise ValueError("fs must be positive")
        if self.n_points is not None and self.n_points < 2:
            raise ValueError("sweeps need at least 2 points")
        if self.n_draws < 1:
            raise ValueError("n_draws must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def points(self) -> int:
        return self.n_points if self.n_points is not None else _DEFAULT_POINTS[self.experiment]


@dataclass
class ExperimentResult:
    """Rows (CSV experiments) or a textual report (train, validate)."""

    params: dict
    columns: tuple[str, ...] = ()
    rows: list[tuple] = dataclass_field(default_factory=list)
    report_lines: list[str] = dataclass_field(default_factory=list)
    exit_code: int = 0
    plot_y_columns: tuple[int, ...] = ()


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        return ""
    return f"{value:.11e}"


def result_text(result: ExperimentResult) -> str:
    """Render the result: comment header plus CSV rows, or the plain report."""
    lines = [f"# {key}={value!r}" if isinstance(value, str) else f"# {key}={value}"
             for key, value in result.params.items()]
    if result.report_lines:
        lines.extend(result.report_lines)
    else:
        lines.append(",".join(result.columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in result.rows)
    return "\n".join(lines) + "\n"


def run_figure5(spec: SweepSpec) -> ExperimentResult:
    """Expected residual vs tone frequency, normalized to unit noise power.

    Emits the reported closed form, the exact integral and a Monte Carlo
    estimate per frequency; per-point seeds derive from (seed, point index).
    """
    fs = spec.fs
    fmin = spec.fmin if spec.fmin is not None else 0.001 * fs
    fmax = spec.fmax if spec.fmax is not None else 0.49 * fs
    if not 0.0 < fmin < fmax < 0.5 * fs:
        raise ValueError("need 0 < fmin < fmax < fs/2")
    n = spec.points()
    ratios = np.linspace(fmin / fs, fmax / fs, n)
    omega_s = TWO_PI * fs
    rows = []
    for i, ratio in enumerate(ratios):
        omega0 = ratio * omega_s
        mc = phase_error_monte_carlo(1.0, omega0, omega_s, spec.n_draws, derive_seed(spec.seed, i))
        rows.append(
            (
                float(ratio),
                phase_error_expected_residual_reported(1.0, omega0, omega_s),
                phase_error_expected_residual_exact(1.0, omega0, omega_s),
                mc.value,
                mc.std_error,
                spec.n_draws,
                spec.seed,
            )
        )
    params = {
        "experiment": "figure5",
        "fs": fs,
        "fmin": fmin,
        "fmax": fmax,
        "points": n,
        "draws": spec.n_draws,
        "seed": spec.seed,
        "normalization": "E{p^2}=1",
    }
    columns = (
        "f0_over_fs",
        "residual_paper_eq26",
        "residual_exact",
        "residual_monte_carlo",
        "mc_std_err",
        "n_draws",
        "seed",
    )
    return ExperimentResult(params=params, columns=columns, rows=rows, plot_y_columns=(1, 2, 3))


def run_freq_error(spec: SweepSpec) -> ExperimentResult:
    """Residual power vs clock-period offset for the two-tap filter shape.

    The sweep is symmetric in dt; the analytic law, the all-tap sum and the
    time-domain simulation are emitted side by side.
    """
    fs = spec.fs
    T = 1.0 / fs
    f0 = spec.f0 if spec.f0 is not None else 500.0
    omega0 = TWO_PI * f0
    if not 0.0 < f0 < 0.5 * fs:
        raise ValueError("need 0 < f0 < fs/2")
    if not spec.dt_max > 0.0:
        raise ValueError("dt_max must be positive")
    if not (omega0 * (T + spec.dt_max) < math.pi and T - spec.dt_max > 0.0):
        raise ValueError("dt range leaves the Nyquist-valid domain")
    field = ToneField(1.0, omega0)
    filt = FixedFilter([0.0, 1.0])
    t_s = 10.0 / fs
    n = spec.points()
    rows = []
    for dt in np.linspace(-spec.dt_max, spec.dt_max, n):
        dt = float(dt)
        scenario = SimScenario(
            field=field,
            mic_distance=1.0,
            reference_clock=ClockModel(T),
            error_clock=ClockModel(T, dt),
            secondary_path=SecondaryPath(t_s),
            reconstruction=ReconstructionFilter.closed_form(),
            filter=filt,
            disturbance_mode=IMPLIED,
        )
        report = run_scenario(scenario)
        rows.append(
            (
                dt,
                freq_error_residual_power(1.0, 1.0, omega0, dt),
                full_sum_freq_error_residual(filt, 1.0, omega0, T, dt, t_s),
                report.residual_power,
                report.reduction_db,
            )
        )
    params = {
        "experiment": "freq_error",
        "fs": fs,
        "f0": f0,
        "dt_max": spec.dt_max,
        "points": n,
        "filter_taps": "0,1",
        "secondary_delay_samples": 10,
    }
    columns = ("dt_seconds", "analytic_eq18", "full_sum_residual", "simulated_residual", "reduction_db")
    return ExperimentResult(params=params, columns=columns, rows=rows, plot_y_columns=(1, 2, 3))


def run_chirp(spec: SweepSpec) -> ExperimentResult:
    """Mean squared chirp residual vs sweep period, over a fixed analysis window.

    The window [0, tl_min] is shared by every row so the long-period limit is
    visible: slower sweeps accumulate less phase mismatch over the same time.
    """
    fs = spec.fs
    T = 1.0 / fs
    if not 0.0 < spec.tl_min < spec.tl_max:
        raise ValueError("need 0 < tl_min < tl_max")
    if not 0.0 < spec.bandwidth < 0.5 * fs:
        raise ValueError("need 0 < bandwidth < fs/2")
    t_s = 32.0 * T
    window = spec.tl_min
    n = spec.points()
    rows = []
    for tl in np.geomspace(spec.tl_min, spec.tl_max, n):
        tl = float(tl)
        analytic = chirp_mean_residual_sq(
            1.0, spec.bandwidth, tl, 0.0, window, 0.0, t_s, spec.dtheta, T
        )
        scenario = SimScenario(
            field=ChirpField(1.0, spec.bandwidth, tl),
            mic_distance=1.0,
            reference_clock=ClockModel(T),
            error_clock=ClockModel(T, 0.0, spec.dtheta),
            secondary_path=SecondaryPath(t_s),
            reconstruction=ReconstructionFilter.closed_form(),
            control_filter_delay=0.0,
            measure_start=0.0,
            measure_duration=window,
        )
        rows.append((tl, analytic, run_scenario(scenario).residual_power))
    params = {
        "experiment": "chirp",
        "fs": fs,
        "bandwidth": spec.bandwidth,
        "dtheta": spec.dtheta,
        "tl_min": spec.tl_min,
        "tl_max": spec.tl_max,
        "points": n,
        "window_seconds": window,
        "secondary_delay_samples": 32,
    }
    columns = ("T_L", "mean_e2_analytic", "mean_e2_simulated")
    return ExperimentResult(params=params, columns=columns, rows=rows, plot_y_columns=(1, 2))


def run_multichannel(spec: SweepSpec) -> ExperimentResult:
    """Expected multichannel residual vs tone frequency on random scenarios.

    Values are normalized by the mean squared disturbance magnitude; the
    Monte Carlo column draws the shared phase offset and applies the reduced
    residual form, which the validation suite separately checks against the
    full matrix evaluation.
    """
    fs = spec.fs
    fmin = spec.fmin if spec.fmin is not None else 0.02 * fs
    fmax = spec.fmax if spec.fmax is not None else 0.48 * fs
    if not 0.0 < fmin < fmax < 0.5 * fs:
        raise ValueError("need 0 < fmin < fmax < fs/2")
    n = spec.points()
    ratios = np.linspace(fmin / fs, fmax / fs, n)
    omega_s = TWO_PI * fs
    rows = []
    for i, ratio in enumerate(ratios):
        ratio = float(ratio)
        scenario = random_scenario(
            derive_seed(spec.seed, 2 * i), sample_period=1.0 / fs, frequency_ratio=ratio
        )
        theta = np.random.default_rng(derive_seed(spec.seed, 2 * i + 1)).uniform(
            0.0, TWO_PI, spec.n_draws
        )
        factor = 2.0 - 2.0 * np.cos(ratio * theta)
        mc_value = float(np.mean(factor))
        mc_se = float(np.std(factor, ddof=1) / math.sqrt(spec.n_draws)) if spec.n_draws > 1 else 0.0
        rows.append(
            (
                ratio,
                scenario.n_errors,
                scenario.n_sources,
                scenario.n_references,
                phase_error_expected_residual_reported(1.0, ratio * omega_s, omega_s),
                phase_error_expected_residual_exact(1.0, ratio * omega_s, omega_s),
                mc_value,
                mc_se,
                spec.n_draws,
                spec.seed,
            )
        )
    params = {
        "experiment": "multichannel",
        "fs": fs,
        "fmin": fmin,
        "fmax": fmax,
        "points": n,
        "draws": spec.n_draws,
        "seed": spec.seed,
        "normalization": "E{d^2}=1",
    }
    columns = (
        "f0_over_fs",
        "n_errors",
        "n_sources",
        "n_references",
        "expected_paper_eq41",
        "expected_exact",
        "residual_monte_carlo",
        "mc_std_err",
        "n_draws",
        "seed",
    )
    return ExperimentResult(params=params, columns=columns, rows=rows, plot_y_columns=(4, 5, 6))


TRAIN_F0 = 200.0
TRAIN_DELAY_SAMPLES = 10
TRAIN_N_TAPS = 32
TRAIN_STEP_SIZE = 1e-3
TRAIN_ITERATIONS = 1500


def trained_reference_filter(fs: float, f0: float = TRAIN_F0):
    """Train the reference configuration and return (result, scenario pieces)."""
    T = 1.0 / fs
    field = ToneField(1.0, TWO_PI * f0)
    true_path = SecondaryPath(TRAIN_DELAY_SAMPLES * T)
    estimate = estimate_secondary_path(true_path, T, TRAIN_N_TAPS)
    config = TrainingConfig(
        step_size=TRAIN_STEP_SIZE,
        n_taps=TRAIN_N_TAPS,
        n_iterations=TRAIN_ITERATIONS,
        secondary_path_estimate=estimate,
    )
    mic_distance = field.sound_speed * (TRAIN_DELAY_SAMPLES + 2) * T
    result = train_fxlms(field, estimate, true_path, config, T, mic_distance=mic_distance)
    return result, field, true_path, mic_distance


def replay_scenario(field, mic_distance, true_path, filt, fs, dtheta: float = 0.0) -> SimScenario:
    """Continuous-time replay of a trained filter against the physical field."""
    T = 1.0 / fs
    return SimScenario(
        field=field,
        mic_distance=mic_distance,
        reference_clock=ClockModel(T),
        error_clock=ClockModel(T, 0.0, dtheta),
        secondary_path=true_path,
        reconstruction=ReconstructionFilter.closed_form(),
        filter=filt,
        disturbance_mode=PHYSICAL,
    )


def run_train(spec: SweepSpec) -> ExperimentResult:
    """Train the frozen filter, report loop and replay reduction, save coefficients."""
    result, field, true_path, mic_distance = trained_reference_filter(
        spec.fs, spec.f0 if spec.f0 is not None else TRAIN_F0
    )
    replay = run_scenario(replay_scenario(field, mic_distance, true_path, result.filter, spec.fs))
    params = {
        "experiment": "train",
        "fs": spec.fs,
        "f0": field.angular_frequency / TWO_PI,
        "delay_samples": TRAIN_DELAY_SAMPLES,
        "n_taps": TRAIN_N_TAPS,
        "step_size": TRAIN_STEP_SIZE,
        "iterations": TRAIN_ITERATIONS,
    }
    lines = [
        f"TRAIN loop_reduction_db={_fmt(result.loop_reduction_db)}",
        f"TRAIN replay_reduction_db={_fmt(replay.reduction_db)}",
        f"TRAIN replay_minus_loop_db={_fmt(replay.reduction_db - result.loop_reduction_db)}",
    ]
    out = ExperimentResult(params=params, report_lines=lines)
    if spec.output_path:
        save_filter(result.filter, spec.fs, spec.output_path)
        lines.append(f"TRAIN coefficients_written={spec.output_path!r}")
    return out


def run_validate(spec: SweepSpec) -> ExperimentResult:
    """One-shot consistency suite; exit code 0 iff every check passes.

    Each line is `CHECK <name> dev=<value> tol=<value> PASS|FAIL`, stable
    across runs for a fixed seed.  inject_dtheta poisons the zero-error check
    on purpose (deliberate-failure path for wiring tests).
    """
    fs = spec.fs
    T = 1.0 / fs
    lines: list[str] = []
    all_ok = True

    def check(name: str, dev: float, tol: float) -> None:
        nonlocal all_ok
        ok = dev <= tol
        all_ok = all_ok and ok
        lines.append(f"CHECK {name} dev={_fmt(dev)} tol={_fmt(tol)} {'PASS' if ok else 'FAIL'}")

    # frozen chain cancels exactly when the clocks agree
    field = ToneField(1.0, TWO_PI * 440.0)
    path = SecondaryPath(10.0 * T)
    filt = design_cancelling_filter(field, 0.9, path, T, n_taps=4)
    zero = run_scenario(
        SimScenario(
            field=field,
            mic_distance=0.9,
            reference_clock=ClockModel(T),
            error_clock=ClockModel(T, 0.0, spec.inject_dtheta),
            secondary_path=path,
            reconstruction=ReconstructionFilter.closed_form(),
            filter=filt,
            disturbance_mode=PHYSICAL,
        )
    )
    check("zero_error_cancellation", zero.residual_power / zero.disturbance_power, 1e-12)

    # the two reconstruction paths agree on a desynchronized scenario
    err_clock = ClockModel(T, 2e-5, 1.0)
    base = dict(
        field=field,
        mic_distance=0.9,
        reference_clock=ClockModel(T),
        error_clock=err_clock,
        secondary_path=path,
        filter=filt,
        disturbance_mode=IMPLIED,
    )
    closed = run_scenario(SimScenario(reconstruction=ReconstructionFilter.closed_form(), **base))
    sinc = run_scenario(SimScenario(reconstruction=ReconstructionFilter.windowed_sinc(64), **base))
    check(
        "mode_equivalence",
        abs(sinc.residual_power - closed.residual_power) / closed.residual_power,
        1e-3,
    )

    # multichannel: direct matrix residual equals the reduced product form
    worst = 0.0
    rng = np.random.default_rng(derive_seed(spec.seed, 10_001))
    for _ in range(20):
        scenario = random_scenario(rng)
        for dtheta in rng.uniform(0.0, TWO_PI, 20):
            direct = residual_vector(scenario, float(dtheta))
            reduced = residual_vector_reduced(scenario, float(dtheta))
            scale = float(np.linalg.norm(scenario.disturbance))
            worst = max(worst, float(np.linalg.norm(direct - reduced)) / scale)
    check("multichannel_reduction", worst, 1e-9)

    # Monte Carlo converges to the exact integral (worst z over 3 tones)
    worst_z = 0.0
    omega_s = TWO_PI * fs
    for i, ratio in enumerate((0.1, 0.25, 0.45)):
        mc = phase_error_monte_carlo(
            1.0, ratio * omega_s, omega_s, spec.n_draws, derive_seed(spec.seed, 20_001 + i)
        )
        exact = phase_error_expected_residual_exact(1.0, ratio * omega_s, omega_s)
        if mc.std_error > 0.0:
            worst_z = max(worst_z, abs(mc.value - exact) / mc.std_error)
    check("mc_vs_exact", worst_z, 3.0)

    # frozen-filter replay matches the training loop
    result, tfield, tpath, tdistance = trained_reference_filter(fs)
    replay = run_scenario(replay_scenario(tfield, tdistance, tpath, result.filter, fs))
    check("replay_equivalence", abs(replay.reduction_db - result.loop_reduction_db), 1.0)

    params = {
        "experiment": "validate",
        "fs": fs,
        "draws": spec.n_draws,
        "seed": spec.seed,
        "inject_dtheta": spec.inject_dtheta,
    }
    return ExperimentResult(params=params, report_lines=lines, exit_code=0 if all_ok else 1)


_RUNNERS = {
    "figure5": run_figure5,
    "freq_error": run_freq_error,
    "chirp": run_chirp,
    "multichannel": run_multichannel,
    "train": run_train,
    "validate": run_validate,
}


def run_experiment(spec: SweepSpec) -> ExperimentResult:
    return _RUNNERS[spec.experiment](spec)


def write_plot(result: ExperimentResult, path: str) -> None:
    """Optional line chart of the sweep columns; never an acceptance surface."""
    if not result.rows:
        raise ValueError(f"experiment {result.params.get('experiment')!r} has no sweep to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = np.array([[float(v) for v in row] for row in result.rows])
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for idx in result.plot_y_columns:
        ax.plot(data[:, 0], data[:, idx], label=result.columns[idx])
    ax.set_xlabel(result.columns[0])
    ax.legend()
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
