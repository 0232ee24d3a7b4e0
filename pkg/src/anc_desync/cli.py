"""anc-desync command line: run the experiment sweeps reproducibly.

Exit codes: 0 success, 1 validation failure, 2 bad arguments, 3 I/O failure.
A key=value config file may provide any flag's value; explicit flags win.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (
    DEFAULT_SEED,
    EXPERIMENTS,
    SweepSpec,
    result_text,
    run_experiment,
    write_plot,
)

_CONVERTERS = {
    "fs": float,
    "f0": float,
    "fmin": float,
    "fmax": float,
    "points": int,
    "draws": int,
    "seed": int,
    "dtheta": float,
    "dt": float,
    "tlmin": float,
    "tlmax": float,
    "bandwidth": float,
    "out": str,
    "plot": str,
    "inject_dtheta": float,
}

_HELP = {
    "fs": "sample rate in Hz (default 16000)",
    "f0": "tone frequency in Hz (freq_error default 500, train default 200)",
    "fmin": "sweep start frequency in Hz (figure5 default 0.001*fs, multichannel 0.02*fs)",
    "fmax": "sweep end frequency in Hz (figure5 default 0.49*fs, multichannel 0.48*fs)",
    "points": "sweep points (figure5 100, freq_error 21, chirp 4, multichannel 25)",
    "draws": "Monte Carlo draws per point (default 1000000)",
    "seed": f"master seed; per-point seeds are derived from it (default {DEFAULT_SEED})",
    "dtheta": "clock phase offset in radians (default pi)",
    "dt": "largest clock period offset in seconds for freq_error (default 2e-5)",
    "tlmin": "shortest chirp sweep period in seconds (default 0.1)",
    "tlmax": "longest chirp sweep period in seconds (default 100)",
    "bandwidth": "chirp bandwidth in Hz (default 1000)",
    "out": "output file (CSV for sweeps, report for validate, coefficients for train); stdout otherwise",
    "plot": "write a line chart of the sweep columns to this path",
    "inject_dtheta": "validate only: poison the zero-error check with this phase offset",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anc-desync",
        description="Clock-desynchronization experiments for fixed-filter active noise control.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=str, default=None, help="key=value file of flag defaults")
        for key in ("fs", "f0", "fmin", "fmax", "dtheta", "dt", "tlmin", "tlmax", "bandwidth"):
            p.add_argument(f"--{key}", type=float, default=None, help=_HELP[key])
        for key in ("points", "draws", "seed"):
            p.add_argument(f"--{key}", type=int, default=None, help=_HELP[key])
        p.add_argument("--out", type=str, default=None, help=_HELP["out"])
        p.add_argument("--plot", type=str, default=None, help=_HELP["plot"])
        if name == "validate":
            p.add_argument("--inject-dtheta", type=float, default=None, help=_HELP["inject_dtheta"])
    return parser


def load_config(path: str) -> dict:
    """Parse a key=value config file; '#' starts a comment line."""
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _CONVERTERS:
            raise ValueError(f"bad config line: {raw!r}")
        values[key] = _CONVERTERS[key](val.strip())
    return values


def build_spec(args: argparse.Namespace) -> SweepSpec:
    config = load_config(args.config) if args.config else {}

    def pick(flag: str):
        value = getattr(args, flag, None)
        return value if value is not None else config.get(flag)

    kwargs = {"experiment": args.experiment}
    mapping = {
        "fs": "fs",
        "f0": "f0",
        "fmin": "fmin",
        "fmax": "fmax",
        "points": "n_points",
        "draws": "n_draws",
        "seed": "seed",
        "dtheta": "dtheta",
        "dt": "dt_max",
        "tlmin": "tl_min",
        "tlmax": "tl_max",
        "bandwidth": "bandwidth",
        "out": "output_path",
        "plot": "plot_path",
        "inject_dtheta": "inject_dtheta",
    }
    for flag, field in mapping.items():
        value = pick(flag)
        if value is not None:
            kwargs[field] = value
    return SweepSpec(**kwargs)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = build_spec(args)
        result = run_experiment(spec)
    except (ValueError, KeyError) as exc:
        print(f"anc-desync: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"anc-desync: i/o error: {exc}", file=sys.stderr)
        return 3
    text = result_text(result)
    try:
        if spec.output_path and spec.experiment != "train":
            Path(spec.output_path).write_text(text)
        else:
            sys.stdout.write(text)
        if spec.plot_path:
            if result.rows:
                write_plot(result, spec.plot_path)
            else:
                print(f"anc-desync: nothing to plot for {spec.experiment}", file=sys.stderr)
    except OSError as exc:
        print(f"anc-desync: i/o error: {exc}", file=sys.stderr)
        return 3
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
