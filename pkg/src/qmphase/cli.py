"""Command-line entry point: ``qmphase <command> [--config FILE] [--key VALUE ...]``.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import fcs, oracle, phase
from .config import COMMANDS, KEYS, ConfigError, ConfigValidationError, RunConfig, parse_config
from .dp import CSV_COLUMNS, afm_distribution, fm_distribution
from .errors import NumericError, QmphaseError, ResolutionError
from .io import write_csv
from .validation import run_checks

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

DESCRIPTIONS = {
    "dist": "exact FM and AFM outcome distributions",
    "diagram": "phase labels over a (theta, omega) grid",
    "boundary": "PL/UPL and UPL/APL boundaries by bisection, plus oscillation period",
    "fcs": "eigenvalue loci of the tilted generator and closed-form distributions",
    "sample": "Monte Carlo histograms from seeded trajectories",
    "validate": "oracle-equivalence suite at N <= 12",
}


def build_parser() -> argparse.ArgumentParser:
    keys = argparse.ArgumentParser(add_help=False)
    keys.add_argument("--config", type=Path, help="file of key=value lines (flags override it)")
    for key, (_, default, text) in KEYS.items():
        shown = f"{default:.6g}" if isinstance(default, float) else default
        keys.add_argument(f"--{key.replace('_', '-')}", dest=key, metavar="VALUE",
                          help=f"{text} [default: {shown}]")
    parser = argparse.ArgumentParser(
        prog="qmphase",
        description="Outcome statistics of a precessing qubit under sequential measurement.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in COMMANDS:
        sub.add_parser(name, parents=[keys], help=DESCRIPTIONS[name], description=DESCRIPTIONS[name])
    return parser


def _path(config: RunConfig, suffix: str) -> Path:
    return Path(f"{config.output}_{suffix}.csv")


def cmd_dist(config: RunConfig) -> list[Path]:
    params = config.params
    meta = config.metadata()
    return [
        write_csv(_path(config, "fm"), CSV_COLUMNS, fm_distribution(params).rows(), {**meta, "kind": "FM"}),
        write_csv(_path(config, "afm"), CSV_COLUMNS, afm_distribution(params).rows(), {**meta, "kind": "AFM"}),
    ]


def _theta_grid(config: RunConfig) -> np.ndarray:
    return np.linspace(config.theta_min, config.theta_max, config.theta_steps)


def _omega_grid(config: RunConfig) -> np.ndarray:
    return np.linspace(config.omega_min, config.omega_max, config.omega_steps)


def cmd_diagram(config: RunConfig) -> list[Path]:
    diagram = phase.sweep(
        _theta_grid(config), _omega_grid(config), config.n, config.initial, config.r_tau,
        workers=config.threads,
    )
    return [write_csv(_path(config, "diagram"), phase.DIAGRAM_COLUMNS, diagram.rows(), config.metadata())]


def cmd_boundary(config: RunConfig) -> list[Path]:
    fixed = _theta_grid(config) if config.along == "omega" else _omega_grid(config)
    axis = "theta" if config.along == "omega" else "omega"
    if config.along == "omega":
        bracket = (config.omega_min, config.omega_max)
    else:
        bracket = (config.theta_min, config.theta_max)
    rows, periods = [], []
    for kind in phase.KINDS:
        points = phase.scan_boundary(
            fixed, kind, config.n, along=config.along, bracket=bracket, resolution=config.resolution,
            initial=config.initial, r_tau=config.r_tau, workers=config.threads,
        )
        rows.extend((t, w, kind) for t, w in points)
        try:
            period = phase.oscillation_period(points, axis=axis)
        except ResolutionError as exc:
            print(f"warning: {kind}: {exc}", file=sys.stderr)
            period = math.nan
        periods.append((kind, axis, period, 2 * math.pi / (config.n - 2), len(points)))
    meta = config.metadata()
    return [
        write_csv(_path(config, "boundary"), phase.BOUNDARY_COLUMNS, rows, meta),
        write_csv(_path(config, "period"),
                  ("kind", "axis", "period", "expected_2pi_over_n_minus_2", "n_points"), periods, meta),
    ]


def cmd_fcs(config: RunConfig) -> list[Path]:
    params = config.params
    n, th, om = config.n, config.theta, config.omega
    meta = config.metadata()
    locus = write_csv(_path(config, "fcs_locus"), fcs.LOCUS_COLUMNS,
                      fcs.eigenvalue_locus(th, om, config.chi_points), meta)
    exact = fm_distribution(params).probabilities
    binom = fcs.binomial_limit(n)
    two = fcs.two_binomial_limit(th, om, n) if th > om else np.full(n + 1, math.nan)
    try:
        closed = fcs.closed_form_distribution(th, om, n) if params.initial == fcs.X_UP else None
    except ZeroDivisionError:
        closed = None
    if closed is None:
        closed = np.full(n + 1, math.nan)
    rows = (
        (k, (2 * k - n) / n, float(exact[k]), float(closed[k]), float(binom[k]), float(two[k]))
        for k in range(n + 1)
    )
    dist = write_csv(_path(config, "fcs_dist"),
                     ("n_up", "order_param", "exact", "closed_form", "binomial_limit", "two_binomial_limit"),
                     rows, meta)
    return [locus, dist]


def cmd_sample(config: RunConfig) -> list[Path]:
    result = oracle.monte_carlo_sample(config.params, config.n_traj, config.seed, workers=config.threads)
    meta = {**config.metadata(), "generator": result.generator}
    return [
        write_csv(_path(config, "sample_fm"), oracle.MC_COLUMNS, result.rows("FM"), {**meta, "kind": "FM"}),
        write_csv(_path(config, "sample_afm"), oracle.MC_COLUMNS, result.rows("AFM"), {**meta, "kind": "AFM"}),
    ]


def cmd_validate(config: RunConfig) -> bool:
    results = run_checks()
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return ok


HANDLERS = {
    "dist": cmd_dist,
    "diagram": cmd_diagram,
    "boundary": cmd_boundary,
    "fcs": cmd_fcs,
    "sample": cmd_sample,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        if config.command == "validate":
            return EXIT_OK if cmd_validate(config) else EXIT_VALIDATION
        for path in HANDLERS[config.command](config):
            print(path)
        return EXIT_OK
    except NumericError as exc:
        print(f"qmphase {config.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except QmphaseError as exc:
        print(f"qmphase {config.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    flags = {k: v for k, v in vars(args).items() if k in KEYS}
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        config = parse_config(text, flags, command=args.command)
    except OSError as exc:
        print(f"qmphase: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"qmphase: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigValidationError as exc:
        print(f"qmphase: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
