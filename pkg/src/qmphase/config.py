"""Flat ``key=value`` run configuration.

Configuration may come from a file, from command-line flags, or both; flags
win.  Numeric values accept plain numbers and simple expressions in ``pi``
such as ``2*pi/5``.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, fields
from typing import Mapping

from .core import ModelParams, StateVector
from .errors import ParameterError, QmphaseError

COMMANDS = ("dist", "diagram", "boundary", "fcs", "sample", "validate")
OUTPUT_ENV = "QMPHASE_OUTPUT_DIR"

_EXPR = re.compile(r"^[0-9eE.+\-*/() ]*(pi[0-9eE.+\-*/() ]*)*$")


class ConfigError(QmphaseError):
    """Malformed configuration text or an unknown key (usage error)."""


class ConfigValidationError(QmphaseError, ValueError):
    """A configuration value violates a model constraint."""


def _number(text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    if not text or not _EXPR.match(text):
        raise ValueError(f"not a number: {text!r}")
    try:
        value = eval(text, {"__builtins__": {}}, {"pi": math.pi})  # noqa: S307 - charset checked above
    except Exception as exc:
        raise ValueError(f"not a number: {text!r}") from exc
    return float(value)


def _integer(text: str) -> int:
    value = _number(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _default_output() -> str:
    return os.path.join(os.environ.get(OUTPUT_ENV, "."), "qmphase")


# key -> (converter, default, help)
KEYS: dict[str, tuple] = {
    "theta": (_number, 0.4 * math.pi, "theta: measurement-strength angle in [0, pi/2]; strength = sin(theta)"),
    "omega": (_number, 0.1, "omega: precession per interval, omega_L * tau, in [0, pi]"),
    "r_tau": (_number, 0.0, "r*tau: relaxation per interval, >= 0"),
    "n": (_integer, 100, "N: number of measurements (even, >= 2)"),
    "rhoz": (_number, 0.0, "rho_z of the initial state p0 = (1, rho_z, rho_x)"),
    "rhox": (_number, 1.0, "rho_x of the initial state"),
    "rhoy": (_number, 0.0, "rho_y of the initial state; must be 0"),
    "theta_min": (_number, 0.02, "diagram/boundary: first theta row"),
    "theta_max": (_number, math.pi / 2, "diagram/boundary: last theta row"),
    "theta_steps": (_integer, 157, "diagram/boundary: number of theta rows"),
    "omega_min": (_number, 0.02, "diagram: first omega column; boundary: lower bisection bracket when along=omega"),
    "omega_max": (_number, math.pi, "diagram: last omega column; boundary: upper bisection bracket when along=omega"),
    "omega_steps": (_integer, 157, "diagram: number of omega columns"),
    "along": (str, "omega", "boundary: bisect in 'omega' per theta row or in 'theta' per omega column"),
    "resolution": (_number, 0.01, "boundary: bisection resolution in radians"),
    "chi_points": (_integer, 256, "fcs: number of chi samples on [0, 2 pi) for the eigenvalue locus"),
    "n_traj": (_integer, 10000, "sample: number of Monte Carlo trajectories"),
    "seed": (_integer, 0, "sample: 64-bit random seed"),
    "threads": (_integer, os.cpu_count() or 1, "worker processes; results do not depend on it"),
    "output": (str, None, f"output path prefix (default ${OUTPUT_ENV}/qmphase)"),
}

# keys that do not influence results and are left out of file metadata
NON_RESULT_KEYS = ("threads", "output")


@dataclass(frozen=True)
class RunConfig:
    command: str
    theta: float
    omega: float
    r_tau: float
    n: int
    rhoz: float
    rhox: float
    rhoy: float
    theta_min: float
    theta_max: float
    theta_steps: int
    omega_min: float
    omega_max: float
    omega_steps: int
    along: str
    resolution: float
    chi_points: int
    n_traj: int
    seed: int
    threads: int
    output: str

    @property
    def initial(self) -> StateVector:
        return StateVector(1.0, self.rhoz, self.rhox)

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.theta, self.omega, self.r_tau, self.n, self.initial)

    def metadata(self) -> dict[str, object]:
        out = {}
        for f in fields(self):
            if f.name not in NON_RESULT_KEYS:
                out[f.name] = getattr(self, f.name)
        return out


def parse_text(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        values[key] = value
    return values


def parse_config(
    text: str = "",
    flags: Mapping[str, object] | None = None,
    command: str = "dist",
) -> RunConfig:
    """Merge file text and flag values (flags win) into a validated config."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    raw: dict[str, object] = dict(parse_text(text))
    for key, value in (flags or {}).items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        if value is not None:
            raw[key] = value
    resolved = {}
    for key, (convert, default, _) in KEYS.items():
        if key in raw:
            value = raw[key]
            if isinstance(value, str):
                try:
                    value = convert(value)
                except ValueError as exc:
                    raise ConfigError(f"{key}: {exc}") from None
            resolved[key] = value
        else:
            resolved[key] = default
    if resolved["output"] is None:
        resolved["output"] = _default_output()
    config = RunConfig(command=command, **resolved)
    validate_config(config)
    return config


def validate_config(config: RunConfig) -> None:
    if config.rhoy != 0.0:
        raise ConfigValidationError("rhoy must be 0 (the state is confined to the x-z plane)")
    try:
        config.params
    except ParameterError as exc:
        raise ConfigValidationError(str(exc)) from None
    for lo, hi, upper, name in (
        (config.theta_min, config.theta_max, math.pi / 2, "theta"),
        (config.omega_min, config.omega_max, math.pi, "omega"),
    ):
        if not 0.0 <= lo <= hi <= upper:
            raise ConfigValidationError(f"{name}_min/{name}_max must satisfy 0 <= min <= max <= {upper:g}")
    if config.theta_steps < 1 or config.omega_steps < 1:
        raise ConfigValidationError("theta_steps and omega_steps must be >= 1")
    if config.along not in ("omega", "theta"):
        raise ConfigValidationError("along must be 'omega' or 'theta'")
    if config.resolution <= 0:
        raise ConfigValidationError("resolution must be > 0")
    if config.chi_points < 1:
        raise ConfigValidationError("chi_points must be >= 1")
    if config.n_traj < 1:
        raise ConfigValidationError("n_traj must be >= 1")
    if not 0 <= config.seed < 2**64:
        raise ConfigValidationError("seed must lie in [0, 2^64)")
    if config.threads < 1:
        raise ConfigValidationError("threads must be >= 1")
