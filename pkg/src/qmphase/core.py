"""Qubit state vector and single-step propagators.

A qubit precessing about the y axis keeps rho_y = 0, so its (possibly
unnormalized, outcome-conditioned) state is carried by three real numbers
``(rho0, rhoz, rhox)``.  One interval of the protocol is a precession by
``omega`` followed by a measurement of sigma_z with strength ``sin(theta)``;
both are folded into a single real 3x3 "evolving matrix" per outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateStateError, ParameterError

#: Slack used when checking probability and Bloch-cone constraints.
TOL = 1e-12


@dataclass(frozen=True)
class StateVector:
    """Conditioned qubit state ``(rho0, rhoz, rhox)``.

    ``rho0`` is the probability weight of the outcome class the vector
    belongs to; ``(rhoz, rhox)`` is the weight times the Bloch vector.
    """

    rho0: float
    rhoz: float
    rhox: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rho0, self.rhoz, self.rhox], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "StateVector":
        a, b, c = (float(v) for v in values)
        return cls(a, b, c)

    @property
    def bloch_norm2(self) -> float:
        return self.rhoz * self.rhoz + self.rhox * self.rhox

    def is_physical(self, tol: float = TOL) -> bool:
        """True if ``0 <= rho0 <= 1`` and the vector lies inside the Bloch cone."""
        return (
            -tol <= self.rho0 <= 1.0 + tol
            and self.bloch_norm2 <= self.rho0 * self.rho0 + tol
        )

    def flipped(self) -> "StateVector":
        """Spin-flipped state ``(rho0, -rhoz, -rhox)``."""
        return StateVector(self.rho0, -self.rhoz, -self.rhox)


#: sigma_x eigenstate, the default initial state.
X_UP = StateVector(1.0, 0.0, 1.0)
#: Maximally mixed state.
MIXED = StateVector(1.0, 0.0, 0.0)
#: sigma_z eigenstate.
Z_UP = StateVector(1.0, 1.0, 0.0)


@dataclass(frozen=True)
class ModelParams:
    """Full specification of one experiment.

    Attributes:
        theta: measurement-strength angle in [0, pi/2]; strength is sin(theta).
        omega: precession angle per interval, in [0, pi].
        r_tau: relaxation per interval (rate times interval), >= 0.
        n_meas: number of measurements N; even and >= 2.
        initial: normalized initial state (rho0 = 1).
    """

    theta: float
    omega: float
    r_tau: float = 0.0
    n_meas: int = 100
    initial: StateVector = field(default=X_UP)

    def __post_init__(self):
        check_angles(self.theta, self.omega, self.r_tau)
        if isinstance(self.n_meas, bool) or int(self.n_meas) != self.n_meas:
            raise ParameterError(f"n must be an integer, got {self.n_meas!r}")
        object.__setattr__(self, "n_meas", int(self.n_meas))
        if self.n_meas < 2:
            raise ParameterError(f"n must be >= 2, got {self.n_meas}")
        if self.n_meas % 2:
            raise ParameterError(f"n must be even, got {self.n_meas}")
        check_initial(self.initial)

    def replace(self, **changes) -> "ModelParams":
        values = dict(
            theta=self.theta,
            omega=self.omega,
            r_tau=self.r_tau,
            n_meas=self.n_meas,
            initial=self.initial,
        )
        values.update(changes)
        return ModelParams(**values)


def check_angles(theta: float, omega: float, r_tau: float = 0.0) -> None:
    for name, value in (("theta", theta), ("omega", omega), ("r_tau", r_tau)):
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value!r}")
    if not 0.0 <= theta <= math.pi / 2:
        raise ParameterError(f"theta must lie in [0, pi/2], got {theta}")
    if not 0.0 <= omega <= math.pi:
        raise ParameterError(f"omega must lie in [0, pi], got {omega}")
    if r_tau < 0.0:
        raise ParameterError(f"r_tau must be >= 0, got {r_tau}")


def check_initial(p: StateVector) -> None:
    if not isinstance(p, StateVector):
        raise ParameterError(f"initial state must be a StateVector, got {type(p).__name__}")
    if abs(p.rho0 - 1.0) > TOL:
        raise ParameterError(f"initial state must have rho0 = 1, got {p.rho0}")
    if p.bloch_norm2 > 1.0 + TOL:
        raise ParameterError(
            f"initial state must satisfy rhoz^2 + rhox^2 <= 1, got {p.bloch_norm2}"
        )


@dataclass(frozen=True, eq=False)
class EvolvingMatrix:
    """Read-only 3x3 propagator for one precession + measurement interval."""

    alpha: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.float64)
        if arr.shape != (3, 3):
            raise ParameterError(f"evolving matrix must be 3x3, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            return StateVector.from_array(self.entries @ other.as_array())
        if isinstance(other, EvolvingMatrix):
            return self.entries @ other.entries
        return self.entries @ other


def precess(p: StateVector, omega: float) -> StateVector:
    """Rotate the Bloch vector of ``p`` by ``omega`` about the y axis."""
    c, s = math.cos(omega), math.sin(omega)
    return StateVector(p.rho0, p.rhoz * c - p.rhox * s, p.rhox * c + p.rhoz * s)


def _check_alpha(alpha) -> int:
    if alpha not in (1, -1):
        raise ParameterError(f"outcome alpha must be +1 or -1, got {alpha!r}")
    return int(alpha)


@lru_cache(maxsize=4096)
def _matrix_entries(theta: float, omega: float, r_tau: float, alpha: int) -> np.ndarray:
    st, ct = math.sin(theta), math.cos(theta)
    so, co = math.sin(omega), math.cos(omega)
    decay = math.exp(-r_tau)
    a = float(alpha)
    m = 0.5 * np.array(
        [
            [1.0, a * st * co * decay, -a * st * so * decay],
            [a * st, co * decay, -so * decay],
            [0.0, ct * so * decay, ct * co * decay],
        ]
    )
    m.setflags(write=False)
    return m


def evolving_matrix(params: ModelParams, alpha: int) -> EvolvingMatrix:
    """Combined precession + measurement propagator for outcome ``alpha``.

    With relaxation the precessed Bloch components decay by ``exp(-r_tau)``
    per interval while the probability weight is untouched.
    """
    alpha = _check_alpha(alpha)
    if not isinstance(params, ModelParams):
        raise ParameterError("params must be a ModelParams instance")
    return EvolvingMatrix(alpha, _matrix_entries(params.theta, params.omega, params.r_tau, alpha))


def propagators(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Return the raw ``(A_plus, A_minus)`` arrays for ``params``."""
    return (
        _matrix_entries(params.theta, params.omega, params.r_tau, 1),
        _matrix_entries(params.theta, params.omega, params.r_tau, -1),
    )


def step(p: StateVector, params: ModelParams, alpha: int) -> StateVector:
    """Apply one interval with outcome ``alpha``; the result is unnormalized."""
    return evolving_matrix(params, alpha) @ p


def branch_probability(p: StateVector, params: ModelParams, alpha: int) -> float:
    """Probability of outcome ``alpha`` conditioned on the current state ``p``."""
    if p.rho0 <= TOL:
        raise DegenerateStateError(f"state has no probability weight (rho0={p.rho0})")
    return step(p, params, alpha).rho0 / p.rho0
