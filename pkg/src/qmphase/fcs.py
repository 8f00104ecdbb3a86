"""Full counting statistics of the number of +1 outcomes.

The generating function ``Z(chi, N) = sum_n P(n, N) exp(i chi n)`` evolves
under the tilted propagator ``A_plus z + A_minus`` with ``z = exp(i chi)``.
Its first component is a degree-N polynomial in ``z``, so N+1 equispaced
samples on the unit circle determine the distribution exactly.  For small
theta and omega the tilted propagator has a closed-form spectrum, which
gives the limiting single- and double-binomial shapes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .core import X_UP, ModelParams, propagators
from .errors import ParameterError, PoleError

IMAG_TOL = 1e-10

LOCUS_COLUMNS = ("chi", "re_E1", "im_E1", "re_E2", "im_E2", "re_E3", "im_E3")


@dataclass(frozen=True, eq=False)
class TiltedGenerator:
    z: complex
    matrix: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SpectrumPoint:
    z: complex
    eigenvalues: tuple[complex, complex, complex]
    epsilon: complex


def tilted_propagator(params: ModelParams, chi) -> np.ndarray:
    """Exact ``A_plus exp(i chi) + A_minus``; broadcasts over an array of ``chi``."""
    a_plus, a_minus = propagators(params)
    z = np.exp(1j * np.asarray(chi, dtype=float))
    return z[..., None, None] * a_plus + a_minus


def exact_generating_function(params: ModelParams, chi) -> np.ndarray:
    """``(A_plus e^{i chi} + A_minus)^N p0``; shape ``(3,)`` or ``chi.shape + (3,)``.

    Component 0 is the generating function of the FM count distribution.
    """
    k = tilted_propagator(params, chi)
    vec = np.broadcast_to(params.initial.as_array().astype(complex), k.shape[:-1]).copy()
    for _ in range(params.n_meas):
        vec = np.einsum("...ij,...j->...i", k, vec)
    return vec


def unit_circle_chi(n_samples: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(n_samples) / n_samples


def invert_generating_function(samples, n: int) -> np.ndarray:
    """Recover ``P(0..n)`` from ``Z`` sampled at ``chi_m = 2 pi m / M``, ``M >= n+1``.

    Raises if the inverted values carry an imaginary part above 1e-10,
    which means the samples were not a generating function of real weights.
    """
    z = np.asarray(samples, dtype=complex)
    m = len(z)
    if m < n + 1:
        raise ParameterError(f"need at least N+1={n + 1} samples, got {m}")
    coeffs = np.fft.fft(z)[: n + 1] / m
    residue = float(np.abs(coeffs.imag).max())
    if residue > IMAG_TOL:
        raise ParameterError(f"inverted distribution has imaginary residue {residue:.3e}")
    return coeffs.real.copy()


def fcs_distribution(params: ModelParams) -> np.ndarray:
    """FM distribution via the exact generating function and Fourier inversion."""
    n = params.n_meas
    z0 = exact_generating_function(params, unit_circle_chi(n + 1))[:, 0]
    return invert_generating_function(z0, n)


# --------------------------------------------------------------------------
# small-angle tilted generator


def k_matrix(z: complex, theta: float, omega: float) -> TiltedGenerator:
    """Tilted generator linearized in theta and omega."""
    zp, zm = z + 1, z - 1
    m = 0.5 * np.array(
        [
            [zp, zm * theta, 0.0],
            [zm * theta, zp, -zp * omega],
            [0.0, zp * omega, zp],
        ],
        dtype=complex,
    )
    return TiltedGenerator(complex(z), m)


def epsilon(z: complex, theta: float, omega: float) -> complex:
    """Principal root of ``(z-1)^2 theta^2 - (z+1)^2 omega^2``."""
    return cmath.sqrt((z - 1) ** 2 * theta**2 - (z + 1) ** 2 * omega**2)


def k_eigenvalues(z: complex, theta: float, omega: float) -> SpectrumPoint:
    eps = epsilon(z, theta, omega)
    e3 = 0.5 * (z + 1)
    return SpectrumPoint(complex(z), (e3 + 0.5 * eps, e3 - 0.5 * eps, complex(e3)), eps)


def eigenvalue_locus(theta: float, omega: float, n_points: int = 256):
    """Rows ``(chi, re/im E1, E2, E3)`` for chi on [0, 2 pi)."""
    for chi in unit_circle_chi(n_points):
        e1, e2, e3 = k_eigenvalues(cmath.exp(1j * chi), theta, omega).eigenvalues
        yield (float(chi), e1.real, e1.imag, e2.real, e2.imag, e3.real, e3.imag)


def f_weight(z: complex, theta: float, omega: float) -> complex:
    if theta == 0.0:
        return 1.0 + 0.0j
    denom = (z - 1) * theta + (z + 1) * omega
    if abs(denom) <= 1e-14 * (theta + omega):
        raise PoleError(f"f_z has a pole at z={z} for theta={theta}, omega={omega}")
    return (z + 1) * omega / denom


def closed_form_z0(z: complex, theta: float, omega: float, n: int) -> complex:
    """Small-angle generating function for the initial state (1, 0, 1)."""
    f = f_weight(z, theta, omega)
    e1, e2, e3 = k_eigenvalues(z, theta, omega).eigenvalues
    return f * e3**n + 0.5 * (1 - f) * (e1**n + e2**n)


def closed_form_distribution(theta: float, omega: float, n: int) -> np.ndarray:
    """Fourier inversion of :func:`closed_form_z0` over N+1 unit-circle points.

    ``f_z`` is rational, so the result is only approximately a polynomial
    inversion; the imaginary parts are dropped without the strict check.
    """
    chi = unit_circle_chi(n + 1)
    z0 = np.array([closed_form_z0(cmath.exp(1j * c), theta, omega, n) for c in chi])
    return (np.fft.fft(z0)[: n + 1] / (n + 1)).real


# --------------------------------------------------------------------------
# limiting distributions


def _log_binom(n: int) -> np.ndarray:
    k = np.arange(n + 1)
    return np.array([math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1) for i in k])


def binomial_limit(n: int) -> np.ndarray:
    """Unpolarized limit (theta << omega): ``C(N, n) / 2**N``.

    Written with ``2**-N``: the contour integral of ``((z+1)/2)^N`` fixes
    the prefactor, and ``2**-n`` would not sum to one.
    """
    if n < 0:
        raise ParameterError(f"N must be >= 0, got {n}")
    return np.exp(_log_binom(n) - n * math.log(2.0))


def q_coefficients(theta: float, omega: float) -> tuple[float, float]:
    """Linear expansion ``epsilon(z) ~ q2 + q1 z`` near z = 0."""
    if theta <= omega:
        raise ParameterError(f"requires theta > omega, got theta={theta}, omega={omega}")
    root = math.sqrt(theta**2 - omega**2)
    return (theta**2 + omega**2) / root, root


def two_binomial_limit(theta: float, omega: float, n: int) -> np.ndarray:
    """Polarized limit (theta >> omega): mixture of two binomials, summed to one.

    The stationary-phase prefactor is only approximate at finite N, so the
    common ``2**-(N+1)`` factor is dropped and the result renormalized.
    """
    q1, q2 = q_coefficients(theta, omega)
    k = np.arange(n + 1)
    lb = _log_binom(n)

    def term(a: float, b: float):
        with np.errstate(divide="ignore"):
            logs = lb + k * np.log(abs(a)) + (n - k) * np.log(abs(b))
        sign = np.sign(a) ** k * np.sign(b) ** (n - k)
        return logs, sign

    l1, s1 = term(1 + q1, 1 - q2)
    l2, s2 = term(1 - q1, 1 + q2)
    shift = max(l1.max(), l2.max())
    p = s1 * np.exp(l1 - shift) + s2 * np.exp(l2 - shift)
    return p / p.sum()


def peak_positions(theta: float, omega: float, n: int) -> tuple[float, float]:
    """Locations of the two maxima of the polarized-limit distribution."""
    q1, q2 = q_coefficients(theta, omega)
    return n * (1 + q1) / (2 + q1 - q2), n * (1 - q1) / (2 - q1 + q2)


def default_initial_ok(params: ModelParams) -> bool:
    """Closed forms are derived for the sigma_x eigenstate only."""
    return params.initial == X_UP
