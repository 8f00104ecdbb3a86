"""Independent reference implementations used to check the DP and FCS code.

Everything here is either exponential-cost enumeration (small N only),
Monte Carlo over normalized trajectories, or a closed form that holds in a
limit (projective measurement, weak measurement).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ModelParams, StateVector, check_angles, propagators
from .dp import AFM, FM, ConditionedDistribution
from .errors import ParameterError, SizeLimitError

MAX_ENUMERATION = 20

#: Recorded in Monte Carlo output so a run can be reproduced elsewhere.
RNG_DESCRIPTION = "numpy Philox4x64, key=(seed<<64)|trajectory_index, one uniform per step"

MC_COLUMNS = ("order_param", "probability", "count", "n_traj", "seed")


def _check_size(n: int) -> None:
    if n > MAX_ENUMERATION:
        raise SizeLimitError(f"enumeration limited to N <= {MAX_ENUMERATION}, got {n}")
    if n < 1:
        raise ParameterError(f"N must be >= 1, got {n}")


# --------------------------------------------------------------------------
# brute force over outcome records


def enumerate_records(params: ModelParams, n: int | None = None):
    """All ``2**n`` outcome records with their final conditioned vectors.

    Returns ``(outcomes, vectors)`` where ``outcomes[r, k]`` is the k-th
    outcome (+1/-1) of record ``r`` and ``vectors[r]`` is
    ``A[alpha_n] ... A[alpha_1] p0``.  ``n`` defaults to ``params.n_meas``
    and may be odd.
    """
    n = params.n_meas if n is None else int(n)
    _check_size(n)
    a_plus, a_minus = propagators(params)
    vectors = params.initial.as_array()[None, :]
    outcomes = np.zeros((1, 0), dtype=np.int8)
    for _ in range(n):
        m = len(vectors)
        vectors = np.concatenate([vectors @ a_plus.T, vectors @ a_minus.T])
        col = np.concatenate([np.ones(m, dtype=np.int8), -np.ones(m, dtype=np.int8)])
        outcomes = np.column_stack([np.tile(outcomes, (2, 1)), col])
    return outcomes, vectors


def _bin(index: np.ndarray, vectors: np.ndarray, size: int) -> np.ndarray:
    table = np.zeros((size, 3))
    np.add.at(table, index, vectors)
    return table


def afm_index(outcomes: np.ndarray) -> np.ndarray:
    """``n_A`` of each record: +1 per (+1,-1) cell, -1 per (-1,+1) cell."""
    first, second = outcomes[:, 0::2].astype(int), outcomes[:, 1::2].astype(int)
    return ((first - second) // 2).sum(axis=1)


def brute_force_fm(params: ModelParams) -> ConditionedDistribution:
    outcomes, vectors = enumerate_records(params)
    n_up = (outcomes == 1).sum(axis=1)
    return ConditionedDistribution(FM, params.n_meas, _bin(n_up, vectors, params.n_meas + 1), params)


def brute_force_afm(params: ModelParams) -> ConditionedDistribution:
    outcomes, vectors = enumerate_records(params)
    n = params.n_meas
    idx = afm_index(outcomes) + n // 2
    return ConditionedDistribution(AFM, n, _bin(idx, vectors, n + 1), params)


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True, eq=False)
class SampleResult:
    params: ModelParams
    n_traj: int
    seed: int
    fm_counts: np.ndarray = field(repr=False)
    afm_counts: np.ndarray = field(repr=False)
    generator: str = RNG_DESCRIPTION

    def fm_histogram(self) -> np.ndarray:
        return self.fm_counts / self.n_traj

    def afm_histogram(self) -> np.ndarray:
        return self.afm_counts / self.n_traj

    def rows(self, kind: str):
        n = self.params.n_meas
        if kind == FM:
            counts, order = self.fm_counts, (2.0 * np.arange(n + 1) - n) / n
        else:
            counts, order = self.afm_counts, np.arange(-(n // 2), n // 2 + 1) / (n / 2)
        for m, c in zip(order, counts):
            yield (float(m), int(c) / self.n_traj, int(c), self.n_traj, self.seed)


def trajectory_uniforms(seed: int, start: int, stop: int, n_steps: int) -> np.ndarray:
    """Uniform draws for trajectories ``start..stop-1``; row i depends only on (seed, i)."""
    out = np.empty((stop - start, n_steps))
    for row, traj in enumerate(range(start, stop)):
        gen = np.random.Generator(np.random.Philox(key=(seed << 64) | traj))
        out[row] = gen.random(n_steps)
    return out


def _simulate_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    params, seed, start, stop = args
    n = params.n_meas
    a_plus, a_minus = propagators(params)
    u = trajectory_uniforms(seed, start, stop, n)
    m = stop - start
    state = np.tile(params.initial.as_array(), (m, 1))
    n_up = np.zeros(m, dtype=np.int64)
    n_a = np.zeros(m, dtype=np.int64)
    prev_up = np.zeros(m, dtype=bool)
    for k in range(n):
        up_state = state @ a_plus.T
        down_state = state @ a_minus.T
        # state is normalized (rho0 == 1), so up_state[:, 0] is P(+1)
        up = u[:, k] < up_state[:, 0]
        new = np.where(up[:, None], up_state, down_state)
        state = new / new[:, :1]
        n_up += up
        if k % 2:
            n_a += (prev_up & ~up).astype(np.int64) - (~prev_up & up).astype(np.int64)
        prev_up = up
    fm = np.bincount(n_up, minlength=n + 1)
    afm = np.bincount(n_a + n // 2, minlength=n + 1)
    return fm, afm


def monte_carlo_sample(
    params: ModelParams,
    n_traj: int,
    seed: int,
    workers: int = 1,
    chunk: int = 8192,
) -> SampleResult:
    """Sample ``n_traj`` measurement records by sequential normalized collapse.

    Each trajectory owns a counter-based random stream keyed by
    ``(seed, index)``, so the histograms do not depend on ``workers`` or
    ``chunk``.
    """
    if n_traj < 1:
        raise ParameterError(f"n_traj must be >= 1, got {n_traj}")
    if not 0 <= seed < 2**64:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    tasks = [(params, seed, s, min(s + chunk, n_traj)) for s in range(0, n_traj, chunk)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_chunk, tasks))
    else:
        parts = [_simulate_chunk(t) for t in tasks]
    fm = np.sum([p[0] for p in parts], axis=0)
    afm = np.sum([p[1] for p in parts], axis=0)
    return SampleResult(params, n_traj, seed, fm, afm)


# --------------------------------------------------------------------------
# projective limit


def projective_distribution(omega: float, p0: StateVector, n: int) -> ConditionedDistribution:
    """Exact FM distribution for projective measurement (theta = pi/2).

    The record is a two-state Markov chain: the next outcome repeats the
    previous one with probability (1 + cos omega)/2.  The first outcome is
    drawn from the precessed initial state.  After a projective outcome the
    conditioned vector is ``weight * (1, alpha, 0)``, so the full table is
    recovered from the chain weights.
    """
    check_angles(math.pi / 2, omega)
    if n < 1:
        raise ParameterError(f"N must be >= 1, got {n}")
    c = math.cos(omega)
    stay, flip = 0.5 * (1.0 + c), 0.5 * (1.0 - c)
    rhoz_tau = p0.rhoz * c - p0.rhox * math.sin(omega)
    # w_up[k] / w_down[k]: weight of records with k ups whose last outcome is +1 / -1
    w_up = np.zeros(n + 1)
    w_down = np.zeros(n + 1)
    w_up[1] = 0.5 * (p0.rho0 + rhoz_tau)
    w_down[0] = 0.5 * (p0.rho0 - rhoz_tau)
    for _ in range(n - 1):
        new_up = np.zeros(n + 1)
        new_up[1:] = stay * w_up[:-1] + flip * w_down[:-1]
        new_down = flip * w_up + stay * w_down
        w_up, w_down = new_up, new_down
    table = np.column_stack([w_up + w_down, w_up - w_down, np.zeros(n + 1)])
    return ConditionedDistribution(FM, n, table)


# --------------------------------------------------------------------------
# Ising mappings


@dataclass(frozen=True, eq=False)
class IsingSpec:
    """Classical Ising chain whose Gibbs weight is ``exp(sum_{j<k} J_jk s_j s_k)``.

    Couplings already include the inverse temperature.  ``beta_j`` is set
    for a nearest-neighbour chain, ``couplings`` for an arbitrary matrix.
    """

    n_sites: int
    beta_j: float | None = None
    couplings: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.beta_j is None) == (self.couplings is None):
            raise ParameterError("give exactly one of beta_j or couplings")
        if self.couplings is not None:
            j = np.array(self.couplings, dtype=float)
            if j.shape != (self.n_sites, self.n_sites):
                raise ParameterError(f"coupling matrix must be {self.n_sites}x{self.n_sites}")
            if not np.allclose(j, j.T, atol=0.0, rtol=0.0) or np.any(np.diag(j) != 0.0):
                raise ParameterError("coupling matrix must be symmetric with zero diagonal")
            j.setflags(write=False)
            object.__setattr__(self, "couplings", j)


def nn_coupling(omega: float) -> float:
    """Effective beta*J of the nearest-neighbour chain: tanh(beta*J) = cos(omega)."""
    if not 0.0 < omega < math.pi:
        raise ParameterError(f"beta*J is infinite at omega={omega}; omega must lie in (0, pi)")
    return math.atanh(math.cos(omega))


def gibbs_nn_fm(spec: IsingSpec) -> np.ndarray:
    """FM marginal of a nearest-neighbour chain with free ends, by transfer sums."""
    k = spec.beta_j
    n = spec.n_sites
    w_same, w_diff = math.exp(k), math.exp(-k)
    z_up = np.zeros(n + 1)
    z_down = np.zeros(n + 1)
    z_up[1] = 1.0
    z_down[0] = 1.0
    for _ in range(n - 1):
        new_up = np.zeros(n + 1)
        new_up[1:] = w_same * z_up[:-1] + w_diff * z_down[:-1]
        new_down = w_diff * z_up + w_same * z_down
        scale = max(new_up.max(), new_down.max())
        z_up, z_down = new_up / scale, new_down / scale
    z = z_up + z_down
    return z / z.sum()


def ising_nn_distribution(omega: float, n: int) -> ConditionedDistribution:
    """Gibbs FM marginal of the nearest-neighbour chain equivalent to projective records.

    At omega = 0 and omega = pi the coupling is infinite; those chains are
    perfectly frozen or perfectly alternating and are returned directly.
    """
    check_angles(0.0, omega)
    if n < 1:
        raise ParameterError(f"N must be >= 1, got {n}")
    probs = np.zeros(n + 1)
    if omega == 0.0:
        probs[0] = probs[n] = 0.5
    elif omega == math.pi:
        probs[n // 2] += 0.5
        probs[(n + 1) // 2] += 0.5
    else:
        probs = gibbs_nn_fm(IsingSpec(n, beta_j=nn_coupling(omega)))
    return ConditionedDistribution(FM, n, probs)


def coupling_profile(theta: float, omega: float, n: int) -> tuple[np.ndarray, float]:
    """Long-range couplings ``theta^2 cos((|k-j|-1) omega)`` and the period of J_1N in omega."""
    if n < 3:
        raise ParameterError(f"N must be >= 3, got {n}")
    d = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    j = theta**2 * np.cos((d - 1) * omega)
    np.fill_diagonal(j, 0.0)
    return j, 2.0 * math.pi / (n - 2)


def gibbs_enumerate_fm(spec: IsingSpec, chunk_bits: int = 16) -> np.ndarray:
    """FM marginal of an arbitrary-coupling chain by enumerating all 2^N configurations."""
    n = spec.n_sites
    _check_size(n)
    j = spec.couplings
    total = 1 << n
    chunk = 1 << min(chunk_bits, n)
    bits = np.arange(n, dtype=np.int64)
    log_w = np.empty(total)
    n_up = np.empty(total, dtype=np.int64)
    for start in range(0, total, chunk):
        codes = np.arange(start, start + chunk, dtype=np.int64)
        up = (codes[:, None] >> bits) & 1
        spins = 2.0 * up - 1.0
        log_w[start : start + chunk] = 0.5 * np.einsum("cj,jk,ck->c", spins, j, spins)
        n_up[start : start + chunk] = up.sum(axis=1)
    w = np.exp(log_w - log_w.max())
    marginal = np.bincount(n_up, weights=w, minlength=n + 1)
    return marginal / marginal.sum()


def long_range_gibbs(theta: float, omega: float, n: int) -> ConditionedDistribution:
    """FM marginal of the weak-measurement long-range Ising chain, normalized exactly."""
    check_angles(theta, omega)
    _check_size(n)
    j, _ = coupling_profile(theta, omega, n)
    return ConditionedDistribution(FM, n, gibbs_enumerate_fm(IsingSpec(n, couplings=j)))
