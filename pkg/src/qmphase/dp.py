"""Exact outcome-count distributions by dynamic programming.

Rather than summing over all 2^N outcome records, the conditioned state
vectors are binned by the statistic of interest and pushed forward one
measurement (FM) or one two-site cell (AFM) at a time.  Cost is O(N^2)
3x3 matrix-vector products and O(N) memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TOL, ModelParams, propagators
from .errors import NumericError, ParameterError

FM = "FM"
AFM = "AFM"

CSV_COLUMNS = ("order_param", "probability", "rho0", "rhoz", "rhox")


@dataclass(frozen=True, eq=False)
class ConditionedDistribution:
    """Conditioned state vectors binned by an outcome count.

    ``table[i]`` is the summed (unnormalized) state vector of all records
    whose count equals ``counts[i]``.  For ``FM`` the count is the number of
    +1 outcomes (0..N); for ``AFM`` it is ``n_A = #(+1,-1) cells - #(-1,+1)
    cells`` over the N/2 cells, stored with offset N/2.
    """

    kind: str
    n_meas: int
    table: np.ndarray = field(repr=False)
    params: ModelParams | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in (FM, AFM):
            raise ParameterError(f"kind must be FM or AFM, got {self.kind!r}")
        table = np.array(self.table, dtype=np.float64)
        if table.ndim == 1:
            table = np.column_stack([table, np.zeros_like(table), np.zeros_like(table)])
        if table.shape != (self.n_meas + 1, 3):
            raise ParameterError(
                f"table shape {table.shape} does not match N={self.n_meas}"
            )
        worst = table[:, 0].min()
        if worst < -TOL:
            raise NumericError(
                f"{self.kind} probability {worst:.3e} below -{TOL:g}; "
                "this indicates a propagation bug, not roundoff"
            )
        table[:, 0] = np.maximum(table[:, 0], 0.0)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def counts(self) -> np.ndarray:
        if self.kind == FM:
            return np.arange(self.n_meas + 1)
        half = self.n_meas // 2
        return np.arange(-half, half + 1)

    @property
    def order_param(self) -> np.ndarray:
        if self.kind == FM:
            return (2.0 * self.counts - self.n_meas) / self.n_meas
        return self.counts / (self.n_meas / 2)

    @property
    def probabilities(self) -> np.ndarray:
        return self.table[:, 0]

    @property
    def zero_index(self) -> int:
        """Row index of the zero-order-parameter bin."""
        return self.n_meas // 2

    def total(self) -> float:
        return float(self.probabilities.sum())

    def argmax(self, tol: float = TOL) -> int:
        """Row index of the most probable bin.

        A maximum shared (within ``tol``) with the zero bin resolves to the
        zero bin; other ties resolve to the lowest index.
        """
        p = self.probabilities
        best = int(np.argmax(p))
        if p[self.zero_index] >= p[best] - tol:
            return self.zero_index
        return best

    def argmax_order(self) -> float:
        return float(self.order_param[self.argmax()])

    def rows(self):
        for m, vec in zip(self.order_param, self.table):
            yield (float(m), float(vec[0]), float(vec[0]), float(vec[1]), float(vec[2]))


def _initial(params: ModelParams) -> np.ndarray:
    return params.initial.as_array()


def fm_distribution(params: ModelParams) -> ConditionedDistribution:
    """Distribution of the number of +1 outcomes after ``params.n_meas`` steps."""
    if not isinstance(params, ModelParams):
        raise ParameterError("params must be a ModelParams instance")
    a_plus, a_minus = propagators(params)
    n = params.n_meas
    cur = np.zeros((n + 1, 3))
    cur[0] = _initial(params)
    nxt = np.empty_like(cur)
    for k in range(n):
        # after k steps only rows 0..k are populated
        live = cur[: k + 1]
        nxt[: k + 1] = live @ a_minus.T
        nxt[k + 1] = 0.0
        nxt[1 : k + 2] += live @ a_plus.T
        cur, nxt = nxt, cur
    return ConditionedDistribution(FM, n, cur, params)


def cell_propagators(params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Two-step propagators ``(same, up_down, down_up)`` for one AFM cell.

    Products are time ordered right to left, so ``up_down`` (first outcome
    +1, second -1) is ``A_minus @ A_plus``.
    """
    a_plus, a_minus = propagators(params)
    same = a_plus @ a_plus + a_minus @ a_minus
    return same, a_minus @ a_plus, a_plus @ a_minus


def afm_distribution(params: ModelParams) -> ConditionedDistribution:
    """Distribution of ``n_A`` over the N/2 consecutive two-site cells."""
    if not isinstance(params, ModelParams):
        raise ParameterError("params must be a ModelParams instance")
    n = params.n_meas
    if n % 2:
        raise ParameterError(f"n must be even for the AFM distribution, got {n}")
    same, up_down, down_up = cell_propagators(params)
    half = n // 2
    cur = np.zeros((n + 1, 3))
    cur[half] = _initial(params)
    nxt = np.empty_like(cur)
    for k in range(half):
        lo, hi = half - k, half + k + 1  # populated rows after k cells
        live = cur[lo:hi]
        nxt[lo - 1 : hi + 1] = 0.0
        nxt[lo:hi] = live @ same.T
        nxt[lo + 1 : hi + 1] += live @ up_down.T
        nxt[lo - 1 : hi - 1] += live @ down_up.T
        cur, nxt = nxt, cur
    return ConditionedDistribution(AFM, n, cur, params)


def total_variation(p, q) -> float:
    """Total-variation distance between two distributions on the same bins."""
    p = p.probabilities if isinstance(p, ConditionedDistribution) else np.asarray(p, dtype=float)
    q = q.probabilities if isinstance(q, ConditionedDistribution) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ParameterError(f"distribution shapes differ: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())
