"""Phase classification over the (theta, omega) plane.

A point is polarized (PL) when the FM distribution peaks away from
M_F = 0, anti-polarized (APL) when the AFM distribution peaks away from
M_AF = 0, and unpolarized (UPL) when both peak at zero.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import X_UP, ModelParams, StateVector
from .dp import ConditionedDistribution, afm_distribution, fm_distribution
from .errors import ParameterError, QmphaseError, ResolutionError

PL, UPL, APL = "PL", "UPL", "APL"
KINDS = {"PL-UPL": (PL, UPL), "UPL-APL": (UPL, APL)}

DIAGRAM_COLUMNS = ("theta", "omega", "label", "fm_argmax", "afm_argmax", "conflict")
BOUNDARY_COLUMNS = ("theta", "omega_boundary", "kind")


@dataclass(frozen=True)
class PhaseLabel:
    label: str
    fm_argmax: float
    afm_argmax: float
    conflict: bool = False


def classify(fm: ConditionedDistribution, afm: ConditionedDistribution) -> PhaseLabel:
    """Label a point from its FM and AFM distributions.

    If both peak away from zero the larger |order parameter| wins (ties go
    to PL) and ``conflict`` is set.
    """
    if fm.kind != "FM" or afm.kind != "AFM":
        raise ParameterError("classify expects an FM and an AFM distribution")
    if fm.n_meas != afm.n_meas or (
        fm.params is not None and afm.params is not None and fm.params != afm.params
    ):
        raise ParameterError("FM and AFM distributions come from different parameters")
    m_f, m_af = fm.argmax_order(), afm.argmax_order()
    polarized = fm.argmax() != fm.zero_index
    anti = afm.argmax() != afm.zero_index
    if polarized and anti:
        label = PL if abs(m_f) >= abs(m_af) else APL
        return PhaseLabel(label, m_f, m_af, conflict=True)
    if polarized:
        return PhaseLabel(PL, m_f, m_af)
    if anti:
        return PhaseLabel(APL, m_f, m_af)
    return PhaseLabel(UPL, m_f, m_af)


def classify_params(params: ModelParams) -> PhaseLabel:
    return classify(fm_distribution(params), afm_distribution(params))


def classify_point(
    theta: float,
    omega: float,
    n_meas: int,
    initial: StateVector = X_UP,
    r_tau: float = 0.0,
) -> PhaseLabel:
    try:
        params = ModelParams(theta, omega, r_tau, n_meas, initial)
        return classify_params(params)
    except QmphaseError as exc:
        raise type(exc)(f"at theta={theta!r}, omega={omega!r}: {exc}") from exc


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    theta_grid: np.ndarray
    omega_grid: np.ndarray
    labels: tuple[tuple[PhaseLabel, ...], ...] = field(repr=False)
    n_meas: int
    initial: StateVector = X_UP
    r_tau: float = 0.0

    def __post_init__(self):
        for name in ("theta_grid", "omega_grid"):
            grid = np.array(getattr(self, name), dtype=float)
            if grid.ndim != 1 or len(grid) == 0 or np.any(np.diff(grid) <= 0):
                raise ParameterError(f"{name} must be a non-empty, strictly increasing 1-D grid")
            grid.setflags(write=False)
            object.__setattr__(self, name, grid)
        labels = tuple(tuple(row) for row in self.labels)
        if len(labels) != len(self.theta_grid) or any(
            len(row) != len(self.omega_grid) for row in labels
        ):
            raise ParameterError("label array does not match the grid dimensions")
        object.__setattr__(self, "labels", labels)

    def label_array(self) -> np.ndarray:
        return np.array([[lab.label for lab in row] for row in self.labels])

    def rows(self):
        for theta, row in zip(self.theta_grid, self.labels):
            for omega, lab in zip(self.omega_grid, row):
                yield (float(theta), float(omega), lab.label, lab.fm_argmax, lab.afm_argmax, lab.conflict)


def _row_task(args) -> list[PhaseLabel]:
    theta, omegas, n_meas, initial, r_tau = args
    return [classify_point(theta, w, n_meas, initial, r_tau) for w in omegas]


def _run(func, tasks: list, workers: int) -> list:
    # results are always assembled in task order
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, tasks))
    return [func(t) for t in tasks]


def sweep(
    theta_grid: Sequence[float],
    omega_grid: Sequence[float],
    n_meas: int,
    initial: StateVector = X_UP,
    r_tau: float = 0.0,
    workers: int = 1,
) -> PhaseDiagram:
    """Classify every grid point; rows are distributed over ``workers`` processes."""
    thetas = [float(t) for t in theta_grid]
    omegas = [float(w) for w in omega_grid]
    tasks = [(t, omegas, n_meas, initial, r_tau) for t in thetas]
    labels = _run(_row_task, tasks, workers)
    return PhaseDiagram(np.array(thetas), np.array(omegas), labels, n_meas, initial, r_tau)


def default_grid(size: int = 157) -> tuple[np.ndarray, np.ndarray]:
    """Grid over [0.02, pi/2] x [0.02, pi], avoiding the degenerate edges."""
    return np.linspace(0.02, math.pi / 2, size), np.linspace(0.02, math.pi, size)


def _first_transition(labels: Sequence[str], pair: tuple[str, str]) -> int | None:
    """Index j of the first adjacent (labels[j-1], labels[j]) equal to ``pair`` in either order."""
    wanted = {pair, pair[::-1]}
    for j in range(1, len(labels)):
        if (labels[j - 1], labels[j]) in wanted:
            return j
    return None


def extract_boundary(
    diagram: PhaseDiagram, kind: str, along: str = "omega"
) -> list[tuple[float, float]]:
    """Boundary points ``(theta, omega)`` at the first transition of ``kind``.

    With ``along="omega"`` each theta row is scanned in increasing omega and
    the boundary omega is the midpoint of the bracketing interval; with
    ``along="theta"`` each omega column is scanned instead.  Rows without
    the transition are skipped.
    """
    pair = _kind_pair(kind)
    labels = diagram.label_array()
    out = []
    if along == "omega":
        for i, theta in enumerate(diagram.theta_grid):
            j = _first_transition(labels[i], pair)
            if j is not None:
                w = diagram.omega_grid
                out.append((float(theta), 0.5 * float(w[j - 1] + w[j])))
    elif along == "theta":
        for j, omega in enumerate(diagram.omega_grid):
            i = _first_transition(labels[:, j], pair)
            if i is not None:
                t = diagram.theta_grid
                out.append((0.5 * float(t[i - 1] + t[i]), float(omega)))
    else:
        raise ParameterError(f"along must be 'omega' or 'theta', got {along!r}")
    return out


def _kind_pair(kind: str) -> tuple[str, str]:
    try:
        return KINDS[kind]
    except KeyError:
        raise ParameterError(f"kind must be one of {sorted(KINDS)}, got {kind!r}") from None


def bisect_boundary(
    predicate,
    lo: float,
    hi: float,
    resolution: float,
) -> float | None:
    """Midpoint of the final bracket where ``predicate`` changes value, or None."""
    p_lo, p_hi = predicate(lo), predicate(hi)
    if p_lo == p_hi:
        return None
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if predicate(mid) == p_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _bisect_task(args):
    fixed, along, kind, n_meas, initial, r_tau, lo, hi, resolution = args
    target = PL if kind == "PL-UPL" else APL

    if along == "omega":
        def predicate(x):
            return classify_point(fixed, x, n_meas, initial, r_tau).label == target
    else:
        def predicate(x):
            return classify_point(x, fixed, n_meas, initial, r_tau).label == target

    return bisect_boundary(predicate, lo, hi, resolution)


def scan_boundary(
    fixed_values: Sequence[float],
    kind: str,
    n_meas: int,
    along: str = "omega",
    bracket: tuple[float, float] | None = None,
    resolution: float = 0.01,
    initial: StateVector = X_UP,
    r_tau: float = 0.0,
    workers: int = 1,
) -> list[tuple[float, float]]:
    """Locate a boundary by bisection, one line of the plane at a time.

    ``along="omega"``: for each theta in ``fixed_values`` bisect in omega
    (default bracket [0, pi]).  ``along="theta"``: for each omega bisect in
    theta (default bracket [0, pi/2]).  Bisection assumes the relevant
    phase occupies one side of the bracket; lines where the end points
    agree are skipped.  Returns ``(theta, omega)`` pairs.
    """
    _kind_pair(kind)
    if along == "omega":
        lo, hi = bracket or (0.0, math.pi)
    elif along == "theta":
        lo, hi = bracket or (0.0, math.pi / 2)
    else:
        raise ParameterError(f"along must be 'omega' or 'theta', got {along!r}")
    if resolution <= 0:
        raise ParameterError(f"resolution must be positive, got {resolution}")
    fixed = [float(v) for v in fixed_values]
    tasks = [(v, along, kind, n_meas, initial, r_tau, lo, hi, resolution) for v in fixed]
    found = _run(_bisect_task, tasks, workers)
    out = []
    for v, b in zip(fixed, found):
        if b is not None:
            out.append((v, b) if along == "omega" else (b, v))
    return out


def oscillation_period(
    boundary: Sequence[tuple[float, float]], axis: str = "theta", min_cycles: int = 3
) -> float:
    """Dominant period of the wiggle on a boundary curve.

    ``axis`` names the independent coordinate (``"theta"`` for per-row
    boundaries, ``"omega"`` for per-column ones).  The curve is detrended by
    a least-squares line and the period is twice the mean spacing of the
    residual's zero crossings.
    """
    pts = np.asarray(boundary, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ParameterError("boundary must be a sequence of (theta, omega) pairs")
    if axis == "theta":
        x, y = pts[:, 0], pts[:, 1]
    elif axis == "omega":
        x, y = pts[:, 1], pts[:, 0]
    else:
        raise ParameterError(f"axis must be 'theta' or 'omega', got {axis!r}")
    order = np.argsort(x)
    x, y = x[order], y[order]
    if len(x) < 4:
        raise ResolutionError(f"need at least 4 boundary points, got {len(x)}")
    resid = y - np.polyval(np.polyfit(x, y, 1), x)
    s = np.sign(resid)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    crossings = x[idx] - resid[idx] * (x[idx + 1] - x[idx]) / (resid[idx + 1] - resid[idx])
    if len(crossings) < 2 * min_cycles:
        raise ResolutionError(
            f"only {len(crossings)} zero crossings resolved; need {2 * min_cycles} "
            f"for {min_cycles} cycles"
        )
    return 2.0 * (crossings[-1] - crossings[0]) / (len(crossings) - 1)
