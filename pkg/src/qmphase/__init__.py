"""Outcome statistics of a precessing qubit under sequential measurement."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    MIXED,
    X_UP,
    Z_UP,
    EvolvingMatrix,
    ModelParams,
    StateVector,
    branch_probability,
    evolving_matrix,
    precess,
    step,
)
from .dp import AFM, FM, ConditionedDistribution, afm_distribution, fm_distribution  # noqa: E402

__all__ = [
    "AFM",
    "FM",
    "MIXED",
    "X_UP",
    "Z_UP",
    "ConditionedDistribution",
    "EvolvingMatrix",
    "ModelParams",
    "StateVector",
    "afm_distribution",
    "branch_probability",
    "evolving_matrix",
    "fm_distribution",
    "precess",
    "step",
]
