"""Heralded Hermite-excited squeezed vacuum: closed forms, Fock-basis oracle and sweeps.

>>> from hesvs import ConditionalState
>>> state = ConditionalState(0.0, 0.5, 2)
>>> round(state.mean_photon(), 12)
2.0
"""
from .analytic import ConditionalState, FockState, ObservableReport
from .exceptions import (
    DegreeOverflowError,
    ParameterError,
    UndefinedQError,
    UnsupportedOrderError,
    ZeroProbabilityError,
)
from .gridscan import GridSpec, SweepSpec, Table, ValidationReport, grid, q_region_map, sweep, validate
from .oracle import TruncationPolicy
from .params import DerivedParams, ModelParams, derive

__all__ = [
    "ConditionalState",
    "DegreeOverflowError",
    "DerivedParams",
    "FockState",
    "GridSpec",
    "ModelParams",
    "ObservableReport",
    "ParameterError",
    "SweepSpec",
    "Table",
    "TruncationPolicy",
    "UndefinedQError",
    "UnsupportedOrderError",
    "ValidationReport",
    "ZeroProbabilityError",
    "derive",
    "grid",
    "q_region_map",
    "sweep",
    "validate",
]
