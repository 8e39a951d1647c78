"""No-signaling limits on universal covariant quantum deletion machines."""

from .constraints import ConstraintProfile, ConstraintReport, feasibility_report
from .errors import (
    InvalidParams,
    NoConvergence,
    NoFeasiblePoint,
    NonHermitianInput,
    NormalizationError,
    NotNormalized,
    ParseError,
    TrialsOverflow,
)
from .machine import FidelityPair, InputDirection, MachineParams, OutputLabel
from .optimizer import (
    FixedFidelity,
    OptimizationResult,
    OptimizerConfig,
    SweepPoint,
    maximize_sum,
    maximize_with_fixed,
    sweep,
)
from .qop import BlochVector, PauliOp

__all__ = [
    "BlochVector",
    "ConstraintProfile",
    "ConstraintReport",
    "FidelityPair",
    "FixedFidelity",
    "InputDirection",
    "InvalidParams",
    "MachineParams",
    "NoConvergence",
    "NoFeasiblePoint",
    "NonHermitianInput",
    "NormalizationError",
    "NotNormalized",
    "OptimizationResult",
    "OptimizerConfig",
    "OutputLabel",
    "ParseError",
    "PauliOp",
    "SweepPoint",
    "TrialsOverflow",
    "feasibility_report",
    "maximize_sum",
    "maximize_with_fixed",
    "sweep",
]
