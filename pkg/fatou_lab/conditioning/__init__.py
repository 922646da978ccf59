from .kernel import ConditionedKernel, h_transition
from .simulate import (
    CappedVisits,
    ConditionedSimulator,
    ConstantOne,
    ReturnIndicator,
    desintegration_check,
    sample_boundary_points,
    simulate_conditioned,
)

__all__ = [
    "ConditionedKernel",
    "h_transition",
    "CappedVisits",
    "ConditionedSimulator",
    "ConstantOne",
    "ReturnIndicator",
    "desintegration_check",
    "sample_boundary_points",
    "simulate_conditioned",
]
