from .schemas import (
    GroupKind,
    GroupSpec,
    StepSpec,
    StepKind,
    Budgets,
    ExperimentConfig,
    DeltaMethod,
    GreenMethod,
    TubeVerdict,
    StopKind,
)
from .exceptions import (
    FatouLabError,
    ConfigurationError,
    UnknownGenerator,
    SmallCancellationViolation,
    PreconditionFailed,
    BudgetExceeded,
    NotGenerating,
    StepBudgetExceeded,
    NeverExited,
    OutOfTabulatedRange,
    SolverFailure,
    DivisionUnstable,
    NotStabilized,
    DegenerateRow,
    InvalidRay,
    CheckFailed,
    NonHyperbolicWarning,
)
from .constants import (
    NOT_WITHIN_LIMIT,
    INFINITY,
    Unbounded,
)
from .numbers import HalfInt

__all__ = [
    "GroupKind",
    "GroupSpec",
    "StepSpec",
    "StepKind",
    "Budgets",
    "ExperimentConfig",
    "DeltaMethod",
    "GreenMethod",
    "TubeVerdict",
    "StopKind",
    "FatouLabError",
    "ConfigurationError",
    "UnknownGenerator",
    "SmallCancellationViolation",
    "PreconditionFailed",
    "BudgetExceeded",
    "NotGenerating",
    "StepBudgetExceeded",
    "NeverExited",
    "OutOfTabulatedRange",
    "SolverFailure",
    "DivisionUnstable",
    "NotStabilized",
    "DegenerateRow",
    "InvalidRay",
    "CheckFailed",
    "NonHyperbolicWarning",
    "NOT_WITHIN_LIMIT",
    "INFINITY",
    "Unbounded",
    "HalfInt",
]
