"""
Fatou Lab
Random walks on hyperbolic groups and the boundary behaviour of their harmonic functions
"""

__version__ = "0.1.0"

from fatou_lab.service import COMMANDS, LabService, RunOutcome
from fatou_lab.core.schemas import (
    ExperimentConfig,
    GroupSpec,
    StepSpec,
    RunReport,
    RunMetadata,
    LabStats,
)
from fatou_lab.core.exceptions import (
    FatouLabError,
    ConfigurationError,
    PreconditionFailed,
    BudgetExceeded,
)

__all__ = [
    "COMMANDS",
    "LabService",
    "RunOutcome",
    "ExperimentConfig",
    "GroupSpec",
    "StepSpec",
    "RunReport",
    "RunMetadata",
    "LabStats",
    "FatouLabError",
    "ConfigurationError",
    "PreconditionFailed",
    "BudgetExceeded",
]
