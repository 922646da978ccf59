import os
from contextlib import contextmanager
from pathlib import Path
from typing import TYPE_CHECKING, Iterator
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field
from enum import Enum

if TYPE_CHECKING:
    from fatou_lab.core.schemas import Budgets

# Absolute path of the fatou_lab package
BASE_DIR = Path(__file__).resolve().parent


class SolverChoice(str, Enum):
    AUTO = "auto"
    SPARSE = "sparse"
    TREE = "tree"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="FATOU_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",  # .env may carry unrelated variables
    )

    # Reproducibility
    default_seed: int = Field(default=20240601)
    workers: int = Field(default=0)  # 0 = available parallelism

    # Budgets
    ball_element_budget: int = Field(default=250_000)
    step_cap: int = Field(default=10_000_000)
    trajectory_budget: int = Field(default=1_000_000)

    # Hyperbolicity estimation
    delta_radius: int = Field(default=3)
    delta_quadruple_budget: int = Field(default=20_000_000_000)
    delta_sample_count: int = Field(default=100_000)

    # Linear solves
    solver: SolverChoice = Field(default=SolverChoice.AUTO)
    solver_tolerance: float = Field(default=1e-12)
    solver_max_iterations: int = Field(default=200_000)

    # Martin kernels and conditioning
    renorm_tolerance: float = Field(default=1e-6)
    martin_margin: int = Field(default=10)
    conditioning_depth_margin: int = Field(default=10)
    stabilization_tolerance: float = Field(default=1e-6)

    # Admissibility
    admissibility_l_cap: int = Field(default=8)

    # Output
    log_level: str = Field(default="INFO")
    log_json: bool = Field(default=True)
    output_dir: str = Field(default="runs")
    template_dir: str = Field(default=str(BASE_DIR / "renderer" / "templates"))

    def worker_count(self) -> int:
        if self.workers > 0:
            return self.workers
        return os.cpu_count() or 1


settings = Settings()


@contextmanager
def applied_budgets(budgets: "Budgets") -> Iterator[None]:
    """Install a run's budgets on this process's settings for the duration of the block"""
    saved = (settings.ball_element_budget, settings.step_cap, settings.trajectory_budget)
    settings.ball_element_budget = budgets.ball_elements
    settings.step_cap = budgets.steps
    settings.trajectory_budget = budgets.trajectories
    try:
        yield
    finally:
        settings.ball_element_budget, settings.step_cap, settings.trajectory_budget = saved
