from .rng import Purpose, RngStream, UniformFeed
from .distribution import StepDistribution, check_generating, point_mass, simple_random_walk, validate
from .engine import (
    ExitBall,
    FirstOf,
    FixedSteps,
    StopRule,
    Trajectory,
    exit_index,
    exit_proxy,
    simulate,
    step,
    stopping_time_Tm,
    thickened_sup,
)
from .batch import PlainSimulator, map_trajectories, simulate_batch, write_jsonl
from .markov import ExitThenStep, strong_markov_check

__all__ = [
    "Purpose",
    "RngStream",
    "UniformFeed",
    "StepDistribution",
    "check_generating",
    "point_mass",
    "simple_random_walk",
    "validate",
    "ExitBall",
    "FirstOf",
    "FixedSteps",
    "StopRule",
    "Trajectory",
    "exit_index",
    "exit_proxy",
    "simulate",
    "step",
    "stopping_time_Tm",
    "thickened_sup",
    "PlainSimulator",
    "map_trajectories",
    "simulate_batch",
    "write_jsonl",
    "ExitThenStep",
    "strong_markov_check",
]
