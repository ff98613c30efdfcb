"""VRA-GT - noisy push-pull gradient tracking over directed networks."""

__version__ = "0.1.0"

from .algorithm import NetworkState, TrajectoryRecord, run, run_r_push_pull, run_vra_tracking
from .config import ExperimentConfig, load_config
from .errors import (
    ConfigError,
    DivergenceError,
    InsufficientDataError,
    InvalidConfigurationError,
    InvalidInputError,
    InvalidTopologyError,
    NumericalFailureError,
    UnsupportedConfigurationError,
    ValidationFailedError,
    VragtError,
)
from .graph import Digraph, WeightPair, build_weights, check_assumption2, perron_vectors, ring_plus_random
from .harness import ExperimentRunner, RateFit, fit_rate
from .noise import Channel, NoiseModel, draw
from .problems import QuadraticObjective, RidgeObjective, generate_ridge, solve_optimum
from .report import ValidationReport
from .schedules import PowerLawSchedule, ScheduleSet, validate_theorem2, validate_theorem3
from .validator import ExperimentReport, ExperimentValidator

__all__ = [
    "Channel",
    "ConfigError",
    "Digraph",
    "DivergenceError",
    "ExperimentConfig",
    "ExperimentReport",
    "ExperimentRunner",
    "ExperimentValidator",
    "InsufficientDataError",
    "InvalidConfigurationError",
    "InvalidInputError",
    "InvalidTopologyError",
    "NetworkState",
    "NoiseModel",
    "NumericalFailureError",
    "PowerLawSchedule",
    "QuadraticObjective",
    "RateFit",
    "RidgeObjective",
    "ScheduleSet",
    "TrajectoryRecord",
    "UnsupportedConfigurationError",
    "ValidationFailedError",
    "ValidationReport",
    "VragtError",
    "WeightPair",
    "build_weights",
    "check_assumption2",
    "draw",
    "fit_rate",
    "generate_ridge",
    "load_config",
    "perron_vectors",
    "ring_plus_random",
    "run",
    "run_r_push_pull",
    "run_vra_tracking",
    "solve_optimum",
    "validate_theorem2",
    "validate_theorem3",
]
