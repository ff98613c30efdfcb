"""Experiment configuration: JSON files validated by pydantic models."""

import copy
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .schedules import ScheduleSet

SCHEDULE_KEYS = ("alpha", "beta", "eta")


class GraphSpec(BaseModel):
    """Ring-plus-random generator parameters, or an edge-list file."""
    model_config = ConfigDict(extra="forbid")

    n: int = Field(default=100, ge=1, description="Agent count")
    p: float = Field(default=0.3, ge=0, le=1, description="Extra-link probability")
    seed: int = Field(default=0, ge=0, description="Topology seed")
    file: Optional[str] = Field(default=None, description="Edge-list file, overrides n/p/seed")
    r_matrix: Optional[str] = Field(default=None, description="User-supplied R matrix file")
    c_matrix: Optional[str] = Field(default=None, description="User-supplied C matrix file")

    @model_validator(mode="after")
    def _check_ring(self) -> "GraphSpec":
        if self.file is None and self.n < 2:
            raise ValueError(f"a generated ring needs at least 2 agents, got n={self.n}")
        return self


class ProblemSpec(BaseModel):
    """Ridge-regression instance parameters, or an instance file."""
    model_config = ConfigDict(extra="forbid")

    d1: int = Field(default=3, ge=1)
    d: int = Field(default=2, ge=1)
    r: float = Field(default=0.05, ge=0)
    box: Tuple[float, float] = Field(default=(1.0, 10.0))
    seed: int = Field(default=0, ge=0)
    file: Optional[str] = None


class NoiseSpec(BaseModel):
    """Gaussian noise levels on both channels."""
    model_config = ConfigDict(extra="forbid")

    sigma2_pull: float = Field(default=25.0, ge=0)
    sigma2_push: float = Field(default=25.0, ge=0)
    growth_pull: float = Field(default=0.0, ge=0)
    growth_push: float = Field(default=0.0, ge=0)


class BaselineSpec(BaseModel):
    """Constant factors of R-Push-Pull."""
    model_config = ConfigDict(extra="forbid")

    beta: float = Field(default=0.01, gt=0, le=1)
    alpha: float = Field(default=0.01, gt=0)


class ExperimentConfig(BaseModel):
    """Everything needed to reproduce one experiment."""
    model_config = ConfigDict(extra="forbid")

    graph: GraphSpec = Field(default_factory=GraphSpec)
    problem: ProblemSpec = Field(default_factory=ProblemSpec)
    sched: ScheduleSet = Field(default_factory=ScheduleSet)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    baseline: BaselineSpec = Field(default_factory=BaselineSpec)
    algorithm: Literal["vra_gt", "r_push_pull"] = "vra_gt"
    iterations: int = Field(default=20000, ge=1)
    record_every: int = Field(default=10, ge=1)
    num_seeds: int = Field(default=100, ge=1)
    seeds: Optional[List[int]] = None
    diagnostics: bool = False
    init: Literal["uniform", "zeros"] = "uniform"

    @model_validator(mode="after")
    def _check_seeds(self) -> "ExperimentConfig":
        if self.seeds is not None and any(s < 0 for s in self.seeds):
            raise ValueError("seeds must be nonnegative")
        return self

    def seed_list(self) -> List[int]:
        """Explicit seeds, or ``0..num_seeds-1``."""
        return list(self.seeds) if self.seeds is not None else list(range(self.num_seeds))

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def show(self) -> str:
        """Short human-readable summary."""
        s = self.sched
        source = self.graph.file or f"ring+random(n={self.graph.n}, p={self.graph.p}, seed={self.graph.seed})"
        lines = [
            "Experiment Configuration:",
            "-" * 30,
            f"Algorithm: {self.algorithm}",
            f"Graph: {source}",
            f"Problem: {self.problem.file or f'ridge(d1={self.problem.d1}, d={self.problem.d}, r={self.problem.r})'}",
            f"alpha_k = {s.alpha.describe()}, beta_k = {s.beta.describe()}, "
            f"eta_k = {s.eta.describe()}, gamma = {s.gamma:g}",
            f"Noise: sigma2 pull/push = {self.noise.sigma2_pull:g}/{self.noise.sigma2_push:g}",
            f"Iterations: {self.iterations}, stride {self.record_every}, seeds {len(self.seed_list())}",
        ]
        if self.algorithm == "r_push_pull":
            lines.append(f"Baseline: beta = {self.baseline.beta:g}, alpha = {self.baseline.alpha:g}")
        return "\n".join(lines)


def parse_value(text: str) -> Any:
    """JSON literal when possible, raw string otherwise."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: Mapping[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Return a copy of ``data`` with dotted keys such as ``sched.beta.e`` replaced."""
    result = copy.deepcopy(dict(data))
    for dotted, value in overrides.items():
        node = result
        parts = dotted.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"cannot set {dotted}: {part} is not an object")
            node = child
        node[parts[-1]] = value
    return result


def _merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def config_from_dict(data: Mapping[str, Any]) -> ExperimentConfig:
    """
    Validate ``data`` layered over the defaults, so partial objects are allowed.

    A schedule given with its amplitude ``a`` replaces the default schedule
    outright; one without it (``{"e": 0.7}``) only changes the named fields.
    """
    defaults = ExperimentConfig().model_dump(mode="json")
    sched = data.get("sched")
    if isinstance(sched, Mapping):
        for key in SCHEDULE_KEYS:
            if isinstance(sched.get(key), Mapping) and "a" in sched[key]:
                defaults["sched"].pop(key)
    try:
        return ExperimentConfig.model_validate(_merge(defaults, data))
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def read_config_dict(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except (json.JSONDecodeError, IOError) as e:
        raise ConfigError(f"could not read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Load a config file (defaults when ``path`` is None) and apply dotted overrides."""
    data = read_config_dict(path) if path is not None else {}
    if overrides:
        data = apply_overrides(data, overrides)
    return config_from_dict(data)
