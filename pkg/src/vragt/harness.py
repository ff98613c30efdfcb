"""Experiment orchestration: build, validate, run seeds, aggregate, fit rates."""

import itertools
import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, Field

from .algorithm import TrajectoryRecord, run, run_r_push_pull
from .config import ExperimentConfig, apply_overrides, config_from_dict
from .errors import InsufficientDataError, InvalidInputError, NumericalFailureError, ValidationFailedError
from .formatter import AggregateFormatter, MetadataFormatter, TrajectoryFormatter, metric_columns
from .graph import Digraph, EigenPair, WeightPair, build_weights, perron_vectors, ring_plus_random
from .noise import Channel, NoiseModel
from .parser import read_graph, read_instance, read_weight_matrix
from .problems import Objective, RidgeObjective, generate_ridge
from .schedules import ScheduleSet
from .validator import ExperimentReport, ExperimentValidator

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MIN_FIT_POINTS = 8
AGGREGATE_FILE = "aggregate.csv"
METADATA_FILE = "metadata.json"


@dataclass
class Experiment:
    """Concrete objects built from one configuration."""
    config: ExperimentConfig
    graph: Digraph
    weights: WeightPair
    eigen: Optional[EigenPair]
    problem: Objective
    sched: ScheduleSet
    noise_pull: NoiseModel
    noise_push: NoiseModel


def build_experiment(config: ExperimentConfig) -> Experiment:
    """
    Generate or load the graph, weights and ridge instance of ``config``.

    Perron vectors are left as None when power iteration fails; the
    validator reports that case.
    """
    gs, ps = config.graph, config.problem
    if gs.file:
        g = read_graph(gs.file)
    else:
        g = ring_plus_random(gs.n, gs.p, np.random.default_rng(gs.seed))

    w = build_weights(g)
    if gs.r_matrix or gs.c_matrix:
        R = read_weight_matrix(gs.r_matrix) if gs.r_matrix else w.R
        C = read_weight_matrix(gs.c_matrix) if gs.c_matrix else w.C
        w = WeightPair(R=R, C=C)
    if w.n != g.n:
        raise InvalidInputError(f"weight matrices are {w.n}x{w.n} but the graph has {g.n} agents")

    if ps.file:
        inst = read_instance(ps.file)
    else:
        inst = generate_ridge(g.n, ps.d1, ps.d, ps.r, ps.box, np.random.default_rng(ps.seed))
    if inst.n != g.n:
        raise InvalidInputError(f"problem has {inst.n} agents but the graph has {g.n}")

    if config.algorithm == "r_push_pull":
        sched = ScheduleSet.pinned(alpha=config.baseline.alpha, beta=config.baseline.beta,
                                   gamma=config.sched.gamma, eta=1.0)
    else:
        sched = config.sched

    try:
        eigen: Optional[EigenPair] = perron_vectors(w)
    except NumericalFailureError as e:
        logger.warning(f"Perron vectors unavailable: {e}")
        eigen = None

    ns = config.noise
    return Experiment(
        config=config,
        graph=g,
        weights=w,
        eigen=eigen,
        problem=RidgeObjective(inst),
        sched=sched,
        noise_pull=NoiseModel(ns.sigma2_pull, ns.growth_pull, Channel.PULL, inst.d),
        noise_push=NoiseModel(ns.sigma2_push, ns.growth_push, Channel.PUSH, inst.d),
    )


@dataclass
class RunSummary:
    """Where a run wrote its files and how it went."""
    out_dir: Path
    seeds: List[int]
    seed_files: List[Path]
    aggregate_file: Path
    metadata_file: Path
    report: ExperimentReport
    aggregate: pd.DataFrame
    warnings: List[str] = field(default_factory=list)
    wall_time: float = 0.0


class ExperimentRunner:
    """Run every seed of one configuration and write the result files."""

    def __init__(self, config: ExperimentConfig, threads: int = 1, force: bool = False,
                 validator: Optional[ExperimentValidator] = None):
        """
        Initialize runner.

        Args:
            config: Validated experiment configuration
            threads: Worker threads for the seed pool
            force: Run even when validation fails
            validator: Validator to use (default settings when None)
        """
        if threads < 1:
            raise InvalidInputError(f"threads must be positive, got {threads}")
        self.config = config
        self.threads = threads
        self.force = force
        self.validator = validator or ExperimentValidator()

    @cached_property
    def experiment(self) -> Experiment:
        return build_experiment(self.config)

    def validate(self) -> ExperimentReport:
        ex = self.experiment
        return self.validator.validate(
            ex.weights, ex.problem, ex.sched, ex.noise_pull, ex.noise_push,
            algorithm=self.config.algorithm, eigen=ex.eigen,
        )

    def run_seed(self, seed: int) -> TrajectoryRecord:
        ex, cfg = self.experiment, self.config
        if ex.eigen is None:
            raise ValidationFailedError("Perron vectors are unavailable; metrics cannot be computed")
        logger.info(f"Seed {seed}: {cfg.algorithm}, {cfg.iterations} iterations")
        options = dict(record_every=cfg.record_every, seed=seed, diagnostics=cfg.diagnostics, init=cfg.init)
        if cfg.algorithm == "r_push_pull":
            return run_r_push_pull(ex.problem, ex.weights, ex.eigen, ex.sched.gamma,
                                   cfg.baseline.beta, cfg.baseline.alpha,
                                   ex.noise_pull, ex.noise_push, cfg.iterations, **options)
        return run(ex.problem, ex.weights, ex.eigen, ex.sched, ex.noise_pull, ex.noise_push,
                   cfg.iterations, **options)

    def run_seeds(self, seeds: Sequence[int]) -> List[TrajectoryRecord]:
        """Records in the order of ``seeds`` whatever the pool size."""
        if self.threads == 1:
            return [self.run_seed(s) for s in seeds]
        return Parallel(n_jobs=self.threads, prefer="threads")(delayed(self.run_seed)(s) for s in seeds)

    def run(self, out_dir: PathLike) -> RunSummary:
        """
        Validate, run all seeds and write per-seed CSVs, the aggregate and metadata.

        Raises:
            ValidationFailedError: if validation fails and ``force`` is not set
            DivergenceError: if any seed diverges
        """
        started = time.perf_counter()
        report = self.validate()
        warnings: List[str] = []
        if not report.passed:
            if not self.force:
                raise ValidationFailedError(
                    "validation failed: " + "; ".join(report.failed_conditions())
                )
            for failed in report.failed_conditions():
                warnings.append(f"forced past failed condition: {failed}")
                logger.warning(warnings[-1])

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        seeds = self.config.seed_list()
        records = self.run_seeds(seeds)

        seed_files = []
        writer = TrajectoryFormatter()
        for seed, record in zip(seeds, records):
            path = out / f"seed_{seed}.csv"
            writer.format(record, path)
            seed_files.append(path)

        aggregator = AggregateFormatter()
        frame = aggregator.aggregate(records)
        aggregator.write_frame(frame, out / AGGREGATE_FILE)

        wall_time = time.perf_counter() - started
        MetadataFormatter().format(
            self._metadata(report, seeds, warnings, wall_time), out / METADATA_FILE
        )
        logger.info(f"Wrote {len(seed_files)} seed file(s) and {AGGREGATE_FILE} to {out}")

        return RunSummary(
            out_dir=out, seeds=seeds, seed_files=seed_files,
            aggregate_file=out / AGGREGATE_FILE, metadata_file=out / METADATA_FILE,
            report=report, aggregate=frame, warnings=warnings, wall_time=wall_time,
        )

    def _metadata(self, report: ExperimentReport, seeds: List[int], warnings: List[str],
                  wall_time: float) -> Dict[str, Any]:
        from . import __version__

        return {
            "version": __version__,
            "created": datetime.now().isoformat(),
            "config": json.loads(self.config.to_json()),
            "seeds": seeds,
            "threads": self.threads,
            "forced": self.force,
            "warnings": warnings,
            "validation": report.to_dict(),
            "wall_time_seconds": wall_time,
        }


class RateFit(BaseModel):
    """Least-squares line through ``(log k, log metric)``."""
    metric: str
    k_lo: float
    k_hi: float
    slope: float
    intercept: float
    r2: float = Field(description="Coefficient of determination in log-log space")
    points: int = Field(ge=MIN_FIT_POINTS)

    def predict(self, k: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return np.exp(self.intercept) * np.asarray(k, dtype=float) ** self.slope

    def export_text(self) -> str:
        return (f"{self.metric} on [{self.k_lo:g}, {self.k_hi:g}]: slope {self.slope:.6f}, "
                f"intercept {self.intercept:.6f}, R^2 {self.r2:.6f}, {self.points} points")


def metric_series(frame: pd.DataFrame, metric: str) -> np.ndarray:
    """
    Values of ``metric`` per row.

    Aggregate frames use the ``_mean`` column; ``a+b`` sums the named metrics.
    """
    total = np.zeros(len(frame))
    for name in (part.strip() for part in metric.split("+")):
        column = f"{name}_mean" if f"{name}_mean" in frame.columns else name
        if column not in frame.columns:
            available = ", ".join(metric_columns(frame))
            raise InvalidInputError(f"no column for metric {name!r}; available: {available}")
        total = total + frame[column].to_numpy(dtype=float)
    return total


def fit_rate(frame: pd.DataFrame, metric: str, k_lo: float, k_hi: float) -> RateFit:
    """
    Fit ``log metric = slope * log k + intercept`` over checkpoints in ``[k_lo, k_hi]``.

    Raises:
        InsufficientDataError: if fewer than 8 usable points fall in the window
    """
    if k_lo <= 0 or k_hi < k_lo:
        raise InvalidInputError(f"invalid window [{k_lo}, {k_hi}]")
    k = frame["k"].to_numpy(dtype=float)
    y = metric_series(frame, metric)

    inside = (k >= k_lo) & (k <= k_hi)
    usable = inside & np.isfinite(y) & (y > 0)
    if usable.sum() < inside.sum():
        logger.warning(f"Dropped {int(inside.sum() - usable.sum())} nonpositive point(s) from the fit")
    points = int(usable.sum())
    if points < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"{points} usable checkpoint(s) in [{k_lo:g}, {k_hi:g}], need {MIN_FIT_POINTS}"
        )

    lk, ly = np.log(k[usable]), np.log(y[usable])
    slope, intercept = np.polyfit(lk, ly, 1)
    residual = ly - (slope * lk + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(residual ** 2)) / ss_tot if ss_tot > 0 else 1.0

    return RateFit(metric=metric, k_lo=k_lo, k_hi=k_hi, slope=float(slope),
                   intercept=float(intercept), r2=r2, points=points)


@dataclass
class SweepCell:
    """One point of a parameter sweep."""
    overrides: Dict[str, Any]
    out_dir: Path
    summary: RunSummary


def cell_name(overrides: Mapping[str, Any]) -> str:
    """Directory name ``key=value`` joined by ``__``."""
    parts = []
    for key, value in overrides.items():
        text = json.dumps(value, separators=(",", ":")) if isinstance(value, (dict, list)) else str(value)
        parts.append(f"{key}={text}")
    return "__".join(parts)


def sweep(
    base: Mapping[str, Any],
    params: Mapping[str, Sequence[Any]],
    out_dir: PathLike,
    threads: int = 1,
    force: bool = False,
) -> List[SweepCell]:
    """
    Run the cartesian product of ``params`` over the raw config ``base``.

    Args:
        base: Unvalidated config dict
        params: Dotted key to list of values
        out_dir: Parent directory; each cell gets its own subdirectory
        threads: Worker threads per cell
        force: Run cells whose validation fails

    Returns:
        One SweepCell per combination, in product order
    """
    if not params:
        raise InvalidInputError("sweep needs at least one parameter")
    keys = list(params)
    cells = []
    for values in itertools.product(*(params[key] for key in keys)):
        overrides = dict(zip(keys, values))
        config = config_from_dict(apply_overrides(base, overrides))
        target = Path(out_dir) / cell_name(overrides)
        logger.info(f"Sweep cell {target.name}")
        summary = ExperimentRunner(config, threads=threads, force=force).run(target)
        cells.append(SweepCell(overrides=overrides, out_dir=target, summary=summary))
    return cells
