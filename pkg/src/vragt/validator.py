"""Aggregate precondition checks for an experiment before it runs."""

import json
import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from .errors import NumericalFailureError
from .graph import EigenPair, WeightPair, check_assumption2, check_stochasticity, contraction_check, perron_vectors
from .noise import NoiseModel, validate_assumption3
from .problems import Objective, check_convexity, check_lipschitz
from .report import ValidationReport
from .schedules import ScheduleSet, validate_theorem2, validate_theorem3

logger = logging.getLogger(__name__)


class ExperimentReport(BaseModel):
    """All module reports for one configuration."""
    algorithm: str = Field(description="vra_gt or r_push_pull")
    reports: List[ValidationReport] = Field(default_factory=list)
    predicted_rate: Optional[float] = Field(default=None, description="Mean-square rate exponent")
    skipped: List[str] = Field(default_factory=list, description="Checks not applicable to the algorithm")

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def total_failures(self) -> int:
        return sum(len(r.failures) for r in self.reports)

    def failed_conditions(self) -> List[str]:
        return [f"{r.title}: {c.name}" for r in self.reports for c in r.failures]

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "passed": self.passed,
            "predicted_rate": self.predicted_rate,
            "skipped": self.skipped,
            "reports": [r.to_dict() for r in self.reports],
        }

    def export_json(self, output_path: str):
        with open(output_path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, default=str)

    def export_text(self) -> str:
        lines = []
        lines.append("=" * 60)
        lines.append("EXPERIMENT VALIDATION REPORT")
        lines.append("=" * 60)
        lines.append(f"Algorithm: {self.algorithm}")
        lines.append(f"Total Failures: {self.total_failures}")
        lines.append(f"Status: {'PASSED' if self.passed else 'FAILED'}")
        if self.predicted_rate is not None:
            lines.append(f"Predicted rate exponent: {self.predicted_rate:g}")
        lines.append("")
        for report in self.reports:
            lines.append(report.export_text())
            lines.append("")
        for note in self.skipped:
            lines.append(f"Skipped: {note}")
        return "\n".join(lines)


class ExperimentValidator:
    """Run every applicable assumption and theorem check."""

    def __init__(self, sample_seed: int = 0, samples: int = 1000):
        """
        Initialize validator.

        Args:
            sample_seed: Seed of the sampled Assumption 1 checks
            samples: Number of sampled point pairs
        """
        self.sample_seed = sample_seed
        self.samples = samples

    def validate(
        self,
        w: WeightPair,
        problem: Objective,
        sched: ScheduleSet,
        noise_pull: NoiseModel,
        noise_push: NoiseModel,
        algorithm: str = "vra_gt",
        eigen: Optional[EigenPair] = None,
    ) -> ExperimentReport:
        report = ExperimentReport(algorithm=algorithm)

        graph_report = check_assumption2(w.pull_graph(), w.push_graph())
        report.reports.append(graph_report)
        report.reports.append(check_stochasticity(w))
        report.reports.append(self._spectral(w, sched.gamma, eigen, graph_report.passed))

        rng = np.random.default_rng(self.sample_seed)
        if problem.L is not None:
            report.reports.append(check_lipschitz(problem, problem.L, rng, samples=self.samples))
        report.reports.append(check_convexity(problem, rng, mu=problem.mu, samples=self.samples))

        if algorithm == "vra_gt":
            report.reports.append(validate_theorem2(sched))
            rate_report, rate = validate_theorem3(sched)
            report.reports.append(rate_report)
            report.predicted_rate = rate
            report.reports.append(validate_assumption3(noise_pull, noise_push, sched))
        else:
            report.skipped.append("diminishing-factor theorem conditions (constant factors)")
            report.skipped.append("Assumption 3 summability (eta_k = 1)")

        logger.info(f"Validation {'passed' if report.passed else 'failed'} "
                    f"with {report.total_failures} failing condition(s)")
        return report

    def _spectral(
        self, w: WeightPair, gamma: float, eigen: Optional[EigenPair], connected: bool
    ) -> ValidationReport:
        result = ValidationReport(title="Spectral contraction")
        if not connected:
            result.add("Perron vectors", False, "skipped: no common spanning-tree root")
            return result
        try:
            e = eigen if eigen is not None else perron_vectors(w)
        except NumericalFailureError as err:
            result.add("Perron vectors", False, str(err))
            return result

        result.add("Perron vectors", True, f"residuals {e.residual_u:.1e}/{e.residual_v:.1e}, u'v = {e.u @ e.v:.4g}")
        radii = contraction_check(w, gamma, e)
        result.add("C_gamma - v1'/n contracts", radii.push < 1.0, f"spectral radius {radii.push:.6f}", radius=radii.push)
        result.add("R - 1u'/n contracts", radii.pull < 1.0, f"spectral radius {radii.pull:.6f}", radius=radii.pull)
        return result
