"""Step-size and mixing-factor sequences, and the theorem precondition checks."""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import InvalidInputError, UnsupportedConfigurationError
from .report import ValidationReport


class PowerLawSchedule(BaseModel):
    """``a / (c + k**e)`` capped at 1; ``c = 0`` gives the pure form ``a / k**e``."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    a: float = Field(gt=0, description="Amplitude")
    e: float = Field(default=0.0, ge=0, description="Decay exponent")
    c: float = Field(default=0.0, ge=0, description="Offset added to k**e")

    def value(self, k: int) -> float:
        if k < 1:
            raise InvalidInputError(f"iteration index must be at least 1, got {k}")
        return min(1.0, self.a / (self.c + float(k) ** self.e))

    def values(self, ks: np.ndarray) -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        return np.minimum(1.0, self.a / (self.c + ks ** self.e))

    @property
    def is_constant(self) -> bool:
        return self.e == 0.0

    def describe(self) -> str:
        if self.is_constant:
            return f"{min(1.0, self.a / (self.c + 1.0)):g}"
        if self.c == 0:
            return f"{self.a:g}/k^{self.e:g}"
        return f"{self.a:g}/({self.c:g}+k^{self.e:g})"


def evaluate(s: PowerLawSchedule, k: int) -> float:
    return s.value(k)


def constant(value: float) -> PowerLawSchedule:
    return PowerLawSchedule(a=value, e=0.0, c=0.0)


class ScheduleSet(BaseModel):
    """Sequences ``alpha_k``, ``beta_k``, ``eta_k`` and the scalar ``gamma``."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: PowerLawSchedule = Field(default=PowerLawSchedule(a=0.1, c=1.0, e=0.9))
    beta: PowerLawSchedule = Field(default=PowerLawSchedule(a=0.1, c=1.0, e=0.6))
    eta: PowerLawSchedule = Field(default=PowerLawSchedule(a=0.1, c=1.0, e=0.6))
    gamma: float = Field(default=0.8, gt=0, le=1)

    def at(self, k: int) -> Tuple[float, float, float]:
        """``(alpha_k, beta_k, eta_k)``."""
        return self.alpha.value(k), self.beta.value(k), self.eta.value(k)

    @classmethod
    def pinned(cls, alpha: float, beta: float, gamma: float, eta: float = 1.0) -> "ScheduleSet":
        """Constant sequences, as used by R-Push-Pull."""
        return cls(alpha=constant(alpha), beta=constant(beta), eta=constant(eta), gamma=gamma)

    @classmethod
    def epsilon_family(cls, epsilon: float, gamma: float = 0.8, a: float = 1.0) -> "ScheduleSet":
        """Exponents ``e_eta = e_beta = 1 - 5eps/8`` and ``e_alpha = 1 - eps/4``."""
        if not 0.0 < epsilon < 0.8:
            raise InvalidInputError(f"epsilon must lie in (0, 0.8), got {epsilon}")
        e_beta = 1.0 - 5.0 * epsilon / 8.0
        return cls(
            alpha=PowerLawSchedule(a=a, e=1.0 - epsilon / 4.0),
            beta=PowerLawSchedule(a=a, e=e_beta),
            eta=PowerLawSchedule(a=a, e=e_beta),
            gamma=gamma,
        )


def decay_exponent(schedule: PowerLawSchedule) -> float:
    """Asymptotic decay exponent ``e``; only power laws are understood."""
    if not isinstance(schedule, PowerLawSchedule):
        raise UnsupportedConfigurationError(f"{type(schedule).__name__} is not a power-law schedule")
    return schedule.e


def validate_theorem2(s: ScheduleSet) -> ValidationReport:
    """
    Preconditions of almost-sure convergence, by exponent arithmetic.

    Offset forms ``a/(c + k^e)`` are classified by their asymptotic exponent.
    """
    e_a, e_b, e_n = decay_exponent(s.alpha), decay_exponent(s.beta), decay_exponent(s.eta)

    report = ValidationReport(title="Almost-sure convergence preconditions")
    report.add("gamma < 1", s.gamma < 1.0, f"gamma = {s.gamma:g}")
    report.add("sum beta diverges, sum beta^2 finite", 0.5 < e_b <= 1.0, f"e_beta = {e_b:g} in (1/2, 1]")
    report.add("sum eta diverges, sum eta^2 finite", 0.5 < e_n <= 1.0, f"e_eta = {e_n:g} in (1/2, 1]")
    report.add("sum alpha diverges", e_a <= 1.0, f"e_alpha = {e_a:g} <= 1")
    report.add(
        "sum alpha^2/beta finite", 2.0 * e_a - e_b > 1.0,
        f"2*{e_a:g} - {e_b:g} = {2.0 * e_a - e_b:g} > 1",
    )
    report.add("lim alpha/beta = 0", e_a > e_b, f"e_alpha = {e_a:g} > e_beta = {e_b:g}")
    return report


def predicted_rate(e_alpha: float, e_beta: float, e_eta: float) -> float:
    return min(2.0 * e_beta - e_alpha, e_beta + e_eta - e_alpha)


def validate_theorem3(s: ScheduleSet) -> Tuple[ValidationReport, float]:
    """
    Preconditions of the mean-square rate and the predicted exponent.

    Returns:
        The report and ``min(2 e_beta - e_alpha, e_beta + e_eta - e_alpha)``
    """
    e_a, e_b, e_n = decay_exponent(s.alpha), decay_exponent(s.beta), decay_exponent(s.eta)
    rate = predicted_rate(e_a, e_b, e_n)

    report = ValidationReport(title="Mean-square rate preconditions")
    report.add("gamma < 1", s.gamma < 1.0, f"gamma = {s.gamma:g}")
    for name, sched in (("alpha", s.alpha), ("beta", s.beta), ("eta", s.eta)):
        report.add(f"{name} amplitude in (0, 1]", 0.0 < sched.a <= 1.0, f"a = {sched.a:g}")
        report.add(f"{name} exponent in (1/2, 1)", 0.5 < sched.e < 1.0, f"e = {sched.e:g}")
    report.add(
        "alpha > (1 + beta)/2", 2.0 * e_a - e_b > 1.0,
        f"{e_a:g} > {(1.0 + e_b) / 2.0:g}",
    )
    report.values["predicted_rate"] = rate
    return report, rate


def validate_vra_theorem(eta: PowerLawSchedule, growth: float = 0.0) -> ValidationReport:
    """
    Hypotheses under which the aggregation error ``z_k - C s_k`` vanishes.

    Args:
        eta: The aggregation factor sequence
        growth: Variance growth exponent of the push noise
    """
    e = decay_exponent(eta)
    report = ValidationReport(title="Variance-reduced aggregation convergence")
    report.add("sum eta diverges", e <= 1.0, f"e_eta = {e:g} <= 1")
    report.add("sum eta^2 finite", e > 0.5, f"e_eta = {e:g} > 1/2")
    report.add("sum eta^2 E||zeta||^2 finite", 2.0 * e - growth > 1.0, f"2*{e:g} - {growth:g} > 1")

    power_form = eta.c == 0 and 0.0 < eta.a < 1.0 and 0.5 < e < 1.0
    harmonic_form = eta.c == 1.0 and e == 1.0 and 1.0 < eta.a < 2.0
    report.add(
        "rate bound E||z - Cs||^2 <= c eta_k applies",
        growth == 0.0 and (power_form or harmonic_form),
        "needs bounded variance and eta/k^a1 (eta<1, a1 in (1/2,1)) or eta/(k+1) (eta in (1,2))",
    )
    report.values["predicted_exponent"] = e
    return report
