"""Information-sharing noise on the pull and push channels.

Draws come from counter-based Philox streams keyed by ``(seed, channel)``
with the iteration index in the counter, so every draw is a pure function of
``(seed, channel, agent, k)`` and independent of evaluation order.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInputError, UnsupportedConfigurationError
from .graph import WeightPair
from .report import ValidationReport
from .schedules import ScheduleSet, decay_exponent


class Channel(Enum):
    """Stream identifiers; the value is mixed into the Philox key."""
    PULL = 1
    PUSH = 2
    INIT = 3
    DRIVE = 4


def keyed_generator(seed: int, channel: Channel, k: int = 0) -> np.random.Generator:
    """Generator positioned at block ``k`` of the ``(seed, channel)`` stream."""
    if seed < 0:
        raise InvalidInputError(f"seed must be nonnegative, got {seed}")
    bit_gen = np.random.Philox(key=np.array([seed, channel.value], dtype=np.uint64),
                               counter=np.array([0, k, 0, 0], dtype=np.uint64))
    return np.random.Generator(bit_gen)


@dataclass(frozen=True)
class NoiseModel:
    """
    Zero-mean Gaussian noise with variance ``sigma2 * k**growth`` per coordinate.

    Attributes:
        sigma2: Base variance (0 disables the channel)
        growth: Variance growth exponent q >= 0
        channel: Which message stream the noise perturbs
        d: Decision dimension
        kind: Distribution tag; only "gaussian" is implemented
    """
    sigma2: float
    growth: float = 0.0
    channel: Channel = Channel.PULL
    d: int = 1
    kind: str = "gaussian"

    def __post_init__(self):
        if self.sigma2 < 0 or self.growth < 0:
            raise InvalidInputError(f"variance and growth must be nonnegative, got {self.sigma2}, {self.growth}")
        if self.d < 1:
            raise InvalidInputError(f"dimension must be positive, got {self.d}")
        if self.kind != "gaussian":
            raise UnsupportedConfigurationError(f"unsupported noise kind {self.kind!r}")

    @property
    def silent(self) -> bool:
        return self.sigma2 == 0.0

    def variance(self, k: int) -> float:
        """Per-coordinate variance at iteration ``k``."""
        return self.sigma2 * float(k) ** self.growth

    def sample_block(self, seed: int, k: int, rows: int) -> np.ndarray:
        """
        Draws for agents ``0..rows-1`` at iteration ``k``.

        Row ``i`` equals ``draw(model, i, k, seed)`` whatever ``rows`` is.
        """
        if k < 1:
            raise InvalidInputError(f"iteration index must be at least 1, got {k}")
        if self.silent:
            return np.zeros((rows, self.d))
        z = keyed_generator(seed, self.channel, k).standard_normal((rows, self.d))
        return np.sqrt(self.variance(k)) * z


def draw(model: NoiseModel, agent: int, k: int, seed: int) -> np.ndarray:
    """Noise vector of ``agent`` at iteration ``k``."""
    if agent < 0:
        raise InvalidInputError(f"agent index must be nonnegative, got {agent}")
    return model.sample_block(seed, k, agent + 1)[agent]


def pull_effect(w: WeightPair, xi: np.ndarray) -> np.ndarray:
    """Row ``i``: ``sum over in-neighbors j of R_ij xi_j``; the self term is noiseless."""
    return w.R_offdiag @ xi


def push_effect(w: WeightPair, zeta: np.ndarray) -> np.ndarray:
    """Row ``i``: unweighted ``sum over in-neighbors j of zeta_j`` in the push graph."""
    return w.C_adjacency @ zeta


def validate_assumption3(
    model_pull: NoiseModel, model_push: NoiseModel, sched: ScheduleSet
) -> ValidationReport:
    """
    Square-summability of the scaled noise, by exponent arithmetic.

    ``sum beta_t^2 E||xi_t||^2`` behaves like ``sum t^(q - 2 e_beta)``, finite
    iff ``2 e_beta - q > 1``; likewise for ``eta`` and the push channel.
    """
    report = ValidationReport(title="Assumption 3: noise summability")
    for label, model, schedule in (("pull", model_pull, sched.beta), ("push", model_push, sched.eta)):
        exponent = decay_exponent(schedule)
        margin = 2.0 * exponent - model.growth
        if model.silent:
            report.add(f"{label} channel summable", True, "channel is noiseless", exponent=margin)
            continue
        report.add(
            f"{label} channel summable", margin > 1.0,
            f"2*{exponent:g} - {model.growth:g} = {margin:g} {'>' if margin > 1 else '<='} 1",
            exponent=margin,
        )
    return report
