"""Variance-reduced aggregation gradient tracking over directed networks.

One iteration advances the cumulative-gradient trackers ``s`` first, then the
decision rows ``x`` (which use ``y_k = s_{k+1} - s_k``), then the aggregation
trackers ``z``. R-Push-Pull is the same loop with ``eta_k = 1`` and constant
``beta`` and ``alpha``.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, NamedTuple, Optional

import numpy as np

from .errors import DivergenceError, InvalidConfigurationError, InvalidInputError
from .graph import EigenPair, WeightPair, mixing_matrices
from .noise import Channel, NoiseModel, keyed_generator, pull_effect, push_effect
from .problems import Objective
from .schedules import PowerLawSchedule, ScheduleSet

logger = logging.getLogger(__name__)

DIVERGENCE_BOUND = 1e12
METRIC_COLUMNS = ["k", "opt_gap", "consensus", "tracking", "conservation_residual"]
DIAGNOSTIC_COLUMNS = ["tracker_gap", "composite"]


@dataclass
class NetworkState:
    """Stacked agent rows of ``x``, ``s``, ``z`` plus the previous ``s``."""
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    s_prev: np.ndarray
    k: int = 1

    @classmethod
    def initial(cls, x0: np.ndarray, s0: Optional[np.ndarray] = None) -> "NetworkState":
        """Start with ``s_1 = z_1`` (zeros unless ``s0`` is given)."""
        x0 = np.array(x0, dtype=float)
        s0 = np.zeros_like(x0) if s0 is None else np.array(s0, dtype=float)
        if s0.shape != x0.shape:
            raise InvalidInputError(f"s0 must match x0 shape {x0.shape}, got {s0.shape}")
        return cls(x=x0, s=s0.copy(), z=s0.copy(), s_prev=s0.copy(), k=1)

    @property
    def y(self) -> np.ndarray:
        """``s_{k+1} - s_k`` once ``s`` has been advanced."""
        return self.s - self.s_prev

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass
class DiagnosticState:
    """Noise-free tracker ``y'_{k+1} = C_gamma y'_k + g_{k+1} - g_k`` with ``y'_1 = g_1``."""
    y_prime: Optional[np.ndarray] = None
    g_prev: Optional[np.ndarray] = None
    enabled: bool = False

    def advance(self, C_gamma: np.ndarray, g: np.ndarray):
        if not self.enabled:
            return
        if self.y_prime is None:
            self.y_prime = g.copy()
        else:
            self.y_prime = C_gamma @ self.y_prime + g - self.g_prev
        self.g_prev = g.copy()


@dataclass(frozen=True)
class MetricRow:
    """Metrics recorded at one checkpoint ``k``."""
    k: int
    opt_gap: float
    consensus: float
    tracking: float
    conservation_residual: float
    tracker_gap: Optional[float] = None
    composite: Optional[float] = None


@dataclass
class TrajectoryRecord:
    """Checkpointed metrics of one run."""
    rows: List[MetricRow] = field(default_factory=list)
    diagnostics: bool = False

    def append(self, row: MetricRow):
        self.rows.append(row)

    @property
    def columns(self) -> List[str]:
        return METRIC_COLUMNS + (DIAGNOSTIC_COLUMNS if self.diagnostics else [])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows], dtype=float)

    def as_dict(self) -> Dict[str, np.ndarray]:
        data = {name: self.column(name) for name in self.columns}
        data["k"] = data["k"].astype(int)
        return data

    def __len__(self) -> int:
        return len(self.rows)


class TrackingCurve(NamedTuple):
    """Trial-mean aggregation error ``||z_k - C s_k||^2`` at checkpoints."""
    k: np.ndarray
    tracking: np.ndarray


def checkpoints(T: int, stride: int) -> np.ndarray:
    """Every ``stride``-th iteration plus ``1``, the powers of ten and ``T``."""
    if T < 1 or stride < 1:
        raise InvalidInputError(f"iterations and stride must be positive, got T={T}, stride={stride}")
    ks = set(range(stride, T + 1, stride))
    ks.update({1, T})
    power = 10
    while power <= T:
        ks.add(power)
        power *= 10
    return np.array(sorted(ks), dtype=int)


def weighted_average(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``u'x / n``."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.shape != (x.shape[0],):
        raise InvalidInputError(f"weights must have length {x.shape[0]}, got {u.shape}")
    return u @ x / x.shape[0]


def _check_finite(k: int, **arrays: np.ndarray):
    for name, arr in arrays.items():
        if not np.all(np.isfinite(arr)) or np.max(np.abs(arr), initial=0.0) > DIVERGENCE_BOUND:
            raise DivergenceError(f"{name} diverged at iteration {k}", k=k)


def step_s(state: NetworkState, grads: np.ndarray, gamma: float) -> NetworkState:
    """``s_{k+1} = (1 - gamma) s_k + gamma z_k + g_k``; keeps ``s_k`` as ``s_prev``."""
    if grads.shape != state.s.shape:
        raise InvalidInputError(f"gradients must have shape {state.s.shape}, got {grads.shape}")
    _check_finite(state.k, gradient=grads)
    s_next = (1.0 - gamma) * state.s + gamma * state.z + grads
    return replace(state, s=s_next, s_prev=state.s)


def step_x(
    state: NetworkState, w: WeightPair, beta: float, alpha: float, pull_noise: np.ndarray
) -> NetworkState:
    """
    Pull step.

    ``x_{k+1} = (1-beta) x_k + beta (R x_k + xi^R_k) - alpha (s_{k+1} - s_k)``,
    where ``xi^R_k`` weights each pulled noise row by ``R_ij``.
    """
    mixed = w.R @ state.x + pull_effect(w, pull_noise)
    x_next = (1.0 - beta) * state.x + beta * mixed - alpha * state.y
    _check_finite(state.k, x=x_next)
    return replace(state, x=x_next)


def step_z(state: NetworkState, w: WeightPair, eta: float, push_noise: np.ndarray) -> NetworkState:
    """
    Variance-reduced aggregation.

    Agent ``j`` pushes ``C_ij (s_{j,k+1} - (1-eta) s_{j,k}) / eta`` plus noise
    ``zeta_{j,k+1}``; the received noise is summed without the ``C_ij`` weight.
    """
    if eta <= 0.0:
        raise InvalidConfigurationError(f"eta must be positive, got {eta}")
    message = w.C @ ((state.s - (1.0 - eta) * state.s_prev) / eta)
    z_next = eta * (message + push_effect(w, push_noise)) + (1.0 - eta) * state.z
    _check_finite(state.k, z=z_next)
    return replace(state, z=z_next, k=state.k + 1)


def _metrics(
    k: int,
    state: NetworkState,
    grads: np.ndarray,
    w: WeightPair,
    e: EigenPair,
    gamma: float,
    x_star: Optional[np.ndarray],
    diag: DiagnosticState,
) -> MetricRow:
    # state holds x_k, z_k, s_{k+1} and s_k at this point
    x_bar = weighted_average(state.x, e.u)
    Cs = w.C @ state.s_prev
    opt_gap = float(np.sum((state.x - x_star) ** 2)) if x_star is not None else float("nan")
    consensus = float(np.sum((state.x - x_bar) ** 2))
    tracking = float(np.sum((state.z - Cs) ** 2))
    balance = state.y.sum(axis=0) - gamma * (state.z - Cs).sum(axis=0) - grads.sum(axis=0)
    conservation = float(np.linalg.norm(balance))

    tracker_gap = composite = None
    if diag.enabled:
        tracker_gap = float(np.linalg.norm(state.y - diag.y_prime))
        y_bar = diag.y_prime.mean(axis=0)
        spread = float(np.sum((diag.y_prime - np.outer(e.v, y_bar)) ** 2))
        gap = float(np.sum((x_bar - x_star) ** 2)) if x_star is not None else float("nan")
        composite = spread + consensus + gap

    return MetricRow(
        k=k, opt_gap=opt_gap, consensus=consensus, tracking=tracking,
        conservation_residual=conservation, tracker_gap=tracker_gap, composite=composite,
    )


def initial_decisions(n: int, d: int, seed: int, init: str = "uniform") -> np.ndarray:
    """Rows i.i.d. uniform on ``[0, 1]^d`` (``"uniform"``) or all zero (``"zeros"``)."""
    if init == "uniform":
        return keyed_generator(seed, Channel.INIT).random((n, d))
    if init == "zeros":
        return np.zeros((n, d))
    raise InvalidConfigurationError(f"unknown initialization {init!r}")


def run(
    problem: Objective,
    w: WeightPair,
    e: EigenPair,
    sched: ScheduleSet,
    noise_pull: NoiseModel,
    noise_push: NoiseModel,
    T: int,
    record_every: int = 10,
    seed: int = 0,
    diagnostics: bool = False,
    x0: Optional[np.ndarray] = None,
    init: str = "uniform",
) -> TrajectoryRecord:
    """
    Run ``T`` iterations and record metrics at the checkpoints.

    Args:
        problem: Local objectives, one per agent
        w: Pull and push weight matrices
        e: Perron vectors used by the metrics
        sched: ``alpha_k``, ``beta_k``, ``eta_k`` and ``gamma``
        noise_pull: Noise on pulled decision rows
        noise_push: Noise on pushed tracker messages
        T: Number of iterations
        record_every: Checkpoint stride
        seed: Master seed of the noise and initialization streams
        diagnostics: Also track the noise-free tracker ``y'`` and composite metric
        x0: Explicit initial decisions (overrides ``init``)
        init: Initialization scheme when ``x0`` is not given

    Returns:
        TrajectoryRecord with one row per checkpoint

    Raises:
        DivergenceError: if any state entry becomes non-finite or exceeds 1e12
    """
    n, d = problem.n, problem.d
    if w.n != n:
        raise InvalidInputError(f"weights are for {w.n} agents, problem has {n}")

    x_start = initial_decisions(n, d, seed, init) if x0 is None else np.array(x0, dtype=float)
    state = NetworkState.initial(x_start)
    diag = DiagnosticState(enabled=diagnostics)
    _, C_gamma = mixing_matrices(w, 1.0, sched.gamma)
    x_star = problem.optimum

    record = TrajectoryRecord(diagnostics=diagnostics)
    marks = set(checkpoints(T, record_every).tolist())

    for k in range(1, T + 1):
        alpha, beta, eta = sched.at(k)
        grads = problem.grads(state.x)
        diag.advance(C_gamma, grads)

        state = step_s(state, grads, sched.gamma)
        if k in marks:
            row = _metrics(k, state, grads, w, e, sched.gamma, x_star, diag)
            record.append(row)
            logger.debug(f"k={k} opt_gap={row.opt_gap:.6g} tracking={row.tracking:.3e}")

        state = step_x(state, w, beta, alpha, noise_pull.sample_block(seed, k, n))
        state = step_z(state, w, eta, noise_push.sample_block(seed, k + 1, n))

    return record


def run_r_push_pull(
    problem: Objective,
    w: WeightPair,
    e: EigenPair,
    gamma: float,
    beta: float,
    alpha: float,
    noise_pull: NoiseModel,
    noise_push: NoiseModel,
    T: int,
    record_every: int = 10,
    seed: int = 0,
    diagnostics: bool = False,
    x0: Optional[np.ndarray] = None,
    init: str = "uniform",
) -> TrajectoryRecord:
    """R-Push-Pull: ``run`` with ``eta_k = 1``, ``beta_k = beta`` and ``alpha_k = alpha``."""
    sched = ScheduleSet.pinned(alpha=alpha, beta=beta, gamma=gamma, eta=1.0)
    return run(problem, w, e, sched, noise_pull, noise_push, T,
               record_every=record_every, seed=seed, diagnostics=diagnostics, x0=x0, init=init)


def run_vra_tracking(
    w: WeightPair,
    eta: PowerLawSchedule,
    noise_push: NoiseModel,
    T: int,
    trials: int,
    seed: int = 0,
    record_every: int = 10,
    drive_sigma: float = 1.0,
) -> TrackingCurve:
    """
    Aggregation recursion driven by an exogenous random walk ``s_k``.

    ``z_{k+1} = (1-eta_k)(z_k + C s_{k+1} - C s_k) + eta_k (C s_{k+1} + zeta^C_{k+1})``
    with ``s_{k+1} = s_k + N(0, drive_sigma^2)``, all trials advanced together.
    """
    n, d = w.n, noise_push.d
    shape = (trials, n, d)
    s = np.zeros(shape)
    Cs = np.zeros(shape)
    z = np.zeros(shape)

    marks = set(checkpoints(T, record_every).tolist())
    ks: List[int] = []
    means: List[float] = []

    for k in range(1, T + 1):
        if k in marks:
            ks.append(k)
            means.append(float(np.mean(np.sum((z - Cs) ** 2, axis=(1, 2)))))

        step = drive_sigma * keyed_generator(seed, Channel.DRIVE, k).standard_normal(shape)
        zeta = noise_push.sample_block(seed, k + 1, trials * n).reshape(shape)
        s = s + step
        Cs_next = np.einsum("ij,tjd->tid", w.C, s)
        received = np.einsum("ij,tjd->tid", w.C_adjacency, zeta)
        eta_k = eta.value(k)
        z = (1.0 - eta_k) * (z + Cs_next - Cs) + eta_k * (Cs_next + received)
        Cs = Cs_next
        _check_finite(k, z=z)

    return TrackingCurve(k=np.array(ks), tracking=np.array(means))
