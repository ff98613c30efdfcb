"""Local objective functions: the ridge-regression benchmark and quadratic toys."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError, NumericalFailureError
from .report import ValidationReport

logger = logging.getLogger(__name__)

OPTIMUM_TOL = 1e-8


class Objective(ABC):
    """
    Sum of private convex functions ``f_i`` with Lipschitz gradients.

    Subclasses provide per-agent values and gradients; ``grads`` evaluates all
    agents at once on an ``n x d`` matrix whose row ``i`` is agent ``i``'s point.
    """

    n: int
    d: int

    @abstractmethod
    def value(self, i: int, x: np.ndarray) -> float:
        pass

    @abstractmethod
    def grad(self, i: int, x: np.ndarray) -> np.ndarray:
        pass

    def grads(self, X: np.ndarray) -> np.ndarray:
        return np.stack([self.grad(i, X[i]) for i in range(self.n)])

    def average_grad(self, x: np.ndarray) -> np.ndarray:
        return np.mean([self.grad(i, x) for i in range(self.n)], axis=0)

    @property
    def L(self) -> Optional[float]:
        return None

    @property
    def mu(self) -> Optional[float]:
        return None

    @property
    def optimum(self) -> Optional[np.ndarray]:
        return None

    def _check_point(self, i: int, x: np.ndarray) -> np.ndarray:
        if not 0 <= i < self.n:
            raise InvalidInputError(f"agent index {i} outside 0..{self.n - 1}")
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise InvalidInputError(f"point must have shape ({self.d},), got {x.shape}")
        return x


@dataclass(frozen=True)
class RidgeInstance:
    """Per-agent data ``(M_i, v_i)`` with ``v_i = M_i x_true + nu_i``."""
    M: np.ndarray
    v: np.ndarray
    r: float
    x_true: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if M.ndim != 3 or v.shape != M.shape[:2]:
            raise InvalidInputError(f"M must be n x d1 x d and v n x d1, got {M.shape}, {v.shape}")
        if self.r < 0:
            raise InvalidInputError(f"regularizer must be nonnegative, got {self.r}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "x_true", np.asarray(self.x_true, dtype=float))
        object.__setattr__(self, "nu", np.asarray(self.nu, dtype=float))

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def d1(self) -> int:
        return self.M.shape[1]

    @property
    def d(self) -> int:
        return self.M.shape[2]


def evenly_spaced_truth(d: int, box: Sequence[float] = (1.0, 10.0)) -> np.ndarray:
    """Coordinates spread evenly over ``box``; the midpoint when ``d == 1``."""
    lo, hi = float(box[0]), float(box[1])
    if d == 1:
        return np.array([(lo + hi) / 2.0])
    return lo + (hi - lo) * np.arange(d) / (d - 1)


def generate_ridge(
    n: int,
    d1: int,
    d: int,
    r: float,
    box: Sequence[float],
    rng: np.random.Generator,
    measurement_noise: bool = True,
) -> RidgeInstance:
    """
    Random ridge-regression instance.

    ``M_i`` entries are uniform on [0, 1], ``nu_i`` is standard normal and the
    ground truth is evenly spaced across ``box``.
    """
    if n < 1 or d1 < 1 or d < 1:
        raise InvalidInputError(f"dimensions must be positive, got n={n}, d1={d1}, d={d}")
    if r < 0:
        raise InvalidInputError(f"regularizer must be nonnegative, got {r}")

    x_true = evenly_spaced_truth(d, box)
    M = rng.random((n, d1, d))
    nu = rng.standard_normal((n, d1))
    if not measurement_noise:
        nu = np.zeros_like(nu)
    v = np.einsum("ijk,k->ij", M, x_true) + nu
    return RidgeInstance(M=M, v=v, r=float(r), x_true=x_true, nu=nu)


def ridge_value(inst: RidgeInstance, i: int, x: np.ndarray) -> float:
    residual = inst.M[i] @ x - inst.v[i]
    return float(residual @ residual + inst.r * (x @ x))


def ridge_grad(inst: RidgeInstance, i: int, x: np.ndarray) -> np.ndarray:
    """``2 M_i'(M_i x - v_i) + 2 r x``."""
    if not 0 <= i < inst.n:
        raise InvalidInputError(f"agent index {i} outside 0..{inst.n - 1}")
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.d,):
        raise InvalidInputError(f"point must have shape ({inst.d},), got {x.shape}")
    return 2.0 * inst.M[i].T @ (inst.M[i] @ x - inst.v[i]) + 2.0 * inst.r * x


def _normal_equations(inst: RidgeInstance) -> Tuple[np.ndarray, np.ndarray]:
    H = np.einsum("ijk,ijl->kl", inst.M, inst.M) + inst.n * inst.r * np.eye(inst.d)
    b = np.einsum("ijk,ij->k", inst.M, inst.v)
    return H, b


def solve_optimum(inst: RidgeInstance, tol: float = OPTIMUM_TOL) -> np.ndarray:
    """Minimizer of ``sum_j f_j`` from the normal equations."""
    H, b = _normal_equations(inst)
    if np.linalg.matrix_rank(H) < inst.d:
        raise NumericalFailureError("normal equations are singular (r = 0 with rank-deficient data)")
    try:
        x = np.linalg.solve(H, b)
        # one step of iterative refinement
        x = x + np.linalg.solve(H, b - H @ x)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"normal equations could not be solved: {e}") from e

    residual = float(np.linalg.norm(2.0 * (H @ x - b)))
    if residual > tol:
        raise NumericalFailureError(f"optimum gradient residual {residual:.3e} exceeds {tol:g}", residual=residual)
    return x


def smoothness_constants(inst: RidgeInstance) -> Tuple[float, float]:
    """
    Smoothness and strong-convexity constants.

    Returns:
        ``L = max_i 2(lambda_max(M_i'M_i) + r)`` and
        ``mu = 2(lambda_min(sum_i M_i'M_i)/n + r)`` for the averaged objective
    """
    gram = np.einsum("ijk,ijl->ikl", inst.M, inst.M)
    L = 2.0 * (max(np.linalg.eigvalsh(G)[-1] for G in gram) + inst.r)
    mu = 2.0 * (np.linalg.eigvalsh(gram.sum(axis=0))[0] / inst.n + inst.r)
    return float(L), float(max(mu, 0.0))


class RidgeObjective(Objective):
    """Objective adapter over a ``RidgeInstance``."""

    def __init__(self, inst: RidgeInstance):
        self.inst = inst
        self.n = inst.n
        self.d = inst.d

    def value(self, i: int, x: np.ndarray) -> float:
        return ridge_value(self.inst, i, self._check_point(i, x))

    def grad(self, i: int, x: np.ndarray) -> np.ndarray:
        return ridge_grad(self.inst, i, x)

    def grads(self, X: np.ndarray) -> np.ndarray:
        residual = np.einsum("ijk,ik->ij", self.inst.M, X) - self.inst.v
        return 2.0 * np.einsum("ijk,ij->ik", self.inst.M, residual) + 2.0 * self.inst.r * X

    @cached_property
    def _constants(self) -> Tuple[float, float]:
        return smoothness_constants(self.inst)

    @property
    def L(self) -> float:
        return self._constants[0]

    @property
    def mu(self) -> float:
        return self._constants[1]

    @cached_property
    def optimum(self) -> np.ndarray:
        return solve_optimum(self.inst)


class QuadraticObjective(Objective):
    """``f_i(x) = 0.5 x'A_i x - b_i'x`` with symmetric positive semidefinite ``A_i``."""

    def __init__(self, A: np.ndarray, b: np.ndarray):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2] or b.shape != A.shape[:2]:
            raise InvalidInputError(f"A must be n x d x d and b n x d, got {A.shape}, {b.shape}")
        if not np.allclose(A, np.transpose(A, (0, 2, 1))):
            raise InvalidInputError("every A_i must be symmetric")
        self.A = A
        self.b = b
        self.n, self.d = b.shape

    @classmethod
    def squared_norm(cls, n: int, d: int) -> "QuadraticObjective":
        """``f_i(x) = ||x||^2`` for every agent."""
        return cls(A=np.tile(2.0 * np.eye(d), (n, 1, 1)), b=np.zeros((n, d)))

    def value(self, i: int, x: np.ndarray) -> float:
        x = self._check_point(i, x)
        return float(0.5 * x @ self.A[i] @ x - self.b[i] @ x)

    def grad(self, i: int, x: np.ndarray) -> np.ndarray:
        x = self._check_point(i, x)
        return self.A[i] @ x - self.b[i]

    def grads(self, X: np.ndarray) -> np.ndarray:
        return np.einsum("ijk,ik->ij", self.A, X) - self.b

    @property
    def L(self) -> float:
        return float(max(np.linalg.eigvalsh(Ai)[-1] for Ai in self.A))

    @property
    def mu(self) -> float:
        return float(max(np.linalg.eigvalsh(self.A.mean(axis=0))[0], 0.0))

    @property
    def optimum(self) -> np.ndarray:
        try:
            return np.linalg.solve(self.A.mean(axis=0), self.b.mean(axis=0))
        except np.linalg.LinAlgError as e:
            raise NumericalFailureError(f"average Hessian is singular: {e}") from e


def _random_pairs(obj: Objective, rng: np.random.Generator, samples: int, scale: float):
    agents = rng.integers(0, obj.n, size=samples)
    X = rng.normal(scale=scale, size=(samples, obj.d))
    Y = rng.normal(scale=scale, size=(samples, obj.d))
    return agents, X, Y


def check_lipschitz(
    obj: Objective, L: float, rng: np.random.Generator, samples: int = 1000, scale: float = 10.0
) -> ValidationReport:
    """Sampled ``||grad f_i(x) - grad f_i(y)|| <= L ||x - y||``."""
    agents, X, Y = _random_pairs(obj, rng, samples, scale)
    worst = 0.0
    for i, x, y in zip(agents, X, Y):
        gap = np.linalg.norm(x - y)
        if gap > 0:
            worst = max(worst, np.linalg.norm(obj.grad(i, x) - obj.grad(i, y)) / gap)

    report = ValidationReport(title="Assumption 1: Lipschitz gradients")
    report.add(
        "gradient Lipschitz bound", worst <= L * (1 + 1e-9),
        f"largest observed ratio {worst:.6g} vs L = {L:.6g}", ratio=float(worst), L=float(L),
    )
    return report


def check_convexity(
    obj: Objective, rng: np.random.Generator, mu: Optional[float] = None,
    samples: int = 1000, scale: float = 10.0,
) -> ValidationReport:
    """Sampled gradient monotonicity, and strong monotonicity of the average gradient."""
    agents, X, Y = _random_pairs(obj, rng, samples, scale)
    worst_local = min(float((obj.grad(i, x) - obj.grad(i, y)) @ (x - y)) for i, x, y in zip(agents, X, Y))

    report = ValidationReport(title="Assumption 1: convexity")
    report.add("local gradients monotone", worst_local >= -1e-9, f"min inner product {worst_local:.3e}")

    if mu is not None and mu > 0:
        ratios = []
        for x, y in zip(X, Y):
            gap = float((x - y) @ (x - y))
            if gap > 0:
                ratios.append(float((obj.average_grad(x) - obj.average_grad(y)) @ (x - y)) / gap)
        worst = min(ratios)
        report.add(
            "average gradient strongly monotone", worst >= mu * (1 - 1e-9),
            f"min ratio {worst:.6g} vs mu = {mu:.6g}", ratio=worst, mu=float(mu),
        )
    return report


def check_finite_difference(
    obj: Objective, rng: np.random.Generator, points: int = 100, h: float = 1e-5, tol: float = 1e-6
) -> ValidationReport:
    """Central-difference agreement of ``grad`` with ``value``."""
    worst = 0.0
    eye = np.eye(obj.d)
    for _ in range(points):
        i = int(rng.integers(0, obj.n))
        x = rng.uniform(-5.0, 5.0, size=obj.d)
        fd = np.array([(obj.value(i, x + h * e) - obj.value(i, x - h * e)) / (2 * h) for e in eye])
        g = obj.grad(i, x)
        worst = max(worst, float(np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1.0)))

    report = ValidationReport(title="Gradient finite-difference check")
    report.add("relative error within tolerance", worst <= tol, f"worst relative error {worst:.3e}", error=worst)
    return report
