"""Directed communication topologies, weight matrices and Perron vectors.

Edges follow the convention ``(i, j)``: agent ``j`` can send information to
agent ``i``, so ``j`` is an in-neighbor of ``i``. Agents are indexed from 0
inside the library; the edge-list file format is 1-indexed (see ``parser``).
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import FrozenSet, Iterable, List, NamedTuple, Optional, Set, Tuple

import networkx as nx
import numpy as np

from .errors import InvalidInputError, InvalidTopologyError, NumericalFailureError
from .report import ValidationReport

logger = logging.getLogger(__name__)

STOCHASTIC_TOL = 1e-12
EIGEN_TOL = 1e-10
EIGEN_MAX_ITER = 100_000


@dataclass(frozen=True)
class Digraph:
    """Directed graph on agents ``0..n-1`` without self-loops."""
    n: int
    edges: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidTopologyError(f"agent count must be at least 1, got {self.n}")
        object.__setattr__(self, "edges", frozenset((int(i), int(j)) for i, j in self.edges))
        for i, j in self.edges:
            if i == j:
                raise InvalidTopologyError(f"self-loop on agent {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidTopologyError(f"edge ({i}, {j}) outside agents 0..{self.n - 1}")

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Tuple[int, int]]) -> "Digraph":
        return cls(n=n, edges=frozenset(pairs))

    def in_neighbors(self, i: int) -> List[int]:
        """Agents that send to ``i``."""
        return sorted(j for (a, j) in self.edges if a == i)

    def out_neighbors(self, i: int) -> List[int]:
        """Agents that receive from ``i``."""
        return sorted(a for (a, j) in self.edges if j == i)

    def adjacency(self) -> np.ndarray:
        """0/1 matrix with ``A[i, j] = 1`` for every edge ``(i, j)``."""
        A = np.zeros((self.n, self.n))
        for i, j in self.edges:
            A[i, j] = 1.0
        return A

    def reversed(self) -> "Digraph":
        """Same agents with every information flow reversed."""
        return Digraph(n=self.n, edges=frozenset((j, i) for i, j in self.edges))

    def to_networkx(self) -> nx.DiGraph:
        """Information-flow digraph: arc ``j -> i`` for edge ``(i, j)``."""
        G = nx.DiGraph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from((j, i) for i, j in self.edges)
        return G

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class WeightPair:
    """Row-stochastic ``R`` (pull) and column-stochastic ``C`` (push)."""
    R: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        C = np.asarray(self.C, dtype=float)
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape != C.shape:
            raise InvalidInputError(f"R and C must be equal square matrices, got {R.shape}, {C.shape}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "C", C)

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @cached_property
    def R_offdiag(self) -> np.ndarray:
        """Weights applied to pulled noise; the self term carries none."""
        return self.R - np.diag(np.diag(self.R))

    @cached_property
    def C_adjacency(self) -> np.ndarray:
        """0/1 in-neighbor pattern of the push graph."""
        A = (self.C > 0).astype(float)
        np.fill_diagonal(A, 0.0)
        return A

    def pull_graph(self) -> "Digraph":
        return induced_digraph(self.R)

    def push_graph(self) -> "Digraph":
        return induced_digraph(self.C)


class EigenPair(NamedTuple):
    """Left Perron vector ``u`` of R and right Perron vector ``v`` of C."""
    u: np.ndarray
    v: np.ndarray
    residual_u: float
    residual_v: float
    iterations: int


class ContractionRadii(NamedTuple):
    """Spectral radii of ``C_gamma - v1'/n`` and ``R - 1u'/n``."""
    push: float
    pull: float


def ring_plus_random(n: int, p: float, rng: np.random.Generator) -> Digraph:
    """
    Directed cycle ``0 -> 1 -> ... -> n-1 -> 0`` plus random extra links.

    Every ordered pair not already on the cycle is added independently with
    probability ``p``; ``(i, j)`` and ``(j, i)`` are separate coin flips.

    Args:
        n: Number of agents (at least 2)
        p: Link probability in [0, 1]
        rng: Seeded generator; the result is a pure function of its state

    Returns:
        The generated digraph
    """
    if n < 2:
        raise InvalidTopologyError(f"ring needs at least 2 agents, got {n}")
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"link probability must lie in [0, 1], got {p}")

    ring = {((i + 1) % n, i) for i in range(n)}
    coins = rng.random((n, n))
    extra = {
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and (i, j) not in ring and coins[i, j] < p
    }
    return Digraph(n=n, edges=frozenset(ring | extra))


def spanning_tree_roots(g: Digraph) -> Set[int]:
    """Agents from which every other agent is reachable along information flow."""
    # roots are the members of the unique source component of the condensation
    cond = nx.condensation(g.to_networkx())
    sources = [c for c in cond.nodes if cond.in_degree(c) == 0]
    if len(sources) != 1:
        return set()
    return set(cond.nodes[sources[0]]["members"])


def induced_digraph(W: np.ndarray) -> Digraph:
    """Digraph with edge ``(i, j)`` for each positive off-diagonal ``W[i, j]``."""
    W = np.asarray(W, dtype=float)
    rows, cols = np.nonzero(W > 0)
    return Digraph(n=W.shape[0], edges=frozenset((int(i), int(j)) for i, j in zip(rows, cols) if i != j))


def check_assumption2(gR: Digraph, gC: Digraph) -> ValidationReport:
    """
    Check that G_R and G_{C^T} share a spanning-tree root.

    ``gC`` is the push graph (edge ``(i, j)`` when ``C[i, j] > 0``); G_{C^T}
    reverses its information flow.
    """
    if gR.n != gC.n:
        raise InvalidInputError(f"graphs have different agent counts: {gR.n} vs {gC.n}")

    roots_R = spanning_tree_roots(gR)
    roots_CT = spanning_tree_roots(gC.reversed())
    common = roots_R & roots_CT

    report = ValidationReport(title="Assumption 2 (ii): common spanning-tree root")
    report.add("G_R has a spanning tree", bool(roots_R), f"{len(roots_R)} root(s)")
    report.add("G_C^T has a spanning tree", bool(roots_CT), f"{len(roots_CT)} root(s)")
    report.add("common root exists", bool(common), f"{len(common)} common root(s)")
    report.values.update(
        roots_R=sorted(roots_R),
        roots_CT=sorted(roots_CT),
        intersection=sorted(common),
    )
    return report


def build_weights(g: Digraph, gC: Optional[Digraph] = None) -> WeightPair:
    """
    Uniform neighbor weights.

    ``R[i, j] = 1/(|N_in(i)|+1)`` for in-neighbors ``j`` and
    ``C[j, i] = 1/(|N_out(i)|+1)`` for out-neighbors ``j``; the diagonal
    takes the remaining mass. ``gC`` defaults to ``g``.
    """
    gC = g if gC is None else gC
    if gC.n != g.n:
        raise InvalidInputError(f"graphs have different agent counts: {g.n} vs {gC.n}")
    n = g.n

    R = np.zeros((n, n))
    for i in range(n):
        senders = g.in_neighbors(i)
        for j in senders:
            R[i, j] = 1.0 / (len(senders) + 1)
        R[i, i] = 1.0 - R[i].sum()

    C = np.zeros((n, n))
    for i in range(n):
        receivers = gC.out_neighbors(i)
        for j in receivers:
            C[j, i] = 1.0 / (len(receivers) + 1)
        C[i, i] = 1.0 - C[:, i].sum()

    return WeightPair(R=R, C=C)


def check_stochasticity(w: WeightPair, tol: float = STOCHASTIC_TOL) -> ValidationReport:
    """Assumption 2 (i): nonnegativity, stochasticity and positive diagonals."""
    row_dev = float(np.max(np.abs(w.R.sum(axis=1) - 1.0)))
    col_dev = float(np.max(np.abs(w.C.sum(axis=0) - 1.0)))

    report = ValidationReport(title="Assumption 2 (i): weight matrices")
    report.add("R nonnegative", bool(np.all(w.R >= 0)))
    report.add("C nonnegative", bool(np.all(w.C >= 0)))
    report.add("R row-stochastic", row_dev <= tol, f"max row-sum deviation {row_dev:.3e}", deviation=row_dev)
    report.add("C column-stochastic", col_dev <= tol, f"max column-sum deviation {col_dev:.3e}", deviation=col_dev)
    report.add("R diagonal positive", bool(np.all(np.diag(w.R) > 0)))
    report.add("C diagonal positive", bool(np.all(np.diag(w.C) > 0)))
    return report


def mixing_matrices(w: WeightPair, beta: float, gamma: float) -> Tuple[np.ndarray, np.ndarray]:
    """``R_k = (1-beta)I + beta R`` and ``C_gamma = (1-gamma)I + gamma C``."""
    eye = np.eye(w.n)
    return (1.0 - beta) * eye + beta * w.R, (1.0 - gamma) * eye + gamma * w.C


def _power_iterate(M: np.ndarray, start: np.ndarray, tol: float, max_iter: int) -> Tuple[np.ndarray, float, int]:
    n = M.shape[0]
    x = np.asarray(start, dtype=float).copy()
    if x.shape != (n,) or np.any(x < 0) or x.sum() <= 0:
        raise InvalidInputError("starting vector must be nonnegative with positive mass")
    x *= n / x.sum()

    residual = float(np.linalg.norm(M @ x - x))
    for it in range(1, max_iter + 1):
        if residual <= tol:
            return x, residual, it - 1
        x = M @ x
        x *= n / x.sum()
        residual = float(np.linalg.norm(M @ x - x))
    if residual <= tol:
        return x, residual, max_iter
    raise NumericalFailureError(
        f"power iteration did not reach residual {tol:g} in {max_iter} sweeps (last {residual:.3e})",
        residual=residual,
    )


def perron_vectors(
    w: WeightPair,
    tol: float = EIGEN_TOL,
    max_iter: int = EIGEN_MAX_ITER,
    u0: Optional[np.ndarray] = None,
    v0: Optional[np.ndarray] = None,
) -> EigenPair:
    """
    Perron vectors by power iteration.

    ``u`` solves ``u'R = u'`` with ``u'1 = n`` (iteration on ``R^T``) and
    ``v`` solves ``Cv = v`` with ``1'v = n`` (iteration on ``C``).
    """
    ones = np.ones(w.n)
    u, res_u, it_u = _power_iterate(w.R.T, ones if u0 is None else u0, tol, max_iter)
    v, res_v, it_v = _power_iterate(w.C, ones if v0 is None else v0, tol, max_iter)

    if float(u @ v) <= 0:
        raise NumericalFailureError("Perron vectors have disjoint support (u'v = 0)", residual=0.0)

    logger.debug(f"Perron vectors converged in {it_u}/{it_v} sweeps")
    return EigenPair(u=u, v=v, residual_u=res_u, residual_v=res_v, iterations=max(it_u, it_v))


def spectral_radius(M: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def contraction_check(w: WeightPair, gamma: float, e: EigenPair) -> ContractionRadii:
    """Spectral radii of ``C_gamma - v1'/n`` and ``R - 1u'/n``."""
    if not 0.0 < gamma <= 1.0:
        raise InvalidInputError(f"gamma must lie in (0, 1], got {gamma}")
    n = w.n
    ones = np.ones(n)
    _, C_gamma = mixing_matrices(w, 1.0, gamma)
    return ContractionRadii(
        push=spectral_radius(C_gamma - np.outer(e.v, ones) / n),
        pull=spectral_radius(w.R - np.outer(ones, e.u) / n),
    )
