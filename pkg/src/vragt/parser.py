"""Text formats for graphs, weight matrices and ridge instances."""

import re
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from .errors import InvalidInputError
from .graph import Digraph
from .problems import RidgeInstance

PathLike = Union[str, Path]


class EdgeListParser:
    """
    Parse the 1-indexed edge-list format::

        n 4
        2 1
        3 2

    Each body line ``i j`` means agent ``j`` can send to agent ``i``. Blank
    lines and ``#`` comments are ignored.
    """

    HEADER_PATTERN = re.compile(r"^n\s+(\d+)$")
    EDGE_PATTERN = re.compile(r"^(\d+)\s+(\d+)$")

    def parse(self, text: str) -> Digraph:
        n = None
        pairs: List[Tuple[int, int]] = []

        for line_number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue

            if n is None:
                match = self.HEADER_PATTERN.match(line)
                if not match:
                    raise InvalidInputError(f"line {line_number}: expected header 'n <count>', got {raw!r}")
                n = int(match.group(1))
                continue

            match = self.EDGE_PATTERN.match(line)
            if not match:
                raise InvalidInputError(f"line {line_number}: expected 'i j', got {raw!r}")
            i, j = int(match.group(1)), int(match.group(2))
            if not (1 <= i <= n and 1 <= j <= n):
                raise InvalidInputError(f"line {line_number}: agent index outside 1..{n}")
            pairs.append((i - 1, j - 1))

        if n is None:
            raise InvalidInputError("edge list is empty")
        return Digraph.from_pairs(n, pairs)

    def format(self, g: Digraph) -> str:
        lines = [f"n {g.n}"]
        lines.extend(f"{i + 1} {j + 1}" for i, j in sorted(g.edges))
        return "\n".join(lines) + "\n"


class InstanceParser:
    """
    Parse the ridge-instance text format.

    Header ``n d1 d r``; then, for each agent, ``d1`` lines holding the rows
    of ``M_i`` followed by one line with the ``d1`` entries of ``v_i``. An
    optional final line ``truth x_1 ... x_d`` stores the ground truth.
    """

    def parse(self, text: str) -> RidgeInstance:
        rows = [line.split('#', 1)[0].split() for line in text.splitlines()]
        rows = [r for r in rows if r]
        if not rows or len(rows[0]) != 4:
            raise InvalidInputError("instance header must be 'n d1 d r'")

        try:
            n, d1, d = (int(tok) for tok in rows[0][:3])
            r = float(rows[0][3])
            body = rows[1:]
            truth = None
            if body and body[-1][0] == "truth":
                truth = np.array([float(tok) for tok in body[-1][1:]])
                body = body[:-1]
            values = [[float(tok) for tok in row] for row in body]
        except ValueError as e:
            raise InvalidInputError(f"malformed instance file: {e}") from e

        per_agent = d1 + 1
        if len(values) != n * per_agent:
            raise InvalidInputError(f"expected {n * per_agent} data lines, found {len(values)}")

        M = np.empty((n, d1, d))
        v = np.empty((n, d1))
        for i in range(n):
            block = values[i * per_agent:(i + 1) * per_agent]
            if any(len(row) != d for row in block[:d1]) or len(block[d1]) != d1:
                raise InvalidInputError(f"agent {i + 1}: row lengths do not match d1={d1}, d={d}")
            M[i] = block[:d1]
            v[i] = block[d1]

        if truth is None:
            truth = np.zeros(d)
            nu = np.zeros((n, d1))
        else:
            if truth.shape != (d,):
                raise InvalidInputError(f"truth line must hold {d} values")
            nu = v - np.einsum("ijk,k->ij", M, truth)
        return RidgeInstance(M=M, v=v, r=r, x_true=truth, nu=nu)

    def format(self, inst: RidgeInstance) -> str:
        n, d1, d = inst.M.shape
        lines = [f"{n} {d1} {d} {inst.r!r}"]
        for i in range(n):
            lines.extend(" ".join(repr(float(x)) for x in row) for row in inst.M[i])
            lines.append(" ".join(repr(float(x)) for x in inst.v[i]))
        lines.append("truth " + " ".join(repr(float(x)) for x in inst.x_true))
        return "\n".join(lines) + "\n"


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InvalidInputError(f"could not read {path}: {e}") from e


def read_graph(path: PathLike) -> Digraph:
    return EdgeListParser().parse(_read_text(path))


def write_graph(g: Digraph, path: PathLike):
    Path(path).write_text(EdgeListParser().format(g))


def read_instance(path: PathLike) -> RidgeInstance:
    return InstanceParser().parse(_read_text(path))


def write_instance(inst: RidgeInstance, path: PathLike):
    Path(path).write_text(InstanceParser().format(inst))


def read_weight_matrix(path: PathLike) -> np.ndarray:
    """Whitespace-separated square matrix, one row per line."""
    try:
        W = np.loadtxt(path, ndmin=2)
    except OSError as e:
        raise InvalidInputError(f"could not read {path}: {e}") from e
    except ValueError as e:
        raise InvalidInputError(f"malformed weight matrix {path}: {e}") from e
    if W.shape[0] != W.shape[1]:
        raise InvalidInputError(f"weight matrix must be square, got {W.shape}")
    return W
