"""Graphs, cuts, the brute-force MAX-CUT oracle and the incidence matrix.

Graph file format: a header line ``n m`` followed by ``m`` lines ``u v`` with
1-based vertex indices; ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq

from . import _kernels
from .matrix import DenseMatrix

DEFAULT_ENUM_LIMIT = 24


class GraphError(ValueError):
    """Invalid graph; ``lineno`` is set when raised while parsing a file."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class MalformedLineError(GraphError):
    pass


class VertexRangeError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class SelfLoopError(GraphError):
    pass


class DisconnectedGraphError(GraphError):
    pass


class EnumerationLimitError(ValueError):
    """Exhaustive enumeration requested above the configured size limit."""


def _components(n: int, edges: Iterable[tuple[int, int]]) -> int:
    parent = list(range(n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    count = n
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            count -= 1
    return count


@dataclass(frozen=True)
class Graph:
    """Connected simple undirected graph on vertices ``1..n``.

    Edges are stored as ``(u, v)`` with ``u < v`` in input order.
    """

    n: int
    edges: tuple

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise GraphError("graph needs at least one vertex")
        norm = []
        seen = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if not (1 <= u <= n and 1 <= v <= n):
                raise VertexRangeError(f"edge ({u}, {v}) outside 1..{n}")
            if u == v:
                raise SelfLoopError(f"self-loop at vertex {u}")
            e = (min(u, v), max(u, v))
            if e in seen:
                raise DuplicateEdgeError(f"duplicate edge {e}")
            seen.add(e)
            norm.append(e)
        if not norm:
            raise GraphError("graph needs at least one edge")
        if _components(n, norm) != 1:
            raise DisconnectedGraphError("graph is not connected")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """0-based endpoint arrays ``(eu, ev)``."""
        e = np.asarray(self.edges, dtype=np.int64) - 1
        return e[:, 0].copy(), e[:, 1].copy()

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex ``i`` renamed ``perm[i-1]`` (a permutation of 1..n)."""
        return Graph(self.n, tuple((perm[u - 1], perm[v - 1]) for u, v in self.edges))

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"] + [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CutResult:
    value: int
    witness: tuple


def parse_graph(text) -> Graph:
    """Parse the edge-list format, reporting the offending line on error."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header = None
    edges: list[tuple[int, int]] = []
    seen: dict = {}
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        last_line = lineno
        toks = body.split()
        if len(toks) != 2:
            raise MalformedLineError(f"expected two integers, got {body!r}", lineno)
        try:
            a, b = int(toks[0]), int(toks[1])
        except ValueError:
            raise MalformedLineError(f"non-integer token in {body!r}", lineno) from None
        if header is None:
            if a < 1 or b < 0:
                raise MalformedLineError("header must be 'n m' with n >= 1, m >= 0", lineno)
            header = (a, b)
            continue
        n = header[0]
        if not (1 <= a <= n and 1 <= b <= n):
            raise VertexRangeError(f"vertex index outside 1..{n}", lineno)
        if a == b:
            raise SelfLoopError(f"self-loop at vertex {a}", lineno)
        key = (min(a, b), max(a, b))
        if key in seen:
            raise DuplicateEdgeError(f"edge {key} already given on line {seen[key]}", lineno)
        seen[key] = lineno
        edges.append(key)
    if header is None:
        raise MalformedLineError("missing 'n m' header", 1)
    if len(edges) != header[1]:
        raise MalformedLineError(
            f"header declares {header[1]} edges, found {len(edges)}", last_line or 1)
    if not edges:
        raise GraphError("graph needs at least one edge", last_line or 1)
    if _components(header[0], edges) != 1:
        raise DisconnectedGraphError("graph is not connected", last_line)
    return Graph(header[0], tuple(edges))


def incidence_matrix(g: Graph) -> DenseMatrix:
    """Edge-vertex incidence matrix, +1 at the smaller endpoint, -1 at the larger."""
    rows = []
    for u, v in g.edges:
        r = [mpq(0)] * g.n
        r[u - 1] = mpq(1)
        r[v - 1] = mpq(-1)
        rows.append(r)
    return DenseMatrix(rows)


def cut_value(g: Graph, x: Sequence) -> int:
    """Number of edges whose endpoints get different signs in ``x``."""
    if len(x) != g.n:
        raise ValueError(f"sign vector has length {len(x)}, graph has {g.n} vertices")
    return sum(1 for u, v in g.edges if (x[u - 1] > 0) != (x[v - 1] > 0))


def mask_to_signs(mask: int, n: int) -> tuple:
    """Sign vector for an enumeration mask (coordinate 0 fixed at +1)."""
    return (1,) + tuple(-1 if (mask >> (j - 1)) & 1 else 1 for j in range(1, n))


def best_mask(values: np.ndarray, n: int, candidates: np.ndarray | None = None) -> int:
    """Mask of the lexicographically smallest sign vector among the maximizers.

    With -1 < +1 the smallest vector takes -1 as early as possible, which is
    the candidate whose bit-reversed mask is largest.
    """
    if candidates is None:
        candidates = np.flatnonzero(values == values.max())
    cand = np.asarray(candidates, dtype=np.int64)
    rev = np.zeros_like(cand)
    for j in range(n - 1):
        rev |= ((cand >> j) & 1) << (n - 2 - j)
    return int(cand[np.argmax(rev)])


def maxcut_bruteforce(g: Graph, limit: int = DEFAULT_ENUM_LIMIT) -> CutResult:
    """Exact MAX-CUT by Gray-code enumeration of all ``2**(n-1)`` cuts."""
    if g.n > limit:
        raise EnumerationLimitError(f"n = {g.n} exceeds enumeration limit {limit}")
    eu, ev = g.edge_arrays()
    values = _kernels.cut_values(g.n, eu, ev)
    mask = best_mask(values, g.n)
    return CutResult(int(values[mask]), mask_to_signs(mask, g.n))


def random_connected_graph(n: int, rng: np.random.Generator, density: float = 0.5) -> Graph:
    """Random spanning tree plus each remaining pair with probability ``density``."""
    if n < 2:
        raise ValueError("need n >= 2")
    order = rng.permutation(n) + 1
    edges = set()
    for i in range(1, n):
        a = int(order[i])
        b = int(order[rng.integers(0, i)])
        edges.add((min(a, b), max(a, b)))
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if (u, v) not in edges and rng.random() < density:
                edges.add((u, v))
    return Graph(n, tuple(sorted(edges)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(1, n)) + ((1, n),))


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(1, n)))


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, tuple((1, i) for i in range(2, leaves + 2)))
