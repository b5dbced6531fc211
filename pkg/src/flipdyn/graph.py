"""Undirected simple graphs on dense vertex indices, generators and edge-list I/O."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class GraphError(ValueError):
    """Invalid graph construction, generator parameters or edge-list text."""


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph with vertices ``0..n-1``.

    ``adjacency[v]`` is the sorted tuple of neighbours of ``v``.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    _nbr_sets: tuple[frozenset, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_nbr_sets", tuple(frozenset(a) for a in self.adjacency))

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbr_sets[u]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2


def build_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Build a graph from an edge iterable; duplicate edges are collapsed."""
    if n < 0:
        raise GraphError(f"vertex count must be nonnegative, got {n}")
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for e in edges:
        u, v = int(e[0]), int(e[1])
        for x in (u, v):
            if not 0 <= x < n:
                raise GraphError(f"endpoint {x} out of range [0, {n})")
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        nbrs[u].add(v)
        nbrs[v].add(u)
    return Graph(n, tuple(tuple(sorted(s)) for s in nbrs))


def _random_regular(n: int, d: int, seed, max_tries: int = 100_000) -> Graph:
    """Uniform simple d-regular graph by the pairing model with rejection.

    Dense requests are served by complementing a sparse sample, which keeps
    the law uniform and the rejection rate low.
    """
    if d < 0 or d >= max(n, 1) or (n * d) % 2:
        raise GraphError(f"no simple {d}-regular graph on {n} vertices")
    if 2 * d > n - 1:
        sparse = _random_regular(n, n - 1 - d, seed, max_tries)
        return build_graph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if not sparse.has_edge(u, v)])
    rng = random.Random(seed)
    points = [v for v in range(n) for _ in range(d)]
    for _ in range(max_tries):
        rng.shuffle(points)
        edges = set()
        ok = True
        for i in range(0, len(points), 2):
            u, v = points[i], points[i + 1]
            if u == v or (min(u, v), max(u, v)) in edges:
                ok = False
                break
            edges.add((min(u, v), max(u, v)))
        if ok:
            return build_graph(n, sorted(edges))
    raise GraphError(f"pairing model failed after {max_tries} tries (n={n}, d={d})")


def generate(kind: str, seed=None, **params) -> Graph:
    """Generate a graph of a named family.

    kinds: ``cycle`` (n), ``path`` (n), ``grid`` (rows, cols),
    ``complete_bipartite`` (m, n), ``random_regular`` (n, d; uses ``seed``).
    """
    try:
        if kind == "cycle":
            n = int(params["n"])
            if n < 3:
                raise GraphError(f"cycle needs n >= 3, got {n}")
            return build_graph(n, [(i, (i + 1) % n) for i in range(n)])
        if kind == "path":
            n = int(params["n"])
            if n < 1:
                raise GraphError(f"path needs n >= 1, got {n}")
            return build_graph(n, [(i, i + 1) for i in range(n - 1)])
        if kind == "grid":
            rows, cols = int(params["rows"]), int(params["cols"])
            if rows < 1 or cols < 1:
                raise GraphError("grid needs rows, cols >= 1")
            idx = lambda r, c: r * cols + c  # noqa: E731
            edges = [(idx(r, c), idx(r, c + 1)) for r in range(rows) for c in range(cols - 1)]
            edges += [(idx(r, c), idx(r + 1, c)) for r in range(rows - 1) for c in range(cols)]
            return build_graph(rows * cols, edges)
        if kind == "complete_bipartite":
            m, n = int(params["m"]), int(params["n"])
            if m < 1 or n < 1:
                raise GraphError("complete_bipartite needs m, n >= 1")
            return build_graph(m + n, [(i, m + j) for i in range(m) for j in range(n)])
        if kind == "random_regular":
            return _random_regular(int(params["n"]), int(params["d"]), seed)
    except KeyError as exc:
        raise GraphError(f"missing parameter {exc} for {kind}") from None
    raise GraphError(f"unknown graph kind {kind!r}")


def read_edge_list(text: str) -> Graph:
    """Parse the edge-list format: first line ``n``, then ``u v`` per line.

    Lines starting with ``#`` and blank lines are ignored.
    """
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise GraphError(f"line {lineno}: expected integers, got {line!r}") from None
        if n is None:
            if len(values) != 1 or values[0] < 0:
                raise GraphError(f"line {lineno}: expected vertex count, got {line!r}")
            n = values[0]
            continue
        if len(values) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {line!r}")
        u, v = values
        for x in (u, v):
            if not 0 <= x < n:
                raise GraphError(f"line {lineno}: endpoint {x} out of range [0, {n})")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at vertex {u}")
        edges.append((u, v))
    if n is None:
        raise GraphError("empty edge list: missing vertex count")
    return build_graph(n, edges)


def write_edge_list(g: Graph) -> str:
    lines = [str(g.n)] + [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"
