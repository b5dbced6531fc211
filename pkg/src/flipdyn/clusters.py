"""Cluster detection, enumeration, interference relations and cluster distance."""

from __future__ import annotations

import math
from collections import deque
from typing import Iterator, NamedTuple, Sequence

from flipdyn.coloring import AdjacentPair, Coloring, colors_of
from flipdyn.graph import Graph

MAX_CLUSTER = 6


class _TooLarge:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TOO_LARGE"

    def __bool__(self) -> bool:
        return False


TOO_LARGE = _TooLarge()


class Cluster(NamedTuple):
    """Vertex set (sorted) and color pair (sorted; one entry when degenerate)."""

    vertices: tuple[int, ...]
    colors: tuple[int, ...]

    @property
    def pres(self) -> int:
        return self.vertices[0]

    @property
    def key(self) -> tuple[int, tuple[int, ...]]:
        return (self.vertices[0], self.colors)

    @property
    def size(self) -> int:
        return len(self.vertices)

    @property
    def degenerate(self) -> bool:
        return len(self.colors) == 1

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "colors": list(self.colors)}


def color_pair(a: int, c: int) -> tuple[int, ...]:
    return (a,) if a == c else ((a, c) if a < c else (c, a))


def component(adj: Sequence[Sequence[int]], col: Sequence[int], v: int, c: int,
              cap: int | None = None) -> tuple[int, ...] | None:
    """Vertices reachable from ``v`` along ``(col[v], c)`` alternating paths.

    Returns ``None`` once more than ``cap`` vertices are found.
    """
    a = col[v]
    if a == c:
        return (v,)
    members = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        want = c if col[u] == a else a
        for w in adj[u]:
            if col[w] == want and w not in members:
                members.add(w)
                if cap is not None and len(members) > cap:
                    return None
                stack.append(w)
    return tuple(sorted(members))


def flip_colors(col: Sequence[int], cl: Cluster) -> list[int]:
    """Return a copy of ``col`` with the pair of ``cl`` interchanged on its vertices."""
    out = list(col)
    if len(cl.colors) == 2:
        x, y = cl.colors
        for u in cl.vertices:
            out[u] = y if out[u] == x else x
    return out


def cluster_at(g: Graph, sigma, v: int, c: int):
    """The cluster ``S(v, c)`` or ``TOO_LARGE`` for components above six vertices."""
    col = colors_of(sigma)
    if isinstance(sigma, Coloring) and not 1 <= c <= sigma.k:
        raise ValueError(f"color {c} outside 1..{sigma.k}")
    comp = component(g.adjacency, col, v, c, cap=MAX_CLUSTER)
    if comp is None:
        return TOO_LARGE
    return Cluster(comp, color_pair(col[v], c))


def raw_clusters(adj: Sequence[Sequence[int]], col: Sequence[int], k: int) -> list[Cluster]:
    """All clusters, each component explored once, sorted by identity key."""
    out: list[Cluster] = []
    seen: set[tuple[int, int]] = set()
    for v in range(len(col)):
        a = col[v]
        nbr_cols = {col[w] for w in adj[v]}
        for c in range(1, k + 1):
            if c == a or c not in nbr_cols:
                out.append(Cluster((v,), color_pair(a, c)))
            elif (v, c) not in seen:
                comp = component(adj, col, v, c)
                for u in comp:
                    seen.add((u, c if col[u] == a else a))
                if len(comp) <= MAX_CLUSTER:
                    out.append(Cluster(comp, color_pair(a, c)))
    out.sort()
    return out


class ClusterSet:
    """Deduplicated clusters of a coloring with a vertex index."""

    def __init__(self, clusters: Sequence[Cluster], n: int):
        self.clusters: tuple[Cluster, ...] = tuple(sorted(set(clusters)))
        index: list[list[Cluster]] = [[] for _ in range(n)]
        for cl in self.clusters:
            for u in cl.vertices:
                index[u].append(cl)
        self.index: tuple[tuple[Cluster, ...], ...] = tuple(tuple(x) for x in index)
        self._members = frozenset(self.clusters)

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self) -> Iterator[Cluster]:
        return iter(self.clusters)

    def __contains__(self, cl) -> bool:
        return cl in self._members

    def position(self) -> dict[Cluster, int]:
        return {cl: i for i, cl in enumerate(self.clusters)}


def enumerate_clusters(g: Graph, sigma: Coloring) -> ClusterSet:
    return ClusterSet(raw_clusters(g.adjacency, sigma.colors, sigma.k), g.n)


def overlap(S: Cluster, T: Cluster) -> bool:
    return not set(S.vertices).isdisjoint(T.vertices)


def adjacent_clusters(g: Graph, S: Cluster, T: Cluster) -> bool:
    tv = set(T.vertices)
    return any(w in tv for u in S.vertices for w in g.adjacency[u])


def conflict(g: Graph, S: Cluster, T: Cluster) -> bool:
    """Distinct clusters with adjacent members and intersecting color pairs."""
    if S == T or set(S.colors).isdisjoint(T.colors):
        return False
    return adjacent_clusters(g, S, T)


def interference_lists(g: Graph, cs: ClusterSet) -> list[list[int]]:
    """For each cluster index, the indices of other clusters that overlap or conflict with it."""
    pos = cs.position()
    out: list[list[int]] = []
    for i, S in enumerate(cs.clusters):
        found: set[int] = set()
        near = set(S.vertices)
        for u in S.vertices:
            near.update(g.adjacency[u])
        sv = set(S.vertices)
        for u in near:
            for T in cs.index[u]:
                j = pos[T]
                if j == i or j in found:
                    continue
                # T holds u, so it is adjacent to S unless it overlaps
                if not sv.isdisjoint(T.vertices) or not set(S.colors).isdisjoint(T.colors):
                    found.add(j)
        out.append(sorted(found))
    return out


def cluster_distances(g: Graph, sigma: Coloring, v_star: int,
                      cs: ClusterSet | None = None) -> dict[Cluster, float]:
    """Distance from the ``{v_star}`` singletons to every cluster in the cluster graph."""
    cs = cs if cs is not None else enumerate_clusters(g, sigma)
    dist: dict[Cluster, float] = {cl: math.inf for cl in cs}
    queue: deque[Cluster] = deque()
    for cl in cs.index[v_star]:
        if cl.vertices == (v_star,):
            dist[cl] = 0
            queue.append(cl)
    while queue:
        S = queue.popleft()
        touched = {w for u in S.vertices for w in g.adjacency[u]}
        for w in touched:
            for T in cs.index[w]:
                if dist[T] == math.inf:
                    dist[T] = dist[S] + 1
                    queue.append(T)
    return dist


def cluster_distance(g: Graph, pair: AdjacentPair, chain: str, T: Cluster) -> float:
    """Cluster-graph distance of ``T`` from the disagreement (``inf`` when unreachable)."""
    if chain not in ("X", "Y"):
        raise ValueError(f"chain must be 'X' or 'Y', got {chain!r}")
    sigma = pair.X if chain == "X" else pair.Y
    cs = enumerate_clusters(g, sigma)
    if T not in cs:
        raise ValueError(f"{T} is not a cluster of chain {chain}")
    return cluster_distances(g, sigma, pair.v_star, cs)[T]
