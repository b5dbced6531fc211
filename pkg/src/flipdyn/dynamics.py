"""One synchronous round of the cluster-flip chain, plus sequential baselines."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from flipdyn.clusters import Cluster, color_pair, component, flip_colors
from flipdyn.coloring import Coloring, is_proper
from flipdyn.graph import Graph
from flipdyn.rng import STREAM_ACTIVATE, STREAM_FLIP, key_word, keyed_uniform, keyed_uniform_np
from flipdyn.schedules import FlipSchedule, vigoda_schedule

KEYINGS = ("canonical", "target")


def theory_alpha(k: int, max_degree: int) -> Fraction:
    """``eps / (5000 k)`` with ``eps = k/Delta - 11/6`` clamped to ``[1/1000, 1]``."""
    if max_degree == 0:
        eps = Fraction(1)
    else:
        eps = Fraction(k, max_degree) - Fraction(11, 6)
    eps = min(max(eps, Fraction(1, 1000)), Fraction(1))
    return eps / (5000 * k)


@dataclass(frozen=True)
class RoundParams:
    """Activation probability, schedule and randomness key for a round.

    ``keying`` picks the key under which a cluster's coins are drawn:
    ``canonical`` uses (pres, sorted pair); ``target`` uses (pres, color that
    pres takes after the flip).
    """

    alpha: Fraction | float = Fraction(1, 100)
    schedule: FlipSchedule = field(default_factory=vigoda_schedule)
    seed: int = 0
    round_index: int = 0
    keying: str = "canonical"

    def __post_init__(self) -> None:
        alpha = self.alpha
        if isinstance(alpha, (int, str)):
            alpha = Fraction(alpha)
            object.__setattr__(self, "alpha", alpha)
        if not 0 <= alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.keying not in KEYINGS:
            raise ValueError(f"keying must be one of {KEYINGS}")

    @property
    def alpha_float(self) -> float:
        return float(self.alpha)

    def at(self, round_index: int) -> "RoundParams":
        return replace(self, round_index=round_index)


def _key_parts(col_v: int, c: int, keying: str) -> tuple[int, int]:
    if keying == "target":
        return c, 0
    return (col_v, col_v) if c == col_v else (min(col_v, c), max(col_v, c))


def cluster_word(cl: Cluster, col: Sequence[int], keying: str, stream: int) -> int:
    """Coin word of a cluster in the coloring ``col``."""
    v = cl.pres
    a = col[v]
    c = a if len(cl.colors) == 1 else (cl.colors[1] if cl.colors[0] == a else cl.colors[0])
    lo, hi = _key_parts(a, c, keying)
    return key_word(v, lo, hi, stream)


def activation_words(col: Sequence[int], k: int, keying: str, stream: int = STREAM_ACTIVATE) -> np.ndarray:
    """Words for every (v, c) query; row v, column c-1."""
    n = len(col)
    colv = np.asarray(col, dtype=np.uint64)[:, None]
    cs = np.arange(1, k + 1, dtype=np.uint64)[None, :]
    verts = np.arange(n, dtype=np.uint64)[:, None]
    if keying == "target":
        lo, hi = np.broadcast_to(cs, (n, k)), np.zeros((n, k), dtype=np.uint64)
    else:
        lo, hi = np.minimum(colv, cs), np.maximum(colv, cs)
    return (verts << np.uint64(24)) | (lo << np.uint64(12)) | (hi << np.uint64(3)) | np.uint64(stream)


@dataclass(frozen=True)
class RoundTrace:
    active: tuple[Cluster, ...] = ()
    deactivated_overlap: tuple[Cluster, ...] = ()
    deactivated_conflict: tuple[Cluster, ...] = ()
    flipped: tuple[Cluster, ...] = ()

    @property
    def flippable(self) -> tuple[Cluster, ...]:
        dead = set(self.deactivated_overlap) | set(self.deactivated_conflict)
        return tuple(cl for cl in self.active if cl not in dead)

    def to_json(self) -> dict:
        return {
            name: [cl.to_json() for cl in getattr(self, name)]
            for name in ("active", "deactivated_overlap", "deactivated_conflict", "flipped")
        }


def active_clusters(g: Graph, col: Sequence[int], k: int, seed: int, rnd: int, alpha: float,
                    keying: str = "canonical") -> list[Cluster]:
    """Clusters whose activation coin is heads, found from the active (pres, c) queries."""
    if alpha <= 0:
        return []
    u = keyed_uniform_np(seed, rnd, activation_words(col, k, keying))
    out = []
    for v, ci in np.argwhere(u < alpha):
        v, c = int(v), int(ci) + 1
        comp = component(g.adjacency, col, v, c, cap=6)
        if comp is not None and comp[0] == v:
            out.append(Cluster(comp, color_pair(col[v], c)))
    out.sort()
    return out


def resolve(g: Graph, active: Iterable[Cluster]) -> tuple[list[Cluster], list[Cluster], list[Cluster]]:
    """Split active clusters into (overlapped, conflicted, flippable)."""
    active = list(active)
    at_vertex: dict[int, list[int]] = {}
    for i, cl in enumerate(active):
        for u in cl.vertices:
            at_vertex.setdefault(u, []).append(i)
    overlapped, conflicted, free = [], [], []
    for i, S in enumerate(active):
        if any(j != i for u in S.vertices for j in at_vertex[u]):
            overlapped.append(S)
            continue
        pair = set(S.colors)
        hit = False
        for u in S.vertices:
            for w in g.adjacency[u]:
                for j in at_vertex.get(w, ()):
                    if j != i and not pair.isdisjoint(active[j].colors):
                        hit = True
                        break
                if hit:
                    break
            if hit:
                break
        (conflicted if hit else free).append(S)
    return overlapped, conflicted, free


def _require_proper(g: Graph, sigma: Coloring) -> None:
    if not is_proper(g, sigma):
        raise ValueError("the chain requires a proper coloring")
    if sigma.k < g.max_degree + 2:
        warnings.warn(f"k={sigma.k} < max_degree+2={g.max_degree + 2}: ergodicity is not guaranteed", stacklevel=3)


def distributed_round(g: Graph, sigma: Coloring, params: RoundParams, check: bool = True
                      ) -> tuple[Coloring, RoundTrace]:
    """Activate, discard interfering clusters, flip the survivors."""
    if check:
        _require_proper(g, sigma)
    col = sigma.colors
    act = active_clusters(g, col, sigma.k, params.seed, params.round_index, params.alpha_float, params.keying)
    if not act:
        return sigma, RoundTrace()
    over, confl, free = resolve(g, act)
    flipped = []
    new = list(col)
    for cl in free:
        p = float(params.schedule[cl.size])
        u = keyed_uniform(params.seed, params.round_index, cluster_word(cl, col, params.keying, STREAM_FLIP))
        if u < p:
            flipped.append(cl)
            new = flip_colors(new, cl)
    out = Coloring(tuple(new), sigma.k) if flipped else sigma
    return out, RoundTrace(tuple(act), tuple(over), tuple(confl), tuple(flipped))


def run_chain(g: Graph, sigma0: Coloring, params: RoundParams, T: int, trajectory: bool = True):
    """Run ``T`` rounds with indices ``params.round_index + t``.

    Returns ``[sigma_0, ..., sigma_T]`` or just ``sigma_T``.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    _require_proper(g, sigma0)
    sigma = sigma0
    path = [sigma0]
    for t in range(T):
        sigma, _ = distributed_round(g, sigma, params.at(params.round_index + t), check=False)
        if trajectory:
            path.append(sigma)
    return path if trajectory else sigma


def glauber_step(g: Graph, sigma: Coloring, rng) -> Coloring:
    """Metropolis single-site update with a uniform vertex and color."""
    v = rng.randrange(g.n)
    c = rng.randrange(1, sigma.k + 1)
    if c == sigma[v] or any(sigma[w] == c for w in g.adjacency[v]):
        return sigma
    return sigma.recolor(v, c)


def sequential_flip_step(g: Graph, sigma: Coloring, schedule: FlipSchedule, rng) -> Coloring:
    """Pick a uniform (v, c); flip ``S(v, c)`` with probability ``schedule[s] / s``."""
    v = rng.randrange(g.n)
    c = rng.randrange(1, sigma.k + 1)
    comp = component(g.adjacency, sigma.colors, v, c, cap=6)
    if comp is None:
        return sigma
    s = len(comp)
    if rng.random() >= float(schedule[s]) / s:
        return sigma
    return Coloring(tuple(flip_colors(sigma.colors, Cluster(comp, color_pair(sigma[v], c)))), sigma.k)
