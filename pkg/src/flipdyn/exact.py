"""Exact finite-state analysis of the flip chain on tiny instances.

Transition rows are computed in exact rationals by enumerating every
activation pattern and every flip outcome. A vectorised batch engine runs
many independent chains over a precomputed state space for Monte Carlo
comparisons.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from flipdyn.clusters import Cluster, flip_colors, raw_clusters
from flipdyn.coloring import Coloring, is_proper
from flipdyn.dynamics import RoundParams, cluster_word
from flipdyn.graph import Graph
from flipdyn.rng import STREAM_ACTIVATE, STREAM_FLIP, derive_seeds_np, keyed_uniform_np
from flipdyn.schedules import FlipSchedule

STATE_BUDGET = 100_000
CLUSTER_BUDGET = 16  # 2**16 activation patterns


class BudgetError(ValueError):
    """An exact computation would exceed its enumeration budget."""


@dataclass(frozen=True)
class StateSpace:
    graph: Graph
    k: int
    states: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    def __len__(self) -> int:
        return len(self.states)

    def index(self, sigma) -> int:
        key = sigma.colors if isinstance(sigma, Coloring) else tuple(sigma)
        return self._index[key]

    def __contains__(self, sigma) -> bool:
        key = sigma.colors if isinstance(sigma, Coloring) else tuple(sigma)
        return key in self._index

    def coloring(self, i: int) -> Coloring:
        return Coloring(self.states[i], self.k)

    def codes(self) -> np.ndarray:
        """Base-k integer code of each state, increasing with state index."""
        n = self.graph.n
        powers = self.k ** np.arange(n - 1, -1, -1, dtype=np.int64)
        arr = np.asarray(self.states, dtype=np.int64).reshape(len(self.states), n) - 1
        return arr @ powers


def enumerate_colorings(g: Graph, k: int, budget: int = STATE_BUDGET) -> StateSpace:
    """All proper k-colorings of ``g`` in lexicographic order."""
    n = g.n
    col = [0] * n
    out: list[tuple[int, ...]] = []

    def rec(v: int) -> None:
        if v == n:
            out.append(tuple(col))
            if len(out) > budget:
                raise BudgetError(f"more than {budget} proper colorings")
            return
        banned = {col[w] for w in g.adjacency[v] if w < v}
        for c in range(1, k + 1):
            if c not in banned:
                col[v] = c
                rec(v + 1)
        col[v] = 0

    rec(0)
    return StateSpace(g, k, tuple(out))


def interference_masks(g: Graph, clusters: Sequence[Cluster]) -> list[int]:
    """Bitmask per cluster of the other clusters that overlap or conflict with it."""
    at_vertex: dict[int, list[int]] = {}
    for i, cl in enumerate(clusters):
        for u in cl.vertices:
            at_vertex.setdefault(u, []).append(i)
    masks = []
    for i, S in enumerate(clusters):
        m = 0
        for u in S.vertices:
            for j in at_vertex.get(u, ()):
                m |= 1 << j
            for w in g.adjacency[u]:
                for j in at_vertex.get(w, ()):
                    if not set(S.colors).isdisjoint(clusters[j].colors):
                        m |= 1 << j
        masks.append(m & ~(1 << i))
    return masks


def _popcount(x: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros_like(x)
    for i in range(width):
        out += (x >> i) & 1
    return out


def flippable_weights(interf: Sequence[int], alpha: Fraction) -> dict[int, Fraction]:
    """Law of the flippable set: maps flippable bitmask to its exact probability."""
    m = len(interf)
    if m > CLUSTER_BUDGET:
        raise BudgetError(f"{m} activation coins exceed the budget of {CLUSTER_BUDGET}")
    alpha = Fraction(alpha)
    masks = np.arange(1 << m, dtype=np.int64)
    F = np.zeros_like(masks)
    for i, im in enumerate(interf):
        ok = ((masks >> i) & 1) & ((masks & im) == 0)
        F |= ok.astype(np.int64) << i
    pop = _popcount(masks, m)
    keys, counts = np.unique(F * (m + 1) + pop, return_counts=True)
    apow = [alpha**a for a in range(m + 1)]
    bpow = [(1 - alpha) ** a for a in range(m + 1)]
    out: dict[int, Fraction] = {}
    for key, cnt in zip(keys.tolist(), counts.tolist()):
        f, a = divmod(key, m + 1)
        w = cnt * apow[a] * bpow[m - a]
        if w:
            out[f] = out.get(f, 0) + w
    return out


@dataclass(frozen=True)
class BlockedRecord:
    """Probability that ``cluster`` is active but not flippable, next to ``20 k alpha^2``."""

    cluster: Cluster
    interfering: int
    probability: Fraction
    bound: Fraction

    @property
    def ok(self) -> bool:
        return self.probability <= self.bound


def blocked_probabilities(g: Graph, sigma: Coloring, alpha) -> list[BlockedRecord]:
    """Closed form ``alpha (1 - (1 - alpha)^m)`` per cluster, ``m`` = number of interfering clusters."""
    alpha = Fraction(alpha)
    clusters = raw_clusters(g.adjacency, sigma.colors, sigma.k)
    bound = 20 * sigma.k * alpha**2
    out = []
    for cl, im in zip(clusters, interference_masks(g, clusters)):
        m = bin(im).count("1")
        out.append(BlockedRecord(cl, m, alpha * (1 - (1 - alpha) ** m), bound))
    return out


def flip_outcomes(members: Sequence[int], probs: Sequence[Fraction]):
    """Yield (flipped subset, probability) for independent flips of ``members``."""
    choices = []
    for i, p in zip(members, probs):
        opts = []
        if p:
            opts.append((i, p))
        if p != 1:
            opts.append((None, 1 - p))
        choices.append(opts)
    for combo in itertools.product(*choices):
        prob = Fraction(1)
        flipped = []
        for i, p in combo:
            prob *= p
            if i is not None:
                flipped.append(i)
        yield tuple(flipped), prob


def transition_row(g: Graph, sigma: Coloring, alpha, schedule: FlipSchedule) -> dict[tuple[int, ...], Fraction]:
    """Exact one-round law from ``sigma`` as ``{next coloring tuple: probability}``."""
    if not is_proper(g, sigma):
        raise ValueError("transition rows are defined on proper colorings")
    clusters = raw_clusters(g.adjacency, sigma.colors, sigma.k)
    law = flippable_weights(interference_masks(g, clusters), Fraction(alpha))
    row: dict[tuple[int, ...], Fraction] = {}
    for fmask, w in law.items():
        members = [i for i in range(len(clusters)) if fmask >> i & 1]
        probs = [schedule[clusters[i].size] for i in members]
        for flipped, p in flip_outcomes(members, probs):
            col = list(sigma.colors)
            for i in flipped:
                col = flip_colors(col, clusters[i])
            key = tuple(col)
            row[key] = row.get(key, 0) + w * p
    return dict(sorted(row.items()))


@dataclass(frozen=True)
class TransitionMatrix:
    space: StateSpace
    rows: tuple[dict[int, Fraction], ...]
    alpha: Fraction
    schedule: FlipSchedule

    def prob(self, i: int, j: int) -> Fraction:
        return self.rows[i].get(j, Fraction(0))

    def prob_colorings(self, sigma, tau) -> Fraction:
        return self.prob(self.space.index(sigma), self.space.index(tau))

    def dense(self) -> np.ndarray:
        n = len(self.space)
        M = np.zeros((n, n))
        for i, row in enumerate(self.rows):
            for j, p in row.items():
                M[i, j] = float(p)
        return M

    def row_sums(self) -> list[Fraction]:
        return [sum(row.values(), Fraction(0)) for row in self.rows]

    def to_json(self) -> dict:
        return {
            "states": [list(s) for s in self.space.states],
            "alpha": _fmt(self.alpha),
            "schedule": self.schedule.to_json(),
            "rows": [{str(j): _fmt(p) for j, p in row.items()} for row in self.rows],
        }


def _fmt(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _alpha_schedule(params) -> tuple[Fraction, FlipSchedule]:
    return Fraction(params.alpha), params.schedule


def transition_matrix(g: Graph, k: int, params: RoundParams, space: StateSpace | None = None) -> TransitionMatrix:
    space = space if space is not None else enumerate_colorings(g, k)
    alpha, schedule = _alpha_schedule(params)
    rows = []
    for s in space.states:
        row = transition_row(g, Coloring(s, k), alpha, schedule)
        rows.append({space.index(t): p for t, p in row.items()})
    return TransitionMatrix(space, tuple(rows), alpha, schedule)


@dataclass(frozen=True)
class Ergodicity:
    irreducible: bool
    aperiodic: bool

    @property
    def ergodic(self) -> bool:
        return self.irreducible and self.aperiodic


def check_ergodicity(P: TransitionMatrix) -> Ergodicity:
    n = len(P.space)
    if n == 0:
        return Ergodicity(False, False)
    rows, cols = [], []
    for i, row in enumerate(P.rows):
        for j, p in row.items():
            if p > 0:
                rows.append(i)
                cols.append(j)
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    # period from BFS levels restricted to what state 0 reaches
    level = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in P.rows[u]:
                if P.rows[u][v] > 0 and v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    period = 0
    for u in level:
        for v, p in P.rows[u].items():
            if p > 0:
                period = math.gcd(period, level[u] + 1 - level[v])
    return Ergodicity(ncomp == 1, period == 1)


@dataclass(frozen=True)
class Distribution:
    weights: tuple
    space: StateSpace | None = None

    def __len__(self) -> int:
        return len(self.weights)

    def as_array(self) -> np.ndarray:
        return np.asarray([float(w) for w in self.weights])

    def to_json(self) -> dict:
        ws = [_fmt(w) if isinstance(w, Fraction) else float(w) for w in self.weights]
        out: dict = {"weights": ws}
        if self.space is not None:
            out["states"] = [list(s) for s in self.space.states]
        return out


def _solve_exact(P: TransitionMatrix) -> list[Fraction]:
    """Solve pi (P - I) = 0, sum(pi) = 1 by Gauss-Jordan elimination over the rationals."""
    n = len(P.space)
    # unknowns pi_j; equations: for each j < n-1, sum_i pi_i (P_ij - [i==j]) = 0; last: sum = 1
    A = [[Fraction(0)] * (n + 1) for _ in range(n)]
    for i, row in enumerate(P.rows):
        for j, p in row.items():
            if j < n - 1:
                A[j][i] += p
    for j in range(n - 1):
        A[j][j] -= 1
    A[n - 1] = [Fraction(1)] * n + [Fraction(1)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[r][n] for r in range(n)]


def stationary(P: TransitionMatrix, tol: float = 1e-12, exact: bool = False) -> Distribution:
    """Stationary law of an ergodic chain (floats, or rationals when ``exact``)."""
    erg = check_ergodicity(P)
    if not erg.irreducible:
        raise ValueError("chain is reducible: no unique stationary distribution")
    n = len(P.space)
    if exact:
        if n > 200:
            raise BudgetError("exact stationary solve limited to 200 states")
        return Distribution(tuple(_solve_exact(P)), P.space)
    M = P.dense()
    A = M.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    pi = np.clip(pi, 0, None)
    pi /= pi.sum()
    for _ in range(10_000):
        nxt = pi @ M
        if np.abs(nxt - pi).sum() <= tol:
            pi = nxt
            break
        pi = nxt
    else:
        raise ValueError(f"stationary iteration did not reach tolerance {tol}")
    return Distribution(tuple(pi.tolist()), P.space)


def tv_distance(mu, nu) -> float | Fraction:
    """Half the L1 distance; exact when both inputs hold rationals."""
    a = _weights(mu)
    b = _weights(nu)
    if isinstance(a, dict) or isinstance(b, dict):
        a = a if isinstance(a, dict) else dict(enumerate(a))
        b = b if isinstance(b, dict) else dict(enumerate(b))
        keys = set(a) | set(b)
        return sum(abs(a.get(x, 0) - b.get(x, 0)) for x in keys) / 2
    if len(a) != len(b):
        raise ValueError("distributions have different supports")
    if all(isinstance(x, (Fraction, int)) for x in list(a) + list(b)):
        return sum((abs(Fraction(x) - Fraction(y)) for x, y in zip(a, b)), Fraction(0)) / 2
    return float(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)).sum() / 2)


def _weights(d):
    if isinstance(d, Distribution):
        return list(d.weights)
    if isinstance(d, Mapping):
        return dict(d)
    if isinstance(d, np.ndarray):
        return d.tolist()
    return list(d)


@dataclass(frozen=True)
class MixingProfile:
    curve: tuple[float, ...]
    t_mix: int | None
    threshold: float = 0.25

    @property
    def censored(self) -> bool:
        return self.t_mix is None

    def to_csv(self) -> str:
        return "t,tv\n" + "".join(f"{t},{d:.12g}\n" for t, d in enumerate(self.curve))


def mixing_profile(P: TransitionMatrix, pi: Distribution, t_max: int, threshold: float = 0.25) -> MixingProfile:
    """Worst-start TV distance to ``pi`` for ``t = 0..t_max``."""
    M = P.dense()
    target = pi.as_array()
    cur = np.eye(len(target))
    curve = []
    t_mix = None
    for t in range(t_max + 1):
        d = float(0.5 * np.abs(cur - target).sum(axis=1).max())
        curve.append(d)
        if t_mix is None and d <= threshold:
            t_mix = t
        cur = cur @ M
    return MixingProfile(tuple(curve), t_mix, threshold)


class BatchEngine:
    """Many independent chains on a precomputed state space.

    Chain ``i`` uses seed ``derive_seed(params.seed, i)`` and reproduces
    :func:`flipdyn.dynamics.run_chain` with that seed exactly.
    """

    def __init__(self, space: StateSpace, params: RoundParams):
        g, k = space.graph, space.k
        self.space = space
        self.params = params
        self.alpha = params.alpha_float
        per_state = [raw_clusters(g.adjacency, s, k) for s in space.states]
        M = max((len(c) for c in per_state), default=0)
        if M > 62:
            raise BudgetError("batch engine supports at most 62 clusters per state")
        S = len(space)
        self.M = M
        self.act_words = np.zeros((S, M), dtype=np.uint64)
        self.flip_words = np.zeros((S, M), dtype=np.uint64)
        self.valid = np.zeros((S, M), dtype=bool)
        self.interf = np.zeros((S, M), dtype=np.int64)
        self.fprob = np.zeros((S, M))
        self.delta = np.zeros((S, M), dtype=np.int64)
        n = g.n
        powers = [k ** (n - 1 - v) for v in range(n)]
        for si, (s, cls) in enumerate(zip(space.states, per_state)):
            masks = interference_masks(g, cls)
            for j, cl in enumerate(cls):
                self.act_words[si, j] = cluster_word(cl, s, params.keying, STREAM_ACTIVATE)
                self.flip_words[si, j] = cluster_word(cl, s, params.keying, STREAM_FLIP)
                self.valid[si, j] = True
                self.interf[si, j] = masks[j]
                self.fprob[si, j] = float(params.schedule[cl.size])
                new = flip_colors(s, cl)
                self.delta[si, j] = sum((new[v] - s[v]) * powers[v] for v in cl.vertices)
        self.codes = space.codes()
        self._bits = np.int64(1) << np.arange(M, dtype=np.int64)

    def step(self, states: np.ndarray, seeds: np.ndarray, rnd: int) -> np.ndarray:
        if self.M == 0:
            return states
        sd = seeds[:, None]
        act = (keyed_uniform_np(sd, rnd, self.act_words[states]) < self.alpha) & self.valid[states]
        bits = (act * self._bits).sum(axis=1)
        ok = act & ((bits[:, None] & self.interf[states]) == 0)
        flip = ok & (keyed_uniform_np(sd, rnd, self.flip_words[states]) < self.fprob[states])
        code = self.codes[states] + (flip * self.delta[states]).sum(axis=1)
        return np.searchsorted(self.codes, code)

    def run(self, start: int, T: int, chains: int, seed: int | None = None,
            record: bool = False) -> np.ndarray:
        """Final state index per chain (or the full ``(T+1, chains)`` path when ``record``)."""
        seeds = derive_seeds_np(self.params.seed if seed is None else seed, chains)
        states = np.full(chains, start, dtype=np.int64)
        path = [states] if record else None
        for t in range(T):
            states = self.step(states, seeds, self.params.round_index + t)
            if record:
                path.append(states)
        return np.stack(path) if record else states


@dataclass(frozen=True)
class EmpiricalResult:
    distribution: Distribution
    tv_to_reference: float | None


def empirical_distribution(g: Graph, k: int, params: RoundParams, T: int, samples: int,
                           start=None, reference: Distribution | None = None,
                           space: StateSpace | None = None) -> EmpiricalResult:
    """Histogram of ``samples`` independent chains after ``T`` rounds from a fixed start."""
    space = space if space is not None else enumerate_colorings(g, k)
    if len(space) == 0:
        raise ValueError("no proper colorings")
    s0 = 0 if start is None else space.index(start)
    final = BatchEngine(space, params).run(s0, T, samples)
    counts = np.bincount(final, minlength=len(space))
    dist = Distribution(tuple((counts / samples).tolist()), space)
    tv = None if reference is None else tv_distance(dist, reference)
    return EmpiricalResult(dist, tv)
