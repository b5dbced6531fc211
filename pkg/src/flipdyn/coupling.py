"""Path coupling of two chains that differ at one vertex.

The coupling is described by a :class:`CoupledDraw`, which lists every
coin:

* activation units: one Bernoulli(alpha) coin that activates one X
  cluster, one Y cluster, or a pair identical in both chains;
* flip units: one Uniform[0, 1) variable shared by the members of a unit.
  Each member flips when the variable lands in its intervals and the
  member is flippable in its own chain;
* group blocks: one finite joint law for all clusters attached to a
  neighbour color of the disagreement (see below).

A cluster's state in a round is inactive, active without its flip coin, or
active with it: probabilities ``1 - alpha``, ``alpha (1 - f)`` and
``alpha f``. Every cluster belongs to exactly one unit or block, and every
block has the product law on each side, so each chain viewed alone follows
the single-chain law exactly. :func:`coupled_law` verifies this by
enumeration.

Roles for a neighbour color ``c`` of the disagreement ``v*``:

* X side: ``S_i = S_X(w_i, c_Y)`` and ``T_hat = S_X(v*, c)``.
* Y side: ``T_i = S_Y(w_i, c_X)`` and ``S_hat = S_Y(v*, c)``.

The block puts mass ``kappa * t`` on the events where exactly one member per
side is in the flip state, with ``kappa`` of order alpha and ``t`` given by

* ``(S_imax, S_hat)``: ``f_A``; ``(T_hat, T_jmax)``: ``f_B``;
* ``(S_i, T_i)``: ``m_i = min(q_i, q'_i)``;
* ``S_i`` alone: ``q_i - m_i``; ``T_i`` alone: ``q'_i - m_i``.

The leftover mass of both sides is matched by the north-west corner rule.

Singletons ``{v*}`` are paired by the color that ``v*`` receives. Clusters
identical in both chains share both coins.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from flipdyn.clusters import Cluster, cluster_distances, color_pair, component, flip_colors, raw_clusters
from flipdyn.coloring import (
    AdjacentPair,
    Coloring,
    available_colors,
    default_eta,
    hamming,
    is_proper,
    random_proper_coloring,
    weighted_distance,
)
from flipdyn.dynamics import RoundParams, cluster_word, distributed_round, resolve
from flipdyn.exact import BudgetError, enumerate_colorings, interference_masks, _popcount
from flipdyn.graph import Graph
from flipdyn.rng import (
    STREAM_ACTIVATE,
    STREAM_COUPLE_GROUP,
    STREAM_COUPLE_X_ACT,
    STREAM_COUPLE_X_FLIP,
    STREAM_COUPLE_Y_ACT,
    STREAM_COUPLE_Y_FLIP,
    STREAM_FLIP,
    key_word,
    keyed_uniform,
)
from flipdyn.schedules import FlipSchedule

X_SIDE, Y_SIDE = 0, 1
PATTERN_BUDGET = 1 << 20
Interval = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class ActUnit:
    word: int
    x: int | None
    y: int | None
    label: str


@dataclass(frozen=True)
class Member:
    side: int
    idx: int
    intervals: tuple[Interval, ...]


@dataclass(frozen=True)
class FlipUnit:
    word: int
    members: tuple[Member, ...]
    label: str


@dataclass(frozen=True)
class ColorTable:
    """Coupling data for one neighbour color ``c`` of the disagreement."""

    color: int
    neighbours: tuple[int, ...]
    a: tuple[int, ...]
    b: tuple[int, ...]
    A: int
    B: int
    i_max: int
    j_max: int
    q: tuple[Fraction, ...]
    q_prime: tuple[Fraction, ...]


State = tuple[int, ...]  # per member: 0 inactive, 1 active, 2 active with flip coin


@dataclass(frozen=True)
class GroupBlock:
    word: int
    color: int
    x_members: tuple[int, ...]
    y_members: tuple[int, ...]
    outcomes: tuple[tuple[State, State, Fraction], ...]

    def masks(self, xs: State, ys: State) -> tuple[int, int, int, int]:
        """(X active, Y active, X flip coin, Y flip coin) bitmasks of a joint state."""
        ax = ay = fx = fy = 0
        for i, st in zip(self.x_members, xs):
            ax |= (st > 0) << i
            fx |= (st == 2) << i
        for i, st in zip(self.y_members, ys):
            ay |= (st > 0) << i
            fy |= (st == 2) << i
        return ax, ay, fx, fy


def _member_states(fs: Sequence[Fraction], alpha: Fraction) -> dict[State, Fraction]:
    per = []
    for f in fs:
        opts = [(0, 1 - alpha), (1, alpha * (1 - f)), (2, alpha * f)]
        per.append([(st, p) for st, p in opts if p])
    out: dict[State, Fraction] = {}
    for combo in itertools.product(*per):
        p = Fraction(1)
        for _, q in combo:
            p *= q
        out[tuple(st for st, _ in combo)] = p
    return out


def group_joint(x_fs: Sequence[Fraction], y_fs: Sequence[Fraction],
                table: dict[tuple[int | None, int | None], Fraction], alpha) -> list[tuple[State, State, Fraction]]:
    """Joint law of one group block.

    ``table`` maps (X member, Y member) to a weight, ``None`` standing for
    the all-inactive state of that side. Row and column sums of the table
    must not exceed the members' flip probabilities.
    """
    alpha = Fraction(alpha)
    mu = _member_states(x_fs, alpha)
    nu = _member_states(y_fs, alpha)
    p, r = len(x_fs), len(y_fs)

    def unit(i: int | None, n: int) -> State:
        return tuple(2 if j == i else 0 for j in range(n))

    need_x: dict[State, Fraction] = {}
    need_y: dict[State, Fraction] = {}
    for (i, j), w in table.items():
        if w:
            need_x[unit(i, p)] = need_x.get(unit(i, p), 0) + w
            need_y[unit(j, r)] = need_y.get(unit(j, r), 0) + w
    kappa = alpha * (1 - alpha) ** (p + r)
    for need, marg in ((need_x, mu), (need_y, nu)):
        for st, w in need.items():
            kappa = min(kappa, marg.get(st, Fraction(0)) / w)
    joint: dict[tuple[State, State], Fraction] = {}
    rx, ry = dict(mu), dict(nu)
    for (i, j), w in table.items():
        if w and kappa:
            xs, ys = unit(i, p), unit(j, r)
            joint[(xs, ys)] = joint.get((xs, ys), 0) + kappa * w
            rx[xs] -= kappa * w
            ry[ys] -= kappa * w
    # north-west corner on what is left
    xl = [[st, m] for st, m in sorted(rx.items()) if m > 0]
    yl = [[st, m] for st, m in sorted(ry.items()) if m > 0]
    i = j = 0
    while i < len(xl) and j < len(yl):
        take = min(xl[i][1], yl[j][1])
        key = (xl[i][0], yl[j][0])
        joint[key] = joint.get(key, 0) + take
        xl[i][1] -= take
        yl[j][1] -= take
        if xl[i][1] == 0:
            i += 1
        if yl[j][1] == 0:
            j += 1
    return [(xs, ys, w) for (xs, ys), w in sorted(joint.items()) if w]


@dataclass
class CoupledDraw:
    pair: AdjacentPair
    X_clusters: list[Cluster]
    Y_clusters: list[Cluster]
    alpha: Fraction = Fraction(1, 100)
    act_units: list[ActUnit] = field(default_factory=list)
    flip_units: list[FlipUnit] = field(default_factory=list)
    groups: list[GroupBlock] = field(default_factory=list)
    tables: list[ColorTable] = field(default_factory=list)

    def check_cover(self) -> None:
        for side, cls in ((X_SIDE, self.X_clusters), (Y_SIDE, self.Y_clusters)):
            grouped = [i for gb in self.groups for i in (gb.x_members if side == X_SIDE else gb.y_members)]
            acts = sorted(grouped + [u.x if side == X_SIDE else u.y for u in self.act_units
                                     if (u.x if side == X_SIDE else u.y) is not None])
            flips = sorted(grouped + [m.idx for u in self.flip_units for m in u.members if m.side == side])
            if acts != list(range(len(cls))) or flips != list(range(len(cls))):
                raise AssertionError("coupling does not cover every cluster exactly once")


def _size_code(comp) -> int:
    return 7 if comp is None or len(comp) > 6 else len(comp)


def _carve(segments: Sequence[Interval], length: Fraction) -> list[Interval]:
    out = []
    for lo, hi in segments:
        if length <= 0:
            break
        if hi <= lo:
            continue
        take = min(hi - lo, length)
        out.append((lo, lo + take))
        length -= take
    if length > 0:
        raise AssertionError("interval layout ran out of room")
    return out


def coupling_plan(g: Graph, pair: AdjacentPair, schedule: FlipSchedule, alpha=Fraction(1, 100)) -> CoupledDraw:
    """Build the coupled coin layout for one round from ``pair``.

    ``alpha`` enters only the group blocks, whose joint laws depend on it.
    """
    X, Y, v = pair.X.colors, pair.Y.colors, pair.v_star
    k = pair.k
    cX, cY = pair.c_X, pair.c_Y
    xs = raw_clusters(g.adjacency, X, k)
    ys = raw_clusters(g.adjacency, Y, k)
    xpos = {cl: i for i, cl in enumerate(xs)}
    ypos = {cl: i for i, cl in enumerate(ys)}
    draw = CoupledDraw(pair, xs, ys, Fraction(alpha))
    used_x: set[int] = set()
    used_y: set[int] = set()
    flip_x: set[int] = set()
    flip_y: set[int] = set()
    full = ((Fraction(0), Fraction(1)),)

    def f(cl: Cluster | None) -> Fraction:
        return schedule[cl.size] if cl is not None else Fraction(0)

    def act(x: int | None, y: int | None, label: str) -> None:
        if x is not None:
            used_x.add(x)
            word = cluster_word(xs[x], X, "canonical", STREAM_ACTIVATE if label == "shared" else STREAM_COUPLE_X_ACT)
        else:
            used_y.add(y)
            word = cluster_word(ys[y], Y, "canonical", STREAM_COUPLE_Y_ACT)
        if y is not None:
            used_y.add(y)
        draw.act_units.append(ActUnit(word, x, y, label))

    def flip(members: list[Member], label: str) -> None:
        lead = members[0]
        if lead.side == X_SIDE:
            stream = STREAM_FLIP if label == "shared" else STREAM_COUPLE_X_FLIP
            word = cluster_word(xs[lead.idx], X, "canonical", stream)
        else:
            word = cluster_word(ys[lead.idx], Y, "canonical", STREAM_COUPLE_Y_FLIP)
        for m in members:
            (flip_x if m.side == X_SIDE else flip_y).add(m.idx)
        draw.flip_units.append(FlipUnit(word, tuple(members), label))

    # singletons at v*, paired by the color v* receives
    nbr_cols = {X[w] for w in g.adjacency[v]}
    for c in range(1, k + 1):
        if c in nbr_cols:
            continue
        xi = xpos[Cluster((v,), color_pair(cX, c))]
        yi = ypos[Cluster((v,), color_pair(cY, c))]
        act(xi, yi, "vstar")
        flip([Member(X_SIDE, xi, full), Member(Y_SIDE, yi, full)], "vstar")

    # neighbour colors
    for c in sorted(nbr_cols):
        ws = tuple(w for w in g.adjacency[v] if X[w] == c)
        S: list[Cluster | None] = []
        T: list[Cluster | None] = []
        a: list[int] = []
        b: list[int] = []
        for col, other, out, sizes in ((X, cY, S, a), (Y, cX, T, b)):
            covered: set[int] = set()
            for w in ws:
                if w in covered:
                    out.append(None)
                    sizes.append(0)
                    continue
                comp = component(g.adjacency, col, w, other)
                covered.update(comp)
                sizes.append(_size_code(comp))
                out.append(Cluster(comp, color_pair(c, other)) if len(comp) <= 6 else None)
        s_hat_c = component(g.adjacency, Y, v, c, cap=6)
        t_hat_c = component(g.adjacency, X, v, c, cap=6)
        S_hat = Cluster(s_hat_c, color_pair(cY, c)) if s_hat_c is not None else None
        T_hat = Cluster(t_hat_c, color_pair(cX, c)) if t_hat_c is not None else None
        i_max, j_max = a.index(max(a)), b.index(max(b))
        fA, fB = f(S_hat), f(T_hat)

        table: dict[tuple[Cluster | None, Cluster | None], Fraction] = {}

        def put(xc: Cluster | None, yc: Cluster | None, w: Fraction) -> None:
            if w:
                table[(xc, yc)] = table.get((xc, yc), 0) + w

        if S[i_max] is not None and S_hat is not None:
            put(S[i_max], S_hat, fA)
        if T_hat is not None and T[j_max] is not None:
            put(T_hat, T[j_max], fB)
        qs, qps = [], []
        for i in range(len(ws)):
            q = f(S[i]) - (fA if i == i_max else 0)
            qp = f(T[i]) - (fB if i == j_max else 0)
            qs.append(q)
            qps.append(qp)
            m = min(q, qp)
            put(S[i], T[i], m)
            put(S[i], None, q - m)
            put(None, T[i], qp - m)
        xm = sorted({xpos[cl] for cl in S + [T_hat] if cl is not None} - flip_x)
        ym = sorted({ypos[cl] for cl in T + [S_hat] if cl is not None} - flip_y)
        xloc = {xs[i]: n for n, i in enumerate(xm)}
        yloc = {ys[i]: n for n, i in enumerate(ym)}
        local = {}
        for (xc, yc), w in table.items():
            key = (None if xc is None else xloc[xc], None if yc is None else yloc[yc])
            local[key] = local.get(key, 0) + w
        joint = group_joint([f(xs[i]) for i in xm], [f(ys[i]) for i in ym], local, alpha)
        flip_x.update(xm)
        flip_y.update(ym)
        used_x.update(xm)
        used_y.update(ym)
        draw.groups.append(GroupBlock(key_word(v, c, 0, STREAM_COUPLE_GROUP), c, tuple(xm), tuple(ym),
                                      tuple(joint)))
        draw.tables.append(ColorTable(c, ws, tuple(a), tuple(b), min(1 + sum(a), 7), min(1 + sum(b), 7),
                                      i_max, j_max, tuple(qs), tuple(qps)))

    # clusters identical in both chains; the {v*} cluster with pair {c_X, c_Y} was paired above
    for xi, cl in enumerate(xs):
        if xi in flip_x:
            continue
        yi = ypos.get(cl)
        if yi is not None and yi not in flip_y:
            if xi not in used_x and yi not in used_y:
                act(xi, yi, "shared")
            fcl = f(cl)
            iv = ((Fraction(0), fcl),) if fcl else ()
            flip([Member(X_SIDE, xi, iv), Member(Y_SIDE, yi, iv)], "shared")

    # everything else is independent
    for xi, cl in enumerate(xs):
        if xi not in used_x:
            act(xi, None, "solo")
        if xi not in flip_x:
            fcl = f(cl)
            flip([Member(X_SIDE, xi, ((Fraction(0), fcl),) if fcl else ())], "solo")
    for yi, cl in enumerate(ys):
        if yi not in used_y:
            act(None, yi, "solo")
        if yi not in flip_y:
            fcl = f(cl)
            flip([Member(Y_SIDE, yi, ((Fraction(0), fcl),) if fcl else ())], "solo")
    draw.check_cover()
    return draw


def _hits(intervals: Sequence[Interval], u: float) -> bool:
    return any(float(lo) <= u < float(hi) for lo, hi in intervals)


def coupled_round(g: Graph, pair: AdjacentPair, params: RoundParams, plan: CoupledDraw | None = None
                  ) -> tuple[Coloring, Coloring]:
    """One coupled round driven by keyed coins."""
    if not (is_proper(g, pair.X) and is_proper(g, pair.Y)):
        raise ValueError("coupled_round requires proper colorings")
    plan = plan if plan is not None else coupling_plan(g, pair, params.schedule, params.alpha)
    if plan.groups and plan.alpha != Fraction(params.alpha):
        raise ValueError("the plan was built for a different alpha")
    alpha = params.alpha_float
    act_x, act_y = set(), set()
    for u in plan.act_units:
        if keyed_uniform(params.seed, params.round_index, u.word) < alpha:
            if u.x is not None:
                act_x.add(u.x)
            if u.y is not None:
                act_y.add(u.y)
    coin_x = coin_y = 0
    for gb in plan.groups:
        xs, ys = _pick(gb, keyed_uniform(params.seed, params.round_index, gb.word))
        ax, ay, cx, cy = gb.masks(xs, ys)
        act_x.update(i for i in gb.x_members if ax >> i & 1)
        act_y.update(i for i in gb.y_members if ay >> i & 1)
        coin_x |= cx
        coin_y |= cy
    free_x = _flippable(g, plan.X_clusters, act_x)
    free_y = _flippable(g, plan.Y_clusters, act_y)
    fx = [i for i in sorted(free_x) if coin_x >> i & 1]
    fy = [i for i in sorted(free_y) if coin_y >> i & 1]
    for unit in plan.flip_units:
        live = [m for m in unit.members if m.idx in (free_x if m.side == X_SIDE else free_y)]
        if not live:
            continue
        u = keyed_uniform(params.seed, params.round_index, unit.word)
        for m in live:
            if _hits(m.intervals, u):
                (fx if m.side == X_SIDE else fy).append(m.idx)
    return (_apply(pair.X, plan.X_clusters, fx), _apply(pair.Y, plan.Y_clusters, fy))


def _pick(gb: GroupBlock, u: float) -> tuple[State, State]:
    acc = 0.0
    for xs, ys, w in gb.outcomes:
        acc += float(w)
        if u < acc:
            return xs, ys
    return gb.outcomes[-1][0], gb.outcomes[-1][1]


def _flippable(g: Graph, clusters: Sequence[Cluster], active: set[int]) -> set[int]:
    chosen = [clusters[i] for i in sorted(active)]
    _, _, free = resolve(g, chosen)
    pos = {cl: i for i, cl in enumerate(clusters)}
    return {pos[cl] for cl in free}


def _apply(sigma: Coloring, clusters: Sequence[Cluster], idxs: Sequence[int]) -> Coloring:
    col = list(sigma.colors)
    for i in idxs:
        col = flip_colors(col, clusters[i])
    return Coloring(tuple(col), sigma.k)


def _unit_outcomes(unit: FlipUnit, live: Sequence[Member]) -> list[tuple[tuple[Member, ...], Fraction]]:
    points = {Fraction(0), Fraction(1)}
    for m in live:
        for lo, hi in m.intervals:
            points.update((lo, hi))
    pts = sorted(points)
    acc: dict[tuple, Fraction] = {}
    for lo, hi in zip(pts, pts[1:]):
        mid = (lo + hi) / 2
        hit = tuple(m for m in live if any(a <= mid < b for a, b in m.intervals))
        acc[hit] = acc.get(hit, 0) + (hi - lo)
    return list(acc.items())


@dataclass
class CoupledLaw:
    """Exact joint law of the flipped sets ``(X mask, Y mask)`` after one coupled round."""

    g: Graph
    plan: CoupledDraw
    outcomes: dict[tuple[int, int], Fraction]

    def _coloring(self, side: int, mask: int) -> Coloring:
        sigma = self.plan.pair.X if side == X_SIDE else self.plan.pair.Y
        cls = self.plan.X_clusters if side == X_SIDE else self.plan.Y_clusters
        return _apply(sigma, cls, [i for i in range(len(cls)) if mask >> i & 1])

    def joint(self) -> dict[tuple[tuple[int, ...], tuple[int, ...]], Fraction]:
        out: dict = {}
        for (mx, my), p in self.outcomes.items():
            key = (self._coloring(X_SIDE, mx).colors, self._coloring(Y_SIDE, my).colors)
            out[key] = out.get(key, 0) + p
        return out

    def marginal(self, side: int) -> dict[tuple[int, ...], Fraction]:
        out: dict = {}
        for (mx, my), p in self.outcomes.items():
            key = self._coloring(side, mx if side == X_SIDE else my).colors
            out[key] = out.get(key, 0) + p
        return dict(sorted(out.items()))

    def total(self) -> Fraction:
        return sum(self.outcomes.values(), Fraction(0))

    def expected_hamming(self) -> Fraction:
        return sum((p * hamming(x, y) for (x, y), p in self.joint().items()), Fraction(0))

    def agreement_at_vstar(self) -> Fraction:
        v = self.plan.pair.v_star
        return sum((p for (x, y), p in self.joint().items() if x[v] == y[v]), Fraction(0))

    def expected_weighted(self, eta: Fraction) -> tuple[Fraction, Fraction]:
        """(upper, lower) bounds on the expected weighted distance after the round.

        Distance 0 and 1 outcomes are exact. A pair at Hamming distance
        ``h >= 2`` is bounded by ``h`` above and ``h (1 - eta)`` below.
        """
        k = self.plan.pair.k
        up = lo = Fraction(0)
        for (x, y), p in self.joint().items():
            h = hamming(x, y)
            if h == 1:
                w = weighted_distance(self.g, AdjacentPair.from_colorings(Coloring(x, k), Coloring(y, k)), eta)
                up += p * w
                lo += p * w
            elif h >= 2:
                up += p * h
                lo += p * h * (1 - eta)
        return up, lo

    def dist2_mass(self) -> dict[str, Fraction]:
        """Disagreement mass on clusters at cluster distance 2 from the disagreement.

        ``own_flip``: clusters shared by both chains, weighted by size,
        times the probability that exactly one chain flips them.
        ``literal``: X-clusters at distance 2, weighted by size, times the
        probability that the two outputs differ somewhere on them.
        """
        pair = self.plan.pair
        xs, ys = self.plan.X_clusters, self.plan.Y_clusters
        dist = cluster_distances(self.g, pair.X, pair.v_star)
        ypos = {cl: i for i, cl in enumerate(ys)}
        at2 = [(i, cl) for i, cl in enumerate(xs) if dist.get(cl) == 2]
        own = Fraction(0)
        for i, cl in at2:
            j = ypos.get(cl)
            if j is None:
                continue
            p = sum((pr for (mx, my), pr in self.outcomes.items() if bool(mx >> i & 1) != bool(my >> j & 1)),
                    Fraction(0))
            own += cl.size * p
        literal = Fraction(0)
        joint = self.joint()
        for _, cl in at2:
            p = sum((pr for (x, y), pr in joint.items() if any(x[u] != y[u] for u in cl.vertices)), Fraction(0))
            literal += cl.size * p
        return {"own_flip": own, "literal": literal}


def coupled_law(g: Graph, pair: AdjacentPair, alpha, schedule: FlipSchedule,
                plan: CoupledDraw | None = None, budget: int = PATTERN_BUDGET) -> CoupledLaw:
    """Enumerate every activation pattern and flip outcome of the coupled round exactly.

    Group blocks are enumerated state by state; the independent activation
    coins are enumerated together with numpy. ``budget`` caps the number of
    activation patterns visited.
    """
    if not (is_proper(g, pair.X) and is_proper(g, pair.Y)):
        raise ValueError("coupled_law requires proper colorings")
    alpha = Fraction(alpha)
    plan = plan if plan is not None else coupling_plan(g, pair, schedule, alpha)
    if plan.groups and plan.alpha != alpha:
        raise ValueError("the plan was built for a different alpha")
    U = len(plan.act_units)
    # per block: activation masks -> list of (flip coin masks, probability)
    blocks = []
    for gb in plan.groups:
        acts: dict[tuple[int, int], list[tuple[int, int, Fraction]]] = {}
        for xs, ys, w in gb.outcomes:
            ax, ay, cx, cy = gb.masks(xs, ys)
            acts.setdefault((ax, ay), []).append((cx, cy, w))
        blocks.append(list(acts.items()))
    n_combos = 1
    for blk in blocks:
        n_combos *= len(blk)
    if n_combos << U > budget:
        raise BudgetError(f"{n_combos << U} coupled activation patterns exceed the budget of {budget}")
    xi_int = interference_masks(g, plan.X_clusters)
    yi_int = interference_masks(g, plan.Y_clusters)
    masks = np.arange(1 << U, dtype=np.int64)
    base_x = np.zeros_like(masks)
    base_y = np.zeros_like(masks)
    for u, unit in enumerate(plan.act_units):
        bit = (masks >> u) & 1
        if unit.x is not None:
            base_x |= bit << unit.x
        if unit.y is not None:
            base_y |= bit << unit.y
    pop = _popcount(masks, U)
    apow = [alpha**i for i in range(U + 1)]
    bpow = [(1 - alpha) ** i for i in range(U + 1)]
    outcomes: dict[tuple[int, int], Fraction] = {}
    for combo in itertools.product(*blocks):
        gx = gy = 0
        for (ax, ay), _ in combo:
            gx |= ax
            gy |= ay
        fx = _free(base_x | gx, xi_int)
        fy = _free(base_y | gy, yi_int)
        keys, counts = np.unique(np.stack([fx, fy, pop], axis=1), axis=0, return_counts=True)
        weights: dict[tuple[int, int], Fraction] = {}
        for (mx, my, a), cnt in zip(keys.tolist(), counts.tolist()):
            w = cnt * apow[a] * bpow[U - a]
            if w:
                weights[(mx, my)] = weights.get((mx, my), 0) + w
        for (mx, my), w in weights.items():
            per_unit = []
            for unit in plan.flip_units:
                live = [m for m in unit.members if (mx if m.side == X_SIDE else my) >> m.idx & 1]
                if live:
                    per_unit.append([(_hit_masks(hit), q) for hit, q in _unit_outcomes(unit, live)])
            for _, flips in combo:
                agg: dict[tuple[int, int], Fraction] = {}
                for cx, cy, q in flips:
                    key = (cx & mx, cy & my)
                    agg[key] = agg.get(key, 0) + q
                per_unit.append(list(agg.items()))
            for parts in itertools.product(*per_unit):
                p = w
                ox = oy = 0
                for (hx, hy), q in parts:
                    p *= q
                    ox |= hx
                    oy |= hy
                if p:
                    outcomes[(ox, oy)] = outcomes.get((ox, oy), 0) + p
    return CoupledLaw(g, plan, outcomes)


def _hit_masks(hit: Sequence[Member]) -> tuple[int, int]:
    ox = oy = 0
    for m in hit:
        if m.side == X_SIDE:
            ox |= 1 << m.idx
        else:
            oy |= 1 << m.idx
    return ox, oy


def _free(act: np.ndarray, interf: Sequence[int]) -> np.ndarray:
    out = np.zeros_like(act)
    for i, im in enumerate(interf):
        ok = ((act >> i) & 1) & ((act & im) == 0)
        out |= ok.astype(np.int64) << i
    return out


def adjacent_pairs(g: Graph, k: int, up_to_relabel: bool = True) -> list[AdjacentPair]:
    """All ordered adjacent pairs of proper colorings (one per color-relabeling class)."""
    space = enumerate_colorings(g, k)
    seen = set()
    out = []
    for s in space.states:
        for v in range(g.n):
            used = {s[w] for w in g.adjacency[v]}
            for c in range(1, k + 1):
                if c == s[v] or c in used:
                    continue
                t = s[:v] + (c,) + s[v + 1:]
                if up_to_relabel:
                    relabel: dict[int, int] = {}
                    for x in s + (c,):
                        relabel.setdefault(x, len(relabel) + 1)
                    key = (tuple(relabel[x] for x in s), v, relabel[c])
                    if key in seen:
                        continue
                    seen.add(key)
                out.append(AdjacentPair(Coloring(s, k), Coloring(t, k), v))
    return out


@dataclass(frozen=True)
class ContractionResult:
    pair: AdjacentPair
    mode: str
    expected_hamming: Fraction | float
    weighted_before: Fraction
    weighted_after_upper: Fraction | float
    weighted_after_lower: Fraction | float
    eta: Fraction
    stderr: float | None = None

    @property
    def beta(self) -> float:
        return 1 - float(self.weighted_after_upper) / float(self.weighted_before)

    @property
    def contracts(self) -> bool:
        return self.expected_hamming < 1

    @property
    def weighted_contracts(self) -> bool:
        return self.weighted_after_upper < self.weighted_before

    def to_json(self) -> dict:
        def fmt(x):
            return f"{x.numerator}/{x.denominator}" if isinstance(x, Fraction) else x

        return {
            "X": list(self.pair.X.colors), "Y": list(self.pair.Y.colors), "v_star": self.pair.v_star,
            "mode": self.mode,
            "expected_hamming": fmt(self.expected_hamming),
            "weighted_before": fmt(self.weighted_before),
            "weighted_after_upper": fmt(self.weighted_after_upper),
            "weighted_after_lower": fmt(self.weighted_after_lower),
            "eta": fmt(self.eta), "beta": self.beta, "stderr": self.stderr,
        }


def adjacent_contraction(g: Graph, k: int, params: RoundParams, mode: str = "exact", trials: int = 10_000,
                         pair: AdjacentPair | None = None, eta: Fraction | None = None) -> list[ContractionResult]:
    """Expected Hamming and weighted distance after one coupled round.

    Covers ``pair``, or every adjacent pair of ``g`` up to color
    relabeling. ``eta`` defaults to ``delta * max_degree / (34 k)``.
    """
    eta = Fraction(eta) if eta is not None else default_eta(g.max_degree, k)
    pairs = [pair] if pair is not None else adjacent_pairs(g, k)
    out = []
    for pr in pairs:
        before = weighted_distance(g, pr, eta)
        plan = coupling_plan(g, pr, params.schedule, params.alpha)
        if mode == "exact":
            law = coupled_law(g, pr, params.alpha, params.schedule, plan)
            up, lo = law.expected_weighted(eta)
            out.append(ContractionResult(pr, mode, law.expected_hamming(), before, up, lo, eta))
        elif mode == "sampled":
            hs, ws, wl = [], [], []
            for t in range(trials):
                x, y = coupled_round(g, pr, params.at(params.round_index + t), plan)
                h = hamming(x, y)
                hs.append(h)
                if h == 1:
                    w = float(weighted_distance(g, AdjacentPair.from_colorings(x, y), eta))
                    ws.append(w)
                    wl.append(w)
                else:
                    ws.append(float(h))
                    wl.append(h * float(1 - eta))
            arr = np.asarray(hs, dtype=float)
            se = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else None
            out.append(ContractionResult(pr, mode, float(arr.mean()), before, float(np.mean(ws)),
                                         float(np.mean(wl)), eta, se))
        else:
            raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    return out


def dist2_disagreement_mass(g: Graph, pair: AdjacentPair, params: RoundParams, mode: str = "exact",
                            trials: int = 10_000, law: CoupledLaw | None = None) -> dict[str, Fraction | float]:
    """Size-weighted disagreement probability on distance-2 clusters, with both reference bounds."""
    a2 = Fraction(params.alpha) ** 2 * g.max_degree**2
    if mode == "exact":
        law = law if law is not None else coupled_law(g, pair, params.alpha, params.schedule)
        res: dict = dict(law.dist2_mass())
    elif mode == "sampled":
        plan = coupling_plan(g, pair, params.schedule, params.alpha)
        dist = cluster_distances(g, pair.X, pair.v_star)
        at2 = [cl for cl in plan.X_clusters if dist.get(cl) == 2]
        total = 0.0
        for t in range(trials):
            x, y = coupled_round(g, pair, params.at(params.round_index + t), plan)
            total += sum(cl.size for cl in at2 if any(x[u] != y[u] for u in cl.vertices))
        res = {"literal": total / trials}
    else:
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    res["bound_288"] = 288 * a2
    res["bound_300"] = 300 * a2
    return res


def agreement_bound(g: Graph, pair: AdjacentPair, params: RoundParams,
                    law: CoupledLaw | None = None) -> dict[str, Fraction]:
    """Exact ``P[X'(v*) = Y'(v*)]`` next to ``|A(v*)| alpha (1 - 10 k alpha)``."""
    alpha = Fraction(params.alpha)
    law = law if law is not None else coupled_law(g, pair, alpha, params.schedule)
    n_avail = len(available_colors(g, pair.X, pair.v_star))
    return {
        "probability": law.agreement_at_vstar(),
        "lower_bound": n_avail * alpha * (1 - 10 * pair.k * alpha),
        "available": Fraction(n_avail),
    }


@dataclass(frozen=True)
class CoalescenceRecord:
    n: int
    trial: int
    time: int | None
    horizon: int

    @property
    def censored(self) -> bool:
        return self.time is None


def coalescence_time(g: Graph, X0: Coloring, Y0: Coloring, params: RoundParams, horizon: int) -> int | None:
    """First round at which two chains with shared keyed coins agree (``None`` if beyond ``horizon``)."""
    X, Y = X0, Y0
    for t in range(horizon + 1):
        if X.colors == Y.colors:
            return t
        if t == horizon:
            break
        p = params.at(params.round_index + t)
        X, _ = distributed_round(g, X, p, check=False)
        Y, _ = distributed_round(g, Y, p, check=False)
    return None


def coalescence_experiment(g: Graph, k: int, params: RoundParams, pairs: int | Sequence[tuple[Coloring, Coloring]],
                           horizon: int) -> dict:
    """Coalescence times of chains sharing coins keyed by (pres, target color).

    ``pairs`` is either explicit start pairs or a count of random proper
    start pairs drawn from ``params.seed``.
    """
    p = RoundParams(params.alpha, params.schedule, params.seed, params.round_index, "target")
    if isinstance(pairs, int):
        rng = random.Random(params.seed)
        starts = [(random_proper_coloring(g, k, rng), random_proper_coloring(g, k, rng)) for _ in range(pairs)]
    else:
        starts = list(pairs)
    records = []
    for i, (x0, y0) in enumerate(starts):
        t = coalescence_time(g, x0, y0, p.at(p.round_index + i * (horizon + 1)), horizon)
        records.append(CoalescenceRecord(g.n, i, t, horizon))
    times = sorted(horizon + 1 if r.censored else r.time for r in records)
    median = float(np.median(times)) if times else None
    return {
        "n": g.n,
        "k": k,
        "horizon": horizon,
        "records": records,
        "median": median,
        "censored": sum(r.censored for r in records),
    }
