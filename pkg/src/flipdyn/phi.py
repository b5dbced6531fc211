"""The configuration functional Phi and exhaustive bound scans.

Phi is the expected Hamming change, per unit of activation probability,
contributed by one neighbour color under the coupling. The scan covers
every ordered configuration with ``d <= d_max`` slots and slot sizes
``0..size_max``; totals above six use the overflow code 7 (flip
probability 0).

The scan is exact. Small ``d`` is enumerated slot by slot. Larger ``d`` is
reduced to head slots plus a knapsack over the remaining slots (see
:func:`_dp_scan`); that step is cross-checked against brute force in the
test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable

from flipdyn.coloring import OVERFLOW, Configuration, ExtremalClass, classify
from flipdyn.schedules import FlipSchedule

GENERAL_RATE = Fraction(11, 6)
REFINED_RATE = Fraction(161, 88)


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def heads(cfg: Configuration) -> tuple[int, int]:
    """Lowest indices attaining the maximum a-size and b-size."""
    return cfg.a.index(max(cfg.a)), cfg.b.index(max(cfg.b))


def phi_value(cfg: Configuration, s: FlipSchedule) -> Fraction:
    i_max, j_max = heads(cfg)
    fA, fB = s[cfg.A], s[cfg.B]
    total = (cfg.A - cfg.a[i_max] - 1) * fA + (cfg.B - cfg.b[j_max] - 1) * fB
    for i, (a, b) in enumerate(zip(cfg.a, cfg.b)):
        q = s[a] - (fA if i == i_max else 0)
        qq = s[b] - (fB if i == j_max else 0)
        total += a * q + b * qq - min(q, qq)
    return total


def phi_bound(cfg: Configuration, s: FlipSchedule) -> Fraction:
    if s.name == "cdmpp" and classify(cfg) is ExtremalClass.C0:
        return REFINED_RATE * cfg.d - 1
    return GENERAL_RATE * cfg.d - 1


@dataclass(frozen=True)
class PhiReport:
    config: Configuration
    phi: Fraction
    bound: Fraction

    @property
    def slack(self) -> Fraction:
        return self.bound - self.phi

    def to_json(self) -> dict:
        c = self.config
        return {
            "A": c.A, "B": c.B, "a": list(c.a), "b": list(c.b),
            "class": classify(c).value,
            "phi": _fmt(self.phi), "bound": _fmt(self.bound), "slack": _fmt(self.slack),
        }


def phi(cfg: Configuration, s: FlipSchedule) -> PhiReport:
    return PhiReport(cfg, phi_value(cfg, s), phi_bound(cfg, s))


def plausible(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    """Order-free necessary conditions for a configuration to arise from a graph.

    Some slot is nonempty on each side, and a zeroed duplicate needs a
    cluster of size at least 3 holding two equal-colored neighbours.
    """
    for side in (a, b):
        m = max(side)
        if m == 0 or (0 in side and m < 3):
            return False
    return True


def iter_configurations(d: int, size_max: int = 6, only_plausible: bool = True) -> Iterable[Configuration]:
    """All ordered configurations with ``d`` slots, A and B derived from the slot sums."""
    for slots in itertools.product(itertools.product(range(size_max + 1), repeat=2), repeat=d):
        a = tuple(x for x, _ in slots)
        b = tuple(y for _, y in slots)
        if only_plausible and not plausible(a, b):
            continue
        yield Configuration.from_sizes(a, b)


@dataclass
class ScanResult:
    schedule: str
    d_max: int
    size_max: int
    rate: Fraction
    c0_only: bool
    per_d: dict[int, PhiReport] = field(default_factory=dict)
    violations: list[PhiReport] = field(default_factory=list)
    equality: list[PhiReport] = field(default_factory=list)
    examined: int = 0

    @property
    def worst(self) -> PhiReport:
        return min(self.per_d.values(), key=lambda r: r.slack)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "schedule": self.schedule,
            "d_max": self.d_max,
            "size_max": self.size_max,
            "rate": _fmt(self.rate),
            "c0_only": self.c0_only,
            "examined_explicitly": self.examined,
            "per_d_max": {str(d): r.to_json() for d, r in sorted(self.per_d.items())},
            "worst": self.worst.to_json(),
            "violations": [r.to_json() for r in self.violations],
            "equality_witnesses": [r.to_json() for r in self.equality],
            "passed": self.passed,
        }


class _Scaled:
    """Integer-scaled schedule: ``F[x] = L * s[x]`` for sizes 0..7."""

    def __init__(self, s: FlipSchedule):
        self.L = 1
        for p in s.probs:
            self.L = lcm(self.L, p.denominator)
        self.F = [int(s[x] * self.L) for x in range(OVERFLOW + 1)]

    def g0(self, a: int, b: int) -> int:
        fa, fb = self.F[a], self.F[b]
        return a * fa + b * fb - min(fa, fb)

    def head(self, a: int, b: int, fa_cut: int, fb_cut: int) -> int:
        q = self.F[a] - fa_cut
        qq = self.F[b] - fb_cut
        return a * q + b * qq - min(q, qq)


def _dp_tables(sc: _Scaled, amax: int, bmax: int, plausible_only: bool, rmax: int, cap: int):
    """``best[r][sa][sb]``: max sum of g0 over r slots with capped sums (None if empty)."""
    lo_a = 1 if plausible_only and amax < 3 else 0
    lo_b = 1 if plausible_only and bmax < 3 else 0
    items = [(a, b, sc.g0(a, b)) for a in range(lo_a, amax + 1) for b in range(lo_b, bmax + 1)]
    NEG = None
    best = [[[NEG] * (cap + 1) for _ in range(cap + 1)] for _ in range(rmax + 1)]
    arg = [[[None] * (cap + 1) for _ in range(cap + 1)] for _ in range(rmax + 1)]
    best[0][0][0] = 0
    for r in range(1, rmax + 1):
        prev, cur, carg = best[r - 1], best[r], arg[r]
        for sa in range(cap + 1):
            for sb in range(cap + 1):
                v = prev[sa][sb]
                if v is None:
                    continue
                for a, b, w in items:
                    na, nb = min(cap, sa + a), min(cap, sb + b)
                    if cur[na][nb] is None or v + w > cur[na][nb]:
                        cur[na][nb] = v + w
                        carg[na][nb] = (sa, sb, a, b)
    return best, arg


def _rebuild(arg, r: int, sa: int, sb: int) -> list[tuple[int, int]]:
    out = []
    while r > 0:
        psa, psb, a, b = arg[r][sa][sb]
        out.append((a, b))
        r, sa, sb = r - 1, psa, psb
    return out


def _head_options(amax: int, bmax: int):
    """Head slot lists: one slot holding both maxima, or two slots (ordered as placed first)."""
    yield [(amax, bmax)]
    for b1 in range(bmax + 1):
        for a2 in range(amax + 1):
            if b1 == bmax and a2 == amax:
                continue
            if b1 < bmax:
                yield [(amax, b1), (a2, bmax)]  # imax slot first
            else:
                yield [(a2, bmax), (amax, b1)]  # jmax slot first, a2 < amax


def _dp_scan(s: FlipSchedule, d: int, size_max: int, plausible_only: bool):
    """Exact maximum of ``L * Phi`` over all d-slot configurations; returns (value, configuration).

    Phi depends on the ordering only through the head slots (first
    maximum of a and of b); the other slots each add ``g0(a, b)`` and
    enter the rest only through the capped sums that fix A and B.
    """
    sc = _Scaled(s)
    cap = 6  # sum >= 6 means A >= 7
    best_val, best_cfg = None, None
    for amax in range(size_max + 1):
        for bmax in range(size_max + 1):
            if plausible_only and (amax == 0 or bmax == 0):
                continue
            tables, arg = _dp_tables(sc, amax, bmax, plausible_only, d, cap)
            for hd in _head_options(amax, bmax):
                r = d - len(hd)
                if r < 0:
                    continue
                if plausible_only:
                    if any(x == 0 for x, _ in hd) and amax < 3:
                        continue
                    if any(y == 0 for _, y in hd) and bmax < 3:
                        continue
                ha = sum(x for x, _ in hd)
                hb = sum(y for _, y in hd)
                ia = 0 if hd[0][0] == amax else 1
                jb = 0 if hd[0][1] == bmax else 1
                for sa in range(cap + 1):
                    for sb in range(cap + 1):
                        rest = tables[r][sa][sb]
                        if rest is None:
                            continue
                        A = min(OVERFLOW, 1 + min(cap, ha + sa))
                        B = min(OVERFLOW, 1 + min(cap, hb + sb))
                        fA, fB = sc.F[A], sc.F[B]
                        val = (A - amax - 1) * fA + (B - bmax - 1) * fB + rest
                        for idx, (x, y) in enumerate(hd):
                            val += sc.head(x, y, fA if idx == ia else 0, fB if idx == jb else 0)
                        if best_val is None or val > best_val:
                            slots = hd + _rebuild(arg, r, sa, sb)
                            best_val = val
                            best_cfg = Configuration.from_sizes(
                                tuple(x for x, _ in slots), tuple(y for _, y in slots)
                            )
    return Fraction(best_val, sc.L), best_cfg


def phi_scan(s: FlipSchedule, d_max: int = 6, size_max: int = 6, c0_only: bool = False,
             explicit_d: int = 2, plausible_only: bool = True) -> ScanResult:
    """Exhaustive check of Phi against its per-neighbour bound.

    The rate is 161/88 when ``c0_only`` (extremal configurations excluded),
    else 11/6. Configurations with ``d <= explicit_d`` are enumerated one
    by one and all equality witnesses are listed; larger ``d`` uses the
    exact maximisation in :func:`_dp_scan`.
    """
    if not 1 <= d_max <= 6 or not 1 <= size_max <= 6:
        raise ValueError("phi_scan supports 1 <= d_max, size_max <= 6")
    rate = REFINED_RATE if c0_only else GENERAL_RATE
    res = ScanResult(s.name, d_max, size_max, rate, c0_only)
    for d in range(1, d_max + 1):
        bound = rate * d - 1
        if d <= explicit_d:
            best = None
            for cfg in iter_configurations(d, size_max, plausible_only):
                if c0_only and classify(cfg) is not ExtremalClass.C0:
                    continue
                res.examined += 1
                rep = PhiReport(cfg, phi_value(cfg, s), bound)
                if rep.slack < 0:
                    res.violations.append(rep)
                elif rep.slack == 0:
                    res.equality.append(rep)
                if best is None or rep.phi > best.phi:
                    best = rep
            res.per_d[d] = best
        else:
            # for d >= 3 no configuration is extremal, so c0_only changes only the rate
            val, cfg = _dp_scan(s, d, size_max, plausible_only)
            assert phi_value(cfg, s) == val
            rep = PhiReport(cfg, val, bound)
            res.per_d[d] = rep
            if rep.slack < 0:
                res.violations.append(rep)
            elif rep.slack == 0:
                res.equality.append(rep)
    return res
