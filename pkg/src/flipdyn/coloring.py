"""Colorings, distances, available colors and disagreement configurations."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from flipdyn.graph import Graph

OVERFLOW = 7  # size code for a 2-colored component with more than 6 vertices


@dataclass(frozen=True)
class Coloring:
    """A k-labelling: ``colors[v]`` in ``1..k`` for every vertex ``v``.

    Properness is not enforced here; see :func:`is_proper`.
    """

    colors: tuple[int, ...]
    k: int

    def __post_init__(self) -> None:
        colors = tuple(int(c) for c in self.colors)
        object.__setattr__(self, "colors", colors)
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        for v, c in enumerate(colors):
            if not 1 <= c <= self.k:
                raise ValueError(f"vertex {v} has color {c} outside 1..{self.k}")

    def __len__(self) -> int:
        return len(self.colors)

    def __getitem__(self, v: int) -> int:
        return self.colors[v]

    def __iter__(self):
        return iter(self.colors)

    def recolor(self, v: int, c: int) -> "Coloring":
        cols = list(self.colors)
        cols[v] = c
        return Coloring(tuple(cols), self.k)

    def to_text(self) -> str:
        return f"k={self.k}\n" + " ".join(str(c) for c in self.colors) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Coloring":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
        if not lines or not lines[0].startswith("k="):
            raise ValueError("coloring text must start with a 'k=<int>' header")
        try:
            k = int(lines[0][2:])
            colors = tuple(int(tok) for ln in lines[1:] for tok in ln.split())
        except ValueError as exc:
            raise ValueError(f"malformed coloring text: {exc}") from None
        return cls(colors, k)


def colors_of(sigma) -> tuple[int, ...]:
    return sigma.colors if isinstance(sigma, Coloring) else tuple(sigma)


def is_proper(g: Graph, sigma) -> bool:
    col = colors_of(sigma)
    if len(col) != g.n:
        raise ValueError(f"coloring has {len(col)} entries for {g.n} vertices")
    return all(col[u] != col[v] for u in range(g.n) for v in g.adjacency[u] if u < v)


def hamming(sigma, tau) -> int:
    a, b = colors_of(sigma), colors_of(tau)
    if len(a) != len(b):
        raise ValueError("colorings have different vertex sets")
    if isinstance(sigma, Coloring) and isinstance(tau, Coloring) and sigma.k != tau.k:
        raise ValueError(f"colorings use different k ({sigma.k} vs {tau.k})")
    return sum(x != y for x, y in zip(a, b))


def available_colors(g: Graph, sigma: Coloring, v: int) -> frozenset[int]:
    """Colors absent from the neighbourhood of ``v``."""
    used = {sigma.colors[w] for w in g.adjacency[v]}
    return frozenset(c for c in range(1, sigma.k + 1) if c not in used)


@dataclass(frozen=True)
class AdjacentPair:
    """Two colorings differing exactly at ``v_star``."""

    X: Coloring
    Y: Coloring
    v_star: int

    def __post_init__(self) -> None:
        if self.X.k != self.Y.k or len(self.X) != len(self.Y):
            raise ValueError("pair colorings must share vertex set and k")
        diff = [v for v in range(len(self.X)) if self.X[v] != self.Y[v]]
        if diff != [self.v_star]:
            raise ValueError(f"colorings differ at {diff}, expected exactly [{self.v_star}]")

    @classmethod
    def from_colorings(cls, X: Coloring, Y: Coloring) -> "AdjacentPair":
        diff = [v for v in range(len(X)) if X[v] != Y[v]]
        if len(diff) != 1:
            raise ValueError(f"colorings differ at {len(diff)} vertices, not 1")
        return cls(X, Y, diff[0])

    @property
    def c_X(self) -> int:
        return self.X[self.v_star]

    @property
    def c_Y(self) -> int:
        return self.Y[self.v_star]

    @property
    def k(self) -> int:
        return self.X.k


class ExtremalClass(str, Enum):
    C0 = "C0"
    C1 = "C1"
    C2 = "C2"


@dataclass(frozen=True)
class Configuration:
    """Cluster sizes around a single disagreement for one neighbour color.

    ``a[i]``/``b[i]`` are kept in neighbour order: slot ``i`` pairs the
    (c, c_Y) cluster of ``w_i`` in X with the (c, c_X) cluster of ``w_i``
    in Y. Entries are in ``0..7``; 0 marks a duplicate, 7 an oversize
    component.
    """

    A: int
    B: int
    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if len(self.a) != len(self.b) or not self.a:
            raise ValueError("a and b must be nonempty and of equal length")
        for x in (self.A, self.B, *self.a, *self.b):
            if not 0 <= x <= OVERFLOW:
                raise ValueError(f"configuration entry {x} outside 0..{OVERFLOW}")

    @property
    def d(self) -> int:
        return len(self.a)

    @classmethod
    def from_sizes(cls, a: Sequence[int], b: Sequence[int]) -> "Configuration":
        """Derive A and B from the slot sizes (sums past 6 become the overflow code)."""
        return cls(min(1 + sum(a), OVERFLOW), min(1 + sum(b), OVERFLOW), tuple(a), tuple(b))

    def canonical(self) -> tuple:
        return (self.A, self.B, tuple(sorted(zip(self.a, self.b), reverse=True)))

    def __str__(self) -> str:
        return f"({self.A}, {self.B}; {self.a}, {self.b})"


_C1 = {
    Configuration(3, 2, (2,), (1,)).canonical(),
    Configuration(2, 3, (1,), (2,)).canonical(),
}
_C2 = {
    Configuration(7, 3, (3, 3), (1, 1)).canonical(),
    Configuration(3, 7, (1, 1), (3, 3)).canonical(),
}
EXTREMAL_TUPLES = (
    Configuration(3, 2, (2,), (1,)),
    Configuration(2, 3, (1,), (2,)),
    Configuration(7, 3, (3, 3), (1, 1)),
    Configuration(3, 7, (1, 1), (3, 3)),
)


def classify(cfg: Configuration) -> ExtremalClass:
    key = cfg.canonical()
    if key in _C1:
        return ExtremalClass.C1
    if key in _C2:
        return ExtremalClass.C2
    return ExtremalClass.C0


def _size_code(comp) -> int:
    return OVERFLOW if comp is None or len(comp) > 6 else len(comp)


def configuration_at(g: Graph, pair: AdjacentPair, c: int) -> Configuration:
    """Configuration of color ``c`` around the disagreement of ``pair``."""
    from flipdyn.clusters import component

    X, Y, v = pair.X.colors, pair.Y.colors, pair.v_star
    if not (is_proper(g, pair.X) and is_proper(g, pair.Y)):
        raise ValueError("configuration_at requires proper colorings")
    nbrs = [w for w in g.adjacency[v] if X[w] == c]
    if not nbrs:
        raise ValueError(f"color {c} does not appear around vertex {v}")
    a = _slot_sizes(g, X, nbrs, pair.c_Y, component)
    b = _slot_sizes(g, Y, nbrs, pair.c_X, component)
    A = _size_code(component(g.adjacency, Y, v, c))
    B = _size_code(component(g.adjacency, X, v, c))
    return Configuration(A, B, a, b)


def _slot_sizes(g, col, nbrs, other, component) -> tuple[int, ...]:
    sizes = []
    covered: set[int] = set()
    for w in nbrs:
        if w in covered:
            sizes.append(0)
            continue
        comp = component(g.adjacency, col, w, other)
        covered.update(comp)
        sizes.append(_size_code(comp))
    return tuple(sizes)


def gamma(g: Graph, pair: AdjacentPair) -> Fraction:
    """Weighted fraction of extremal neighbour colors, ``(|C1| + 2|C2|) / max_degree``."""
    if g.max_degree == 0:
        return Fraction(0)
    counts = {ExtremalClass.C1: 0, ExtremalClass.C2: 0}
    for c in sorted({pair.X[w] for w in g.adjacency[pair.v_star]}):
        label = classify(configuration_at(g, pair, c))
        if label in counts:
            counts[label] += 1
    return Fraction(counts[ExtremalClass.C1] + 2 * counts[ExtremalClass.C2], g.max_degree)


def weighted_distance(g: Graph, pair: AdjacentPair, eta) -> Fraction:
    """Weighted distance ``1 - eta * (1 - gamma)`` of an adjacent pair."""
    eta = Fraction(eta)
    if not 0 < eta < Fraction(1, 2):
        raise ValueError(f"eta must lie in (0, 1/2), got {eta}")
    return 1 - eta * (1 - gamma(g, pair))


DELTA = Fraction(11, 6) - Fraction(161, 88)


def default_eta(max_degree: int, k: int) -> Fraction:
    return DELTA * max_degree / (34 * k)


def random_proper_coloring(g: Graph, k: int, rng) -> Coloring:
    """Greedy random proper coloring in a random vertex order (needs ``k > max_degree``)."""
    if k <= g.max_degree:
        raise ValueError(f"greedy coloring needs k > max_degree ({k} <= {g.max_degree})")
    order = list(range(g.n))
    rng.shuffle(order)
    col = [0] * g.n
    for v in order:
        used = {col[w] for w in g.adjacency[v]}
        col[v] = rng.choice([c for c in range(1, k + 1) if c not in used])
    return Coloring(tuple(col), k)
