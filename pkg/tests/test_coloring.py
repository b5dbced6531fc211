import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flipdyn import AdjacentPair, Coloring, Configuration, ExtremalClass, classify, generate, hamming, is_proper
from flipdyn.coloring import (
    DELTA,
    available_colors,
    configuration_at,
    default_eta,
    gamma,
    random_proper_coloring,
    weighted_distance,
)
from flipdyn.exact import enumerate_colorings


def brute_proper(g, k):
    return [c for c in itertools.product(range(1, k + 1), repeat=g.n)
            if all(c[u] != c[v] for u, v in g.edges())]


def test_reference_sigma_is_proper(c4, reference_pair):
    sigma, tau = reference_pair
    assert is_proper(c4, sigma) and is_proper(c4, tau)
    assert hamming(sigma, tau) == 2


@pytest.mark.parametrize("n,k", [(3, 3), (4, 3), (5, 4), (6, 3)])
def test_cycle_count_matches_chromatic_polynomial(n, k):
    g = generate("cycle", n=n)
    assert len(enumerate_colorings(g, k)) == (k - 1) ** n + (-1) ** n * (k - 1)


def test_enumeration_matches_brute_force(p3):
    assert list(enumerate_colorings(p3, 4).states) == brute_proper(p3, 4)
    assert len(enumerate_colorings(p3, 4)) == 36


def test_small_counts():
    assert len(enumerate_colorings(generate("path", n=2), 2)) == 2
    assert len(enumerate_colorings(generate("cycle", n=3), 2)) == 0


def test_coloring_validation_and_text():
    with pytest.raises(ValueError):
        Coloring((0, 1), 2)
    c = Coloring((1, 3, 2), 3)
    assert Coloring.from_text(c.to_text()) == c
    with pytest.raises(ValueError):
        Coloring.from_text("1 2 3\n")
    assert c.recolor(0, 2).colors == (2, 3, 2)


def test_hamming_rejects_mismatch():
    with pytest.raises(ValueError):
        hamming(Coloring((1, 2), 2), Coloring((1, 2), 3))
    with pytest.raises(ValueError):
        hamming((1, 2), (1, 2, 3))


def test_adjacent_pair_requires_single_difference():
    X, Y = Coloring((1, 2, 1), 4), Coloring((1, 3, 1), 4)
    pr = AdjacentPair.from_colorings(X, Y)
    assert (pr.v_star, pr.c_X, pr.c_Y) == (1, 2, 3)
    with pytest.raises(ValueError):
        AdjacentPair(X, X, 0)


def test_available_colors(p3):
    assert available_colors(p3, Coloring((1, 2, 1), 4), 1) == {2, 3, 4}


def test_extremal_classes():
    assert classify(Configuration(3, 2, (2,), (1,))) is ExtremalClass.C1
    assert classify(Configuration(2, 3, (1,), (2,))) is ExtremalClass.C1
    assert classify(Configuration(7, 3, (3, 3), (1, 1))) is ExtremalClass.C2
    assert classify(Configuration(3, 7, (1, 1), (3, 3))) is ExtremalClass.C2
    assert classify(Configuration(2, 2, (1,), (1,))) is ExtremalClass.C0


def test_configuration_on_path():
    # v*=1 between two vertices of color 1; the other chain's colors reach both ends
    g = generate("path", n=3)
    pr = AdjacentPair(Coloring((1, 2, 1), 4), Coloring((1, 3, 1), 4), 1)
    cfg = configuration_at(g, pr, 1)
    assert (cfg.A, cfg.B, cfg.a, cfg.b) == (3, 3, (1, 1), (1, 1))
    with pytest.raises(ValueError):
        configuration_at(g, pr, 4)


def test_configuration_marks_duplicates():
    # C4, v*=0: both neighbours colored 1 are joined in X through vertex 2 of color c_Y
    g = generate("cycle", n=4)
    pr = AdjacentPair(Coloring((2, 1, 3, 1), 4), Coloring((3, 1, 3, 1), 4), 0)
    cfg = configuration_at(g, pr, 1)
    assert (cfg.A, cfg.B, cfg.a, cfg.b) == (4, 3, (3, 0), (1, 1))


def test_configuration_overflow_code():
    # a 2-colored path of 8 vertices hanging off a neighbour of v*
    g = generate("path", n=10)
    X = Coloring((2, 1, 3, 1, 3, 1, 3, 1, 3, 1), 4)
    Y = Coloring((3, 1, 3, 1, 3, 1, 3, 1, 3, 1), 4)
    pr = AdjacentPair(X, Y, 0)
    cfg = configuration_at(g, pr, 1)
    assert cfg.b == (1,) and cfg.a == (7,)


def test_gamma_and_weighted_distance(p3):
    # v*=0; S_Y(0, 1) = {0,1,2} and S_X(1, c_Y) = {1,2}: the C1 tuple (3, 2; (2), (1))
    pr = AdjacentPair(Coloring((2, 1, 3), 4), Coloring((3, 1, 3), 4), 0)
    cfg = configuration_at(p3, pr, 1)
    assert (cfg.A, cfg.B, cfg.a, cfg.b) == (3, 2, (2,), (1,))
    assert gamma(p3, pr) == Fraction(1, 2)
    eta = Fraction(1, 10)
    assert weighted_distance(p3, pr, eta) == 1 - eta / 2
    plain = AdjacentPair(Coloring((2, 1, 4), 4), Coloring((3, 1, 4), 4), 0)
    assert gamma(p3, plain) == 0
    with pytest.raises(ValueError):
        weighted_distance(p3, pr, Fraction(1, 2))


def test_default_eta():
    assert DELTA == Fraction(1, 264)
    assert default_eta(2, 4) == Fraction(1, 264) * 2 / (34 * 4)


@given(st.integers(0, 2**32), st.integers(3, 7))
@settings(max_examples=25, deadline=None)
def test_random_proper_coloring_is_proper(seed, extra):
    g = generate("random_regular", n=12, d=3, seed=seed)
    sigma = random_proper_coloring(g, 3 + extra, random.Random(seed))
    assert is_proper(g, sigma)
