import random
import warnings
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flipdyn import Coloring, RoundParams, cdmpp_schedule, conflict, distributed_round, generate, overlap, run_chain
from flipdyn.coloring import is_proper, random_proper_coloring
from flipdyn.dynamics import glauber_step, theory_alpha, resolve, sequential_flip_step


def pairwise_resolve(g, active):
    """Oracle: quadratic scan with the cluster predicates."""
    over, confl, free = [], [], []
    for S in active:
        others = [T for T in active if T != S]
        if any(overlap(S, T) for T in others):
            over.append(S)
        elif any(conflict(g, S, T) for T in others):
            confl.append(S)
        else:
            free.append(S)
    return over, confl, free


@given(st.integers(0, 2**32), st.sampled_from([F(1, 10), F(1, 3), F(1, 2), F(1)]))
@settings(max_examples=40, deadline=None)
def test_round_is_proper_and_trace_sound(seed, alpha):
    g = generate("random_regular", n=12, d=3, seed=seed)
    sigma = random_proper_coloring(g, 5, random.Random(seed))
    out, tr = distributed_round(g, sigma, RoundParams(alpha=alpha, seed=seed))
    assert is_proper(g, out)
    assert (tr.deactivated_overlap, tr.deactivated_conflict, tr.flippable) == \
        tuple(tuple(x) for x in pairwise_resolve(g, tr.active))
    assert set(tr.flipped) <= set(tr.flippable)
    changed = {v for v in range(g.n) if out[v] != sigma[v]}
    assert changed == {v for cl in tr.flipped for v in cl.vertices if len(cl.colors) == 2}


def test_resolve_matches_oracle_when_everything_is_active():
    from flipdyn import enumerate_clusters
    g = generate("cycle", n=6)
    sigma = Coloring((1, 2, 3, 1, 2, 3), 5)
    act = list(enumerate_clusters(g, sigma))
    assert resolve(g, act) == pairwise_resolve(g, act)


def test_alpha_zero_is_identity(c4):
    sigma = Coloring((1, 2, 1, 2), 4)
    assert run_chain(c4, sigma, RoundParams(alpha=0, seed=5), 50, trajectory=False) == sigma


def test_chain_is_deterministic_given_seed(c4):
    sigma = Coloring((1, 2, 1, 2), 4)
    p = RoundParams(alpha=F(1, 5), seed=11, schedule=cdmpp_schedule())
    assert run_chain(c4, sigma, p, 30) == run_chain(c4, sigma, p, 30)
    assert run_chain(c4, sigma, p, 30) != run_chain(c4, sigma, p.__class__(alpha=F(1, 5), seed=12), 30)


def test_alpha_one_blocks_everything_with_neighbours(p3):
    # every cluster activates, so every cluster on a connected graph is blocked
    sigma = Coloring((1, 2, 3), 4)
    out, tr = distributed_round(p3, sigma, RoundParams(alpha=1))
    assert out == sigma and not tr.flippable


def test_theory_alpha():
    assert theory_alpha(8, 3) == (F(8, 3) - F(11, 6)) / 40000
    assert theory_alpha(5, 3) == F(1, 1000) / 25000  # eps clamped from below
    assert theory_alpha(100, 2) == F(1, 500000)     # and from above


def test_bad_inputs(p3):
    with pytest.raises(ValueError):
        RoundParams(alpha=F(3, 2))
    with pytest.raises(ValueError):
        RoundParams(keying="other")
    with pytest.raises(ValueError):
        distributed_round(p3, Coloring((1, 1, 2), 4), RoundParams())
    with pytest.raises(ValueError):
        run_chain(p3, Coloring((1, 2, 1), 4), RoundParams(), -1)


def test_small_palette_warns(c4):
    with pytest.warns(UserWarning, match="ergodicity"):
        distributed_round(c4, Coloring((1, 2, 1, 2), 3), RoundParams())
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        distributed_round(c4, Coloring((1, 2, 1, 2), 4), RoundParams())


def test_target_keying_runs(c4):
    sigma = Coloring((1, 2, 1, 2), 4)
    path = run_chain(c4, sigma, RoundParams(alpha=F(1, 4), seed=3, keying="target"), 40)
    assert all(is_proper(c4, s) for s in path)
    assert len({s.colors for s in path}) > 1


@given(st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_sequential_baselines_stay_proper(seed):
    rng = random.Random(seed)
    g = generate("random_regular", n=10, d=3, seed=seed)
    a = b = random_proper_coloring(g, 5, rng)
    for _ in range(50):
        a = glauber_step(g, a, rng)
        b = sequential_flip_step(g, b, cdmpp_schedule(), rng)
    assert is_proper(g, a) and is_proper(g, b)
