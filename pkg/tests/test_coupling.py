from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flipdyn import AdjacentPair, Coloring, RoundParams, cdmpp_schedule, generate, vigoda_schedule
from flipdyn.coupling import (X_SIDE, Y_SIDE, _member_states, adjacent_contraction, adjacent_pairs,
                              agreement_bound, coalescence_experiment, coalescence_time, coupled_law, coupled_round,
                              coupling_plan, dist2_disagreement_mass, group_joint)
from flipdyn.exact import transition_row

probs = st.fractions(min_value=0, max_value=1, max_denominator=12)


@given(st.lists(probs, min_size=1, max_size=3), st.lists(probs, min_size=1, max_size=3),
       st.fractions(min_value=0, max_value=1, max_denominator=20), st.data())
@settings(max_examples=80, deadline=None)
def test_group_joint_has_product_marginals(xf, yf, alpha, data):
    keys = [(i, j) for i in [None, *range(len(xf))] for j in [None, *range(len(yf))] if (i, j) != (None, None)]
    chosen = data.draw(st.lists(st.sampled_from(keys), unique=True, max_size=4))
    table = {key: F(1, 2) * ((xf[key[0]] if key[0] is not None else 1) * (yf[key[1]] if key[1] is not None else 1))
             for key in chosen}
    joint = group_joint(xf, yf, table, alpha)
    assert all(w > 0 for _, _, w in joint)
    mx, my = {}, {}
    for xs, ys, w in joint:
        mx[xs] = mx.get(xs, 0) + w
        my[ys] = my.get(ys, 0) + w
    assert mx == _member_states(xf, alpha)
    assert my == _member_states(yf, alpha)


@pytest.mark.parametrize("sched", [vigoda_schedule(), cdmpp_schedule()], ids=["vigoda", "cdmpp"])
def test_each_chain_follows_its_own_law_p3(p3, sched):
    alpha = F(1, 10)
    for pair in adjacent_pairs(p3, 4):
        law = coupled_law(p3, pair, alpha, sched)
        assert law.total() == 1
        assert law.marginal(X_SIDE) == transition_row(p3, pair.X, alpha, sched)
        assert law.marginal(Y_SIDE) == transition_row(p3, pair.Y, alpha, sched)


def test_each_chain_follows_its_own_law_c4(c4):
    alpha = F(1, 20)
    sched = cdmpp_schedule()
    for pair in adjacent_pairs(c4, 4)[::5]:
        law = coupled_law(c4, pair, alpha, sched)
        assert law.marginal(X_SIDE) == transition_row(c4, pair.X, alpha, sched)
        assert law.marginal(Y_SIDE) == transition_row(c4, pair.Y, alpha, sched)


def test_plans_cover_every_cluster(c4):
    for pair in adjacent_pairs(c4, 5):
        coupling_plan(c4, pair, vigoda_schedule(), F(1, 100)).check_cover()


def test_alpha_zero_keeps_distance_one(p3):
    pair = adjacent_pairs(p3, 4)[0]
    assert coupled_law(p3, pair, 0, vigoda_schedule()).expected_hamming() == 1


def test_plan_alpha_mismatch(p3):
    pair = adjacent_pairs(p3, 4)[0]
    plan = coupling_plan(p3, pair, vigoda_schedule(), F(1, 10))
    with pytest.raises(ValueError, match="alpha"):
        coupled_round(p3, pair, RoundParams(alpha=F(1, 20)), plan)


def test_contraction_on_p3_k4(p3):
    res = adjacent_contraction(p3, 4, RoundParams(alpha=F(1, 100)))
    worst = max(float(r.expected_hamming) for r in res)
    assert worst == pytest.approx(0.99502, abs=1e-5)
    assert all(r.contracts for r in res)
    res = adjacent_contraction(p3, 4, RoundParams(alpha=F(1, 100), schedule=cdmpp_schedule()))
    assert all(r.weighted_contracts for r in res)
    assert max(1 - r.beta for r in res) == pytest.approx(0.99518, abs=1e-5)


def test_sampled_matches_exact(p3):
    pair = AdjacentPair(Coloring((1, 2, 1), 4), Coloring((1, 3, 1), 4), 1)
    params = RoundParams(alpha=F(1, 8), seed=4)
    exact = adjacent_contraction(p3, 4, params, pair=pair)[0]
    samp = adjacent_contraction(p3, 4, params, mode="sampled", trials=6000, pair=pair)[0]
    assert abs(samp.expected_hamming - float(exact.expected_hamming)) < 4 * samp.stderr


def test_coupled_round_outputs_are_proper(p3):
    params = RoundParams(alpha=F(1, 4), seed=1)
    from flipdyn.coloring import is_proper
    for pair in adjacent_pairs(p3, 4):
        plan = coupling_plan(p3, pair, params.schedule, params.alpha)
        for t in range(20):
            x, y = coupled_round(p3, pair, params.at(t), plan)
            assert is_proper(p3, x) and is_proper(p3, y)


def test_dist2_and_agreement_on_p4():
    g = generate("path", n=4)
    params = RoundParams(alpha=F(1, 100))
    for pair in adjacent_pairs(g, 4)[:6]:
        law = coupled_law(g, pair, params.alpha, params.schedule)
        d2 = dist2_disagreement_mass(g, pair, params, law=law)
        assert d2["own_flip"] <= d2["bound_288"] and d2["literal"] <= d2["bound_288"]
        ag = agreement_bound(g, pair, params, law=law)
        assert ag["probability"] >= ag["lower_bound"]


def test_coalescence(c4):
    x = Coloring((1, 2, 1, 2), 5)
    params = RoundParams(alpha=F(1, 10), seed=3, keying="target")
    assert coalescence_time(c4, x, x, params, 10) == 0
    out = coalescence_experiment(generate("cycle", n=8), 5, RoundParams(alpha=F(1, 20), seed=2), 5, 2000)
    assert out["censored"] == 0 and out["median"] > 0
    assert len(out["records"]) == 5
