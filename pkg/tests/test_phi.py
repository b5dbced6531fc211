from fractions import Fraction as F

import pytest

from flipdyn import Configuration, cdmpp_schedule, phi_scan, vigoda_schedule
from flipdyn.coloring import EXTREMAL_TUPLES, ExtremalClass, classify
from flipdyn.phi import _dp_scan, iter_configurations, phi, phi_value, plausible


@pytest.mark.parametrize("make,size_max,filt", [
    (vigoda_schedule, 6, True),
    (cdmpp_schedule, 6, True),
    (vigoda_schedule, 4, False),
    (cdmpp_schedule, 4, False),
])
def test_dp_matches_brute_force_at_d3(make, size_max, filt):
    s = make()
    brute = max(phi_value(c, s) for c in iter_configurations(3, size_max, filt))
    val, cfg = _dp_scan(s, 3, size_max, filt)
    assert val == brute == phi_value(cfg, s)


@pytest.mark.parametrize("make", [vigoda_schedule, cdmpp_schedule])
def test_extremal_configurations_attain_equality(make):
    s = make()
    for cfg in EXTREMAL_TUPLES:
        rep = phi(cfg, s)
        assert rep.slack == 0
    assert phi(EXTREMAL_TUPLES[0], s).phi == F(5, 6)
    assert phi(EXTREMAL_TUPLES[2], s).phi == F(8, 3)


def test_general_scan_passes_for_both_schedules():
    for s in (vigoda_schedule(), cdmpp_schedule()):
        res = phi_scan(s)
        assert res.passed and res.worst.slack == 0
        assert set(res.per_d) == set(range(1, 7))


def test_cdmpp_equality_only_on_extremal_tuples():
    res = phi_scan(cdmpp_schedule())
    assert {r.config.canonical() for r in res.equality} == {c.canonical() for c in EXTREMAL_TUPLES}


def test_refined_scan():
    assert phi_scan(cdmpp_schedule(), c0_only=True).passed
    # the refined rate is specific to the modified schedule
    assert not phi_scan(vigoda_schedule(), c0_only=True).passed


def test_implausible_configurations_break_the_bound():
    s = vigoda_schedule()
    assert phi_value(Configuration(1, 2, (0,), (1,)), s) == F(71, 42)
    assert not plausible((0,), (1,))
    assert not phi_scan(s, d_max=2, plausible_only=False).passed


def test_classify():
    assert classify(Configuration(3, 2, (2,), (1,))) is ExtremalClass.C1
    assert classify(Configuration(7, 3, (3, 3), (1, 1))) is ExtremalClass.C2
    assert classify(Configuration(3, 2, (1,), (1,))) is ExtremalClass.C0


def test_scan_arguments():
    with pytest.raises(ValueError):
        phi_scan(vigoda_schedule(), d_max=7)
    js = phi_scan(cdmpp_schedule(), d_max=3).to_json()
    assert js["passed"] and js["rate"] == "11/6" and js["examined_explicitly"] > 0
