from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flipdyn import cdmpp_schedule, check_aux, check_P1, check_P2, vigoda_schedule
from flipdyn.schedules import FlipSchedule, ScheduleError, get_schedule, lowest_terms_lcd, parse_schedule


def brute_p1(s):
    f = [F(0)] + [s[i] for i in range(1, 9)]
    return max(i * (f[i] - f[i + 1]) + (j - 1) * (f[j] - f[j + 1]) for i in range(1, 8) for j in range(1, 8))


def test_vigoda_certificates():
    s = vigoda_schedule()
    assert check_P1(s).max_value == F(5, 6) and check_P1(s).passed
    assert check_P2(s).max_value == F(2, 3) and check_P2(s).passed
    aux = check_aux(s)
    assert aux.passed
    assert aux.size_excess.max_value == F(4, 21)
    assert aux.pair_sum.max_value == F(4, 3)


def test_cdmpp_certificates():
    s = cdmpp_schedule()
    assert check_P1(s).passed and check_P2(s).passed and check_aux(s).passed


@pytest.mark.parametrize("make", [vigoda_schedule, cdmpp_schedule])
def test_p1_matches_brute_force(make):
    s = make()
    assert check_P1(s).max_value == brute_p1(s)


def test_schedule_indexing():
    s = vigoda_schedule()
    assert s[0] == 0 and s[7] == 0 and s[100] == 0 and s[1] == 1
    assert lowest_terms_lcd(s) == 84


@pytest.mark.parametrize("probs", [
    (F(1, 2),),                       # f_1 must be 1
    (F(1), F(1, 3), F(1, 2)),         # increasing
    (F(1), F(1, 2), F(1, 3), F(1, 4), F(1, 5), F(1, 6), F(1, 7)),  # past size 6
    (F(1), F(-1, 2)),
])
def test_invalid_schedules(probs):
    with pytest.raises(ScheduleError):
        FlipSchedule(probs)


def test_parse_schedule():
    assert parse_schedule("[1, \"13/42\", \"1/6\", \"2/21\", \"1/21\", \"1/84\"]").probs == vigoda_schedule().probs
    assert parse_schedule("1 1/2 1/4").probs == (F(1), F(1, 2), F(1, 4), 0, 0, 0)
    with pytest.raises(ScheduleError):
        parse_schedule("1 2/0")
    with pytest.raises(ScheduleError):
        get_schedule("nope")


@given(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=50), min_size=0, max_size=5))
def test_valid_random_schedules_certify_consistently(tail):
    probs = (F(1),) + tuple(sorted(tail, reverse=True))
    s = FlipSchedule(probs)
    assert check_P1(s).max_value == brute_p1(s)
    assert check_P1(s).max_value >= 0
