"""Flip schedules as exact rationals and their certified inequalities."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

MAX_SIZE = 6


class ScheduleError(ValueError):
    """A flip schedule violates f_1 = 1, monotonicity or the size-6 cutoff."""


@dataclass(frozen=True)
class FlipSchedule:
    """Flip probabilities indexed by cluster size.

    ``s[i]`` is the flip probability of a size-``i`` cluster; it is 0 for
    ``i >= 7`` and, by convention, for ``i = 0`` (an empty slot).
    """

    probs: tuple[Fraction, ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        probs = [Fraction(p) for p in self.probs]
        while len(probs) > MAX_SIZE and probs[-1] == 0:
            probs.pop()
        if len(probs) > MAX_SIZE:
            raise ScheduleError(f"schedule must vanish beyond size {MAX_SIZE}")
        probs += [Fraction(0)] * (MAX_SIZE - len(probs))
        if probs[0] != 1:
            raise ScheduleError(f"f_1 must equal 1, got {probs[0]}")
        for i, p in enumerate(probs, start=1):
            if not 0 <= p <= 1:
                raise ScheduleError(f"f_{i} = {p} is not a probability")
            if i > 1 and p > probs[i - 2]:
                raise ScheduleError(f"schedule not nonincreasing: f_{i} = {p} > f_{i - 1} = {probs[i - 2]}")
        object.__setattr__(self, "probs", tuple(probs))

    def __getitem__(self, i: int) -> Fraction:
        if 1 <= i <= MAX_SIZE:
            return self.probs[i - 1]
        return Fraction(0)

    def floats(self, upto: int = 8) -> list[float]:
        """``[f_0, f_1, ..., f_upto]`` as floats."""
        return [float(self[i]) for i in range(upto + 1)]

    def to_json(self) -> dict:
        return {"name": self.name, "probs": [_fmt(p) for p in self.probs]}


def _fmt(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def vigoda_schedule() -> FlipSchedule:
    F = Fraction
    return FlipSchedule((F(1), F(13, 42), F(1, 6), F(2, 21), F(1, 21), F(1, 84)), "vigoda")


def cdmpp_schedule() -> FlipSchedule:
    F = Fraction
    return FlipSchedule((F(1), F(185, 616), F(1, 6), F(47, 462), F(9, 154), F(2, 77)), "cdmpp")


BUILTIN = {"vigoda": vigoda_schedule, "cdmpp": cdmpp_schedule}


def get_schedule(name_or_probs) -> FlipSchedule:
    if isinstance(name_or_probs, FlipSchedule):
        return name_or_probs
    if isinstance(name_or_probs, str):
        if name_or_probs not in BUILTIN:
            raise ScheduleError(f"unknown schedule {name_or_probs!r}; choose from {sorted(BUILTIN)}")
        return BUILTIN[name_or_probs]()
    return FlipSchedule(tuple(Fraction(p) for p in name_or_probs))


def parse_schedule(text: str, name: str = "custom") -> FlipSchedule:
    """Parse a JSON list (or object with ``probs``) or whitespace-separated rationals."""
    text = text.strip()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text.split()
    if isinstance(data, dict):
        name = data.get("name", name)
        data = data["probs"]
    try:
        probs = tuple(Fraction(str(p)) for p in data)
    except (ValueError, ZeroDivisionError) as exc:
        raise ScheduleError(f"bad schedule entry: {exc}") from None
    return FlipSchedule(probs, name)


@dataclass(frozen=True)
class Certificate:
    name: str
    max_value: Fraction
    witness: tuple
    bound: Fraction
    strict: bool = False

    @property
    def passed(self) -> bool:
        return self.max_value < self.bound if self.strict else self.max_value <= self.bound

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "max_value": _fmt(self.max_value),
            "witness": list(self.witness),
            "bound": _fmt(self.bound),
            "strict": self.strict,
            "passed": self.passed,
        }


def _argmax(items):
    best = None
    for value, wit in items:
        if best is None or value > best[0]:
            best = (value, wit)
    return best


def check_P1(s: FlipSchedule) -> Certificate:
    """Max of ``i(f_i - f_{i+1}) + (j-1)(f_j - f_{j+1})`` over ``1 <= i, j <= 7``."""
    val, wit = _argmax(
        (i * (s[i] - s[i + 1]) + (j - 1) * (s[j] - s[j + 1]), (i, j))
        for i in range(1, 8)
        for j in range(1, 8)
    )
    return Certificate("P1", val, wit, Fraction(5, 6))


def check_P2(s: FlipSchedule) -> Certificate:
    """Max of ``2(i-1)f_i + f_{2i+1}`` over ``1 <= i <= 6``."""
    val, wit = _argmax((2 * (i - 1) * s[i] + s[2 * i + 1], (i,)) for i in range(1, 7))
    return Certificate("P2", val, wit, Fraction(2, 3))


@dataclass(frozen=True)
class AuxReport:
    size_excess: Certificate
    pair_sum: Certificate

    @property
    def passed(self) -> bool:
        return self.size_excess.passed and self.pair_sum.passed

    def to_json(self) -> dict:
        return {"size_excess": self.size_excess.to_json(), "pair_sum": self.pair_sum.to_json(), "passed": self.passed}


def check_aux(s: FlipSchedule) -> AuxReport:
    """The two auxiliary inequalities used for three or more equal-colored neighbours.

    ``(i - c) f_i < 1/4`` for ``i <= 7``, ``c in {2, 3}``, and
    ``a f_a + b f_b - min(f_a, f_b) <= 4/3`` for ``a, b <= 6``.
    """
    excess = _argmax(((i - c) * s[i], (i, c)) for i in range(1, 8) for c in (2, 3))
    pair = _argmax(
        (a * s[a] + b * s[b] - min(s[a], s[b]), (a, b))
        for a in range(1, MAX_SIZE + 1)
        for b in range(1, MAX_SIZE + 1)
    )
    return AuxReport(
        Certificate("aux_size_excess", excess[0], excess[1], Fraction(1, 4), strict=True),
        Certificate("aux_pair_sum", pair[0], pair[1], Fraction(4, 3)),
    )


def schedule_report(s: FlipSchedule) -> dict:
    p1, p2, aux = check_P1(s), check_P2(s), check_aux(s)
    return {
        "schedule": s.to_json(),
        "P1": p1.to_json(),
        "P2": p2.to_json(),
        "aux": aux.to_json(),
        "passed": p1.passed and p2.passed and aux.passed,
    }


def lowest_terms_lcd(s: FlipSchedule) -> int:
    """Least common denominator of the schedule entries."""
    from math import lcm

    out = 1
    for p in s.probs:
        out = lcm(out, p.denominator)
    return out

