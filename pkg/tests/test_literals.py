import random

import pytest

from driftnf.errors import ProblemParseError
from driftnf.literals import (format_series, parse_rational, parse_series)
from driftnf.series import PoissonSeries


CASES = [
    "sin(x - t)",
    "cos(2*x)",
    "[ (1)/((y - 1)) ] * sin(x - t) + [ (1)/((y)) ] * sin(x)",
    "eps^2 * [ (-2*y^3 + 3*y^2 - 3*y + 1)/(2*(y - 1)^3*(y)^3) ]",
    "eps * mu * [ (1)/(2*(y)^2) ] * exp(i*(2*x - t))",
    "-[ (1)/(8*(y - 1)^3) ] * sin(2*x - 2*t)",
    "1/2 - [ (1/2) ] * cos(2*x)",
    "[ (i) ] * exp(i*(x)) - [ (i) ] * exp(i*(-x))",
    "mu^2 * [ (1 - 2*y)/(2*(y - 1)*(y)) ]",
]


@pytest.mark.parametrize("text", CASES)
def test_parse_print_roundtrip(text):
    s = parse_series(text)
    assert parse_series(format_series(s)) == s
    assert parse_series(format_series(s, sugar=False)) == s


def test_parse_sugar_matches_exponential():
    sugar = parse_series("sin(x - t)")
    expo = parse_series("-[ (i/2) ] * exp(i*(x - t)) + [ (i/2) ] * exp(i*(-x + t))")
    assert sugar == expo
    c1 = parse_series("cos(3*x + 2*t)")
    c2 = parse_series("[ (1/2) ] * exp(i*(3*x + 2*t)) + [ (1/2) ] * exp(i*(-3*x - 2*t))")
    assert c1 == c2


def test_parse_rational_factored_denominator():
    r = parse_rational("(1 - 2*y)/(2*(y - 1)*(y))")
    assert r.eval([2.0]) == pytest.approx((1 - 4) / (2 * 1 * 2))
    assert len(r.den) == 2


def test_parse_errors_are_reported():
    with pytest.raises(ProblemParseError):
        parse_series("sin(x")
    with pytest.raises(ProblemParseError):
        parse_series("foo(x)")
    with pytest.raises(ProblemParseError):
        parse_series("[ (y ]")
    with pytest.raises(ProblemParseError):
        parse_series("sin(x) * cos(x)")


def test_ell2_variables():
    s = parse_series("[ (y1*y2) ] * sin(x1 - 2*x2 + t)", ell=2)
    assert s.ell == 2
    assert parse_series(format_series(s), ell=2) == s


def test_random_roundtrip():
    rng = random.Random(12)
    pool = CASES
    for _ in range(15):
        s = PoissonSeries.zero(1)
        for t in rng.sample(pool, 3):
            s = s + parse_series(t).scale(rng.randint(-2, 2))
        assert parse_series(format_series(s)) == s
        assert parse_series(format_series(s, sugar=False)) == s
