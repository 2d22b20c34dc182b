import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jethelm.expr import (
    ZERO,
    EvalZeroDivisionError,
    NonZero,
    ParseError,
    Point,
    ProbablyZero,
    ProbeExhaustionError,
    ProvenZero,
    cos,
    diff,
    evaluate,
    exp,
    is_zero,
    parse,
    sin,
    t,
    as_var,
    x,
    y,
)
from jethelm.fuzz import random_polynomial, rng_for


def test_parse_examples():
    assert parse("y1^2/2", 1) == y(1) ** 2 / 2
    L = parse("exp(2*t)*(y1^2 - x1^2)/2", 1)
    assert L == exp(2 * t()) * (y(1) ** 2 - x(1) ** 2) / 2
    with pytest.raises(ParseError, match="out of range"):
        parse("y3", 2)


@pytest.mark.parametrize(
    "text, offset",
    [("y1 +* 2", 4), ("foo(t)", 0), ("(x1", 3), ("x1 $ 2", 3)],
)
def test_parse_errors_carry_offset(text, offset):
    with pytest.raises(ParseError) as info:
        parse(text, 1)
    assert info.value.offset == offset


def test_precedence_and_literals():
    assert parse("2^3^2", 1) == parse("512", 1)
    assert parse("-x1^2", 1) == -(x(1) ** 2)
    assert parse("0.25", 1) == parse("1/4", 1)
    assert parse(" x1 *  y1 ", 1) == x(1) * y(1)


def test_canonical_folding():
    e = parse("x1 + y1 - x1 + 0*t + 1*y1", 1)
    assert e == 2 * y(1)
    assert parse("y1 - y1", 1) == ZERO


def test_diff_examples():
    assert diff(parse("y1*y2", 2), y(2)) == y(1)
    assert diff(exp(2 * t()), t()) == 2 * exp(2 * t())
    assert diff(sin(x(1) * y(1)), x(1)) == y(1) * cos(x(1) * y(1))


def test_eval_examples():
    assert evaluate(y(1) ** 2 / 2, Point(0, (1,), (3,))) == 4.5
    assert evaluate(exp(2 * t()), Point(0, (0,), (0,))) == 1.0
    with pytest.raises(EvalZeroDivisionError):
        evaluate(parse("1/x1", 1), Point(0, (0,), (1,)))


def test_is_zero_examples():
    assert isinstance(is_zero(y(1) - y(1)), ProvenZero)
    v = is_zero(sin(t()) ** 2 + cos(t()) ** 2 - 1, 32, 1e-9, n=1)
    assert isinstance(v, ProbablyZero) and v.probes == 32
    v = is_zero(parse("y1*y2 - 1", 2), n=2)
    assert isinstance(v, NonZero)
    w = v.witness
    assert abs(w.y[0] * w.y[1] - 1 - v.value) < 1e-12


def test_probe_exhaustion():
    with pytest.raises(ProbeExhaustionError):
        is_zero(parse("ln(-1 - x1^2)", 1), n=1)


def test_domain_points_are_resampled():
    v = is_zero(parse("sqrt(x1)^2 - x1", 1), n=1)
    assert v.is_zero


def _fd(e, p: Point, var, hstep=1e-5):
    def shifted(d):
        tt, xx, yy = p.t, list(p.x), list(p.y)
        if var.kind == "t":
            tt += d
        elif var.kind == "x":
            xx[var.index - 1] += d
        else:
            yy[var.index - 1] += d
        return evaluate(e, Point(tt, tuple(xx), tuple(yy)))

    return (shifted(hstep) - shifted(-hstep)) / (2 * hstep)


@pytest.mark.parametrize("seed", range(5))
def test_diff_matches_central_differences(seed):
    rng = rng_for(seed, "fd")
    n = 2
    e = random_polynomial(rng, n, degree=3, terms=4) * exp(t() * Fraction(1, 3)) + sin(x(1) * y(2))
    np_rng = np.random.default_rng(seed)
    for v in [t(), x(1), x(2), y(1), y(2)]:
        d = diff(e, v)
        for _ in range(20):
            z = np_rng.uniform(-2, 2, 2 * n + 1)
            p = Point(z[0], tuple(z[1 : n + 1]), tuple(z[n + 1 :]))
            exact, approx = evaluate(d, p), _fd(e, p, as_var(v))
            assert math.isclose(exact, approx, rel_tol=1e-6, abs_tol=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_print_parse_round_trip(seed, n):
    rng = rng_for(seed, "rt")
    e = random_polynomial(rng, n, degree=3, terms=4)
    if rng.random() < 0.5:
        e = e * exp(random_polynomial(rng, n, 1, 2)) + cos(random_polynomial(rng, n, 1, 2))
    if rng.random() < 0.3:
        e = e / (1 + x(1) ** 2)
    assert parse(str(e), n) == e
    assert parse(str(parse(str(e), n)), n) == parse(str(e), n)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_proven_zero_is_sound(seed):
    rng = rng_for(seed, "sound")
    e = random_polynomial(rng, 2, degree=2, terms=3)
    v = is_zero(e, n=2)
    if isinstance(v, ProvenZero):
        assert e == ZERO
    else:
        assert isinstance(v, NonZero)
