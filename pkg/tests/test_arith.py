from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from mpmath import mpf, sqrt

from oracles import f
from conftest import interval_contains
from sspace.arith import (
    CertScalar,
    LogMonomial,
    PrecisionExhausted,
    certified_compare,
    f_eval,
    f_power,
    format_rational,
    parse_rational,
    sqrt_f_eval,
    symbolic_compare,
)


def test_f_exact_at_powers_of_two():
    assert f_eval(1).exact == 1
    assert f_eval(3).exact == 2
    assert f_eval(15, 2).exact == 16


def test_f2_enclosure_matches_oracle():
    value = f_eval(2)
    assert value.exact is None
    assert interval_contains(f(2), value)
    # frozen from the mpmath oracle: log2(3) = 1.5849625007211561...
    assert value.lo_q >= Fraction("1.5849625007") and value.hi_q <= Fraction("1.5849625008")


def test_sqrt_f():
    assert sqrt_f_eval(1).exact == 1
    assert sqrt_f_eval(15).exact == 2
    root2 = sqrt_f_eval(3)
    assert interval_contains(sqrt(2), root2)
    assert root2.lo_q >= Fraction("1.41421356") and root2.hi_q <= Fraction("1.41421357")


def test_precision_narrows_enclosure():
    widths = [f_eval(2, 1, bits).width() for bits in (32, 64, 128, 256)]
    assert widths == sorted(widths, reverse=True)
    assert widths[-1] < widths[0]


def test_max_width_escalates_and_can_exhaust():
    assert f_eval(5, 1, 24, max_width=Fraction(1, 2**100)).width() <= Fraction(1, 2**100)
    with pytest.raises(PrecisionExhausted):
        f_eval(5, 1, 24, max_width=Fraction(1, 2**5000))


def test_f_eval_rejects_bad_input():
    with pytest.raises(ValueError):
        f_eval(0)
    with pytest.raises(ValueError):
        f_power(3, 0)


def test_rational_round_trip():
    for text in ("3/2", "-7/9", "4", "0"):
        assert format_rational(parse_rational(text)) == text
    assert parse_rational("6/4") == Fraction(3, 2)


def test_cert_scalar_json_round_trip():
    value = f_eval(2)
    back = CertScalar.from_json(value.to_json())
    assert back.lo_q == value.lo_q and back.hi_q == value.hi_q
    exact = CertScalar.of(Fraction(3, 2))
    assert exact.to_json()["exact"] == "3/2"


@given(st.integers(1, 2000), st.integers(1, 2000), st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(2)]))
def test_f_monotone(a, b, p):
    if a == b:
        return
    lo, hi = sorted((a, b))
    x, y = f_power(lo, p), f_power(hi, p)
    assert not y.certainly_lt(x)
    assert not x.certainly_gt(y)
    assert x.lo_q <= y.hi_q


@given(st.integers(1, 500), st.integers(1, 500))
def test_interval_arithmetic_encloses_true_value(a, b):
    x, y = f_eval(a), f_eval(b)
    assert interval_contains(f(a) + f(b), x + y)
    assert interval_contains(f(a) * f(b), x * y)
    assert interval_contains(f(a) / f(b), x / y)
    assert interval_contains(1 / f(a), x.reciprocal())


@given(st.integers(1, 300), st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(3, 2), Fraction(-1)]))
def test_log_monomial_enclosure(l, p):
    value = LogMonomial.f_power(l, p).enclosure()
    assert interval_contains(f(l) ** (mpf(p.numerator) / p.denominator), value)


def test_symbolic_ties_are_exact():
    half = LogMonomial.f_power(2, Fraction(1, 2))
    assert symbolic_compare(half * half, LogMonomial.f_power(2, 1)) == 0
    assert symbolic_compare(LogMonomial.f_power(2, -1) * 2, LogMonomial.f_power(2, -1) * 2) == 0
    assert symbolic_compare(LogMonomial.f_power(2, 1), Fraction(3, 2)) == 1


def test_certified_compare_escalates():
    # 1/3 against a value equal to it only to ~80 bits
    third = Fraction(1, 3)
    close = third + Fraction(1, 2**80)
    assert certified_compare(lambda b: CertScalar.of(third, b), lambda b: CertScalar.of(close, b), 24) == -1


def test_determinism():
    assert f_eval(10, Fraction(1, 3)).to_json() == f_eval(10, Fraction(1, 3)).to_json()
