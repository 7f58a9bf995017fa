from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

import oracles
from conftest import interval_contains, vectors
from sspace.arith import LogMonomial
from sspace.aux_norms import (
    GaugeFunction,
    constant_Cpq,
    delta_eps_for_eta,
    delta_lower_estimate,
    dual_coefficient_check,
    extremal_xL,
    norm_g,
    triple_norm_g,
)
from sspace.vectors import FiniteVector


@lru_cache(maxsize=None)
def cached_constant(p, q):
    return constant_Cpq(p, q)


def test_norm_g_examples():
    assert norm_g(FiniteVector.from_list([Fraction(7, 3)])).exact == Fraction(7, 3)
    assert interval_contains(oracles.gauge_norm([1, 1]), norm_g(FiniteVector.from_list([1, 1])))
    assert norm_g(FiniteVector.from_list([2, 1])).exact == 2


def test_triple_norm_examples():
    assert triple_norm_g(FiniteVector.from_list([-4])).exact == 4
    value = triple_norm_g(FiniteVector.ones(3))
    assert interval_contains(oracles.triple_norm([1, 1, 1]), value)
    # oracle: 1 + 1/log2(3) + 1/2 = 2.13092975357...
    assert value.lo_q >= Fraction("2.1309297535") and value.hi_q <= Fraction("2.1309297536")


def test_constant_C12_against_direct_summation():
    value = constant_Cpq(1, 2)
    # oracle: mpmath sum to N = 200000 plus the integral tail, giving 1.8143573(4-7)
    assert value.lo_q <= Fraction("1.81435737") and value.hi_q >= Fraction("1.81435734")
    assert value.width() <= 2 * Fraction(1, 10**6)


def test_constant_first_term_is_one():
    value = constant_Cpq(1, 2)
    assert value.lo_q >= 1


def test_constant_diverges_when_p_not_below_q():
    with pytest.raises(ArithmeticError):
        constant_Cpq(2, 2)
    with pytest.raises(ArithmeticError):
        constant_Cpq(3, 1)


def test_extremal_vector():
    assert extremal_xL(Fraction(1, 3), 1)[0][1].exact == 1
    # f^p is concave only for p <= 1; that is where the normalization holds
    for p in (1, Fraction(1, 2)):
        for L in (1, 2, 5, 9):
            coeffs = [c for _, c in extremal_xL(p, L)]
            assert norm_g(coeffs, GaugeFunction(p)).contains(1)
    coeffs = [c for _, c in extremal_xL(1, 20)]
    assert all(a.certainly_gt(b) for a, b in zip(coeffs, coeffs[1:]))


def test_delta_eps_is_positive_and_monotone():
    etas = [Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
    values = [delta_eps_for_eta(1, 2, eta) for eta in etas]
    assert all(v > 0 for v in values)
    assert values == sorted(values)


@pytest.mark.parametrize("eta", [Fraction(1, 2), Fraction(1, 4)])
def test_delta_brute_force_within_eta(eta):
    eps = delta_eps_for_eta(1, 2, eta)
    assert delta_lower_estimate(1, 2, eps, dim=6, mesh=6).lo_q <= eta


def test_dual_coefficient_examples():
    assert dual_coefficient_check([1]).ok
    report = dual_coefficient_check([1, 1])
    assert not report.ok and report.first_failure == 2
    tie = LogMonomial.f_power(2, -1)
    assert dual_coefficient_check([1, tie]).ok


@given(vectors(max_support=12, span=30), st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(2)]))
def test_gauge_below_triple(x, p):
    assert norm_g(x, p).lo_q <= triple_norm_g(x, p).hi_q


@given(vectors(max_support=10, span=30))
def test_gauge_norms_match_oracle(x):
    values = x.coefficients()
    assert interval_contains(oracles.gauge_norm(values), norm_g(x))
    assert interval_contains(oracles.triple_norm(values, 2), triple_norm_g(x, 2))


@settings(max_examples=40)
@given(vectors(max_support=10, span=30))
def test_triple_norm_bounded_by_gauge(x):
    for p, q in ((1, 2), (Fraction(1, 2), 1)):
        lhs = triple_norm_g(x, q)
        rhs = cached_constant(Fraction(p), Fraction(q)) * norm_g(x, p)
        assert lhs.lo_q <= rhs.hi_q


@given(vectors(max_support=8), st.permutations(range(8)), st.lists(st.sampled_from([1, -1]), min_size=8, max_size=8))
def test_symmetric_in_coefficients(x, perm, signs):
    values = x.coefficients()
    shuffled = [signs[i] * values[j] for i, j in enumerate(k for k in perm if k < len(values))]
    y = FiniteVector.from_list(shuffled, start=5)
    assert norm_g(x).to_json() == norm_g(y).to_json()
    assert triple_norm_g(x).to_json() == triple_norm_g(y).to_json()


def test_triple_is_at_least_one_for_unit_coordinate():
    assert triple_norm_g(FiniteVector.unit(4)).exact == 1
    assert mpf(1) == oracles.triple_norm([1])
