from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import interval_contains
from sspace import norm_S
from sspace.arith import LogMonomial
from sspace.epsilons import EpsSequence
from sspace.snorm import proves_at_least
from sspace.vectors import BlockSequence, FiniteVector, MonomialVector, same_distribution
from sspace.yardstick import (
    NotAdmissible,
    audit_lemma_1_12,
    audit_lemma_1_13,
    build_yardstick,
    check_l1_plus_average,
    coefficient_enclosures,
    is_admissible,
    james_blocking_search,
    l0,
    level_coefficient,
    product_tail,
    transplant,
)


def S(v):
    return norm_S(v).value


def test_admissibility_examples():
    assert is_admissible((2, 4)).ok
    assert is_admissible((2, 4)).witness == (1, 2)
    assert not is_admissible((2, 3))
    report = is_admissible((2, 4, 48))
    assert report.ok and report.witness[-1] == 48
    bad = is_admissible((2, 4, 24))
    assert not bad and bad.failure_index == 3
    assert is_admissible(()).ok


def test_subsequences_of_admissible_are_admissible():
    ms = (2, 4, 48)
    for size in range(len(ms) + 1):
        for sub in combinations(ms, size):
            assert is_admissible(sub), sub


@given(st.lists(st.sampled_from([2, 4, 6, 8]), min_size=1, max_size=3))
def test_subsequence_closure_property(seeds):
    # grow an admissible sequence by taking multiples of the required product
    ms = []
    for s in seeds:
        need = is_admissible(ms + [10**9]).witness[-1] if ms else 1
        step = need if need % 2 == 0 else 2 * need
        ms.append(step * s)
    assert is_admissible(ms)
    for size in range(len(ms)):
        for sub in combinations(ms, size):
            assert is_admissible(sub)


def test_yardstick_patterns():
    a = level_coefficient(2)
    b = level_coefficient(4)
    assert build_yardstick((2,)).coefficients == [a, a]
    y = build_yardstick((2, 4))
    assert y.coefficients == [a, b, b, a, b, b]
    assert y.levels == (1, 2, 2, 1, 2, 2)
    with pytest.raises(NotAdmissible):
        build_yardstick((2, 3))


def test_yardstick_coefficient_values():
    values = coefficient_enclosures(build_yardstick((2, 4)))
    assert interval_contains(oracles.f(2) / 2, values[0])
    assert interval_contains(oracles.f(4) / 4, values[1])


@pytest.mark.parametrize("m", [3, 7])
def test_flat_yardsticks_have_norm_one(m):
    y = build_yardstick((m,), require_admissible=False)
    assert S(y.vector).exact == 1


def test_yardstick_structure():
    y = build_yardstick((2, 4, 48))
    assert y.vector.support() == list(range(1, 55))
    enclosures = coefficient_enclosures(y)
    top = max(enclosures, key=lambda c: c.hi_q)
    assert top.to_json() == enclosures[0].to_json()
    for level, m in enumerate(y.spec.ms, start=1):
        piece = y.piece(level)
        flat = MonomialVector(tuple((i, level_coefficient(m)) for i in range(1, m + 1)))
        assert same_distribution(piece, flat)


@pytest.mark.parametrize("ms", [(2,), (2, 4), (2, 4, 48)])
def test_yardstick_norm_at_least_one(ms):
    y = build_yardstick(ms)
    assert proves_at_least(y.vector, 1)


def test_transplant():
    y = build_yardstick((2, 4))
    units = BlockSequence.of([FiniteVector.unit(i) for i in range(1, 7)])
    assert transplant((2, 4), units) == y.vector
    blocks = BlockSequence.of([FiniteVector.from_map({1: 1, 2: 1}), FiniteVector.unit(5)])
    out = transplant((2,), blocks)
    a = level_coefficient(2)
    assert out == MonomialVector(((1, a), (2, a), (5, a)))
    assert not same_distribution(out, build_yardstick((2,)).vector)
    with pytest.raises(ValueError):
        transplant((2, 4), BlockSequence.of([FiniteVector.unit(i) for i in range(1, 4)]))


def test_l1_plus_average():
    half = Fraction(1, 2)
    x = FiniteVector.from_list([half, half])
    parts = [FiniteVector.unit(1), FiniteVector.unit(2)]
    c = LogMonomial.f_power(2, -1)
    verdict = check_l1_plus_average(x, parts, 2, c, variant="l1")
    assert verdict.ok and verdict.is_average and all(verdict.parts_in_ball)
    assert all(ok for _, ok in verdict.sign_patterns) and len(verdict.sign_patterns) == 4
    single = check_l1_plus_average(FiniteVector.unit(3), [FiniteVector.unit(3)], 1, 1)
    assert single.ok
    assert not check_l1_plus_average(x, parts, 2, 1).ok
    with pytest.raises(ValueError):
        check_l1_plus_average(x, parts, 3, c)


def test_one_step_growth_audit():
    assert l0() == 63
    report = audit_lemma_1_12(3, 12, eps=Fraction(1, 2))
    verdicts = {v["name"]: v for v in report["verdicts"]}
    assert verdicts["1.12.1 m divisible by k"]["holds"] is True
    need = verdicts["1.12.2 f(m) >= C*50/eps^2"]
    assert need["holds"] is False and need["min_m"] == "2^200 - 1"
    assert report["feasible"] is False and report["report_only"]


def test_growth_constant_enclosure():
    from sspace.yardstick import growth_constant

    value = growth_constant()
    # oracle: 6 f(62) / (6 - f(62)) with mpmath at 50 digits
    assert interval_contains(6 * oracles.f(62) / (6 - oracles.f(62)), value)


def test_product_tail():
    value = product_tail(EpsSequence.geometric(1, Fraction(1, 2)), 3)
    # oracle: mpmath product to j = 200, 1.2715898821500649195...
    assert value.lo_q <= Fraction("1.2715898821500649195") <= value.hi_q
    assert product_tail(EpsSequence.geometric(0, 0), 1).exact == 1


def test_growth_sequence_audit_fails_at_first_index():
    report = audit_lemma_1_13(EpsSequence.geometric(1, Fraction(1, 2)), [2, 4, 48])
    assert report["first_failure"] == 1
    assert report["report_only"]


def test_james_blocking():
    oracle = lambda v: norm_S(v).value
    assert james_blocking_search(oracle, 1, Fraction(3, 10), 4).m == 1
    found = james_blocking_search(oracle, 2, Fraction(3, 10), 64)
    assert found.found and found.m <= 64 and len(found.blocks) == 2
    missing = james_blocking_search(oracle, 2, Fraction(1, 100), 4)
    assert not missing.found and missing.best_ratio is not None
