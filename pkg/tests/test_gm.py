import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from cert_corpus import build_corpus
from conftest import interval_contains, rationals, vectors
from sspace import norm_S
from sspace.functionals import Average, Combo, Leaf, Special, coefficients, evaluate
from sspace.gm import (
    JExhausted,
    StrictBound,
    GMParams,
    activation_threshold,
    check_ris_arithmetic,
    collapses,
    even_toy_J,
    gm_norm,
    sigma_code,
    upper_bound,
    validate_certificate,
    validate_params,
)
from sspace.vectors import FiniteVector


def verdicts(report):
    return {v["name"]: v for v in report["verdicts"]}


def test_strict_params_validate():
    report = validate_params(GMParams.strict())
    assert report["first_violation"] is None
    assert all(v["holds"] in (True, "assumed") for v in report["verdicts"])


def test_geometric_eps_fails_the_weighted_tail_condition():
    # sum_{i>0} i^2 4^-(i+3) = 5/432 exceeds eps_0/10 = 1/640
    report = verdicts(validate_params(GMParams.strict("4^-n-3")))
    tail = report["2.1 sum_{i>n} i^2 eps_i <= eps_n/10"]
    assert tail["holds"] is False and tail["first_violation"] == 0
    assert tail["tail"] == "5/432" and tail["bound"] == "1/640"
    assert report["2.1 eps_0 < (f(2)-1)/2"]["holds"] is True
    assert report["2.1 eps_n <= 2^-n"]["holds"] is True


@pytest.mark.xfail(strict=True, reason="the weighted tail of a geometric sequence cannot stay below eps_n/10")
def test_geometric_eps_all_standard_conditions():
    report = validate_params(GMParams.strict("4^-n-3"))
    assert all(v["holds"] is True for v in report["verdicts"] if v["name"].startswith("2.1"))


def test_toy_J_growth_is_computed_term_by_term():
    report = verdicts(validate_params(GMParams.toy([4, 8, 16, 32])))
    growth = report["2.5 sum_{i>n} 2/j_i < 1/f(j_n)"]
    assert [n for n, _ in growth["per_n"]] == [1, 2, 3]
    assert growth["holds"] is False and growth["first_violation"] == 1


def test_strict_admissibility_is_assumed_with_witness():
    report = verdicts(validate_params(GMParams.strict()))
    entry = report["2.6 J admissible with 1.13.1-1.13.2"]
    assert entry["holds"] == "assumed" and len(entry["lower_bounds"]) == 3


def test_sigma_is_deterministic_and_defined_on_empty():
    p = GMParams.strict()
    seq = [Average(2, (Leaf(1), Leaf(2)))]
    assert sigma_code(seq, p) == sigma_code(list(seq), p)
    empty = sigma_code([], p)
    assert empty == sigma_code([], GMParams.strict()) and empty % 2 == 0
    toy = GMParams.toy(even_toy_J(10))
    assert sigma_code([], toy) == sigma_code([], toy) == 2


def test_sigma_injective_on_random_sequences():
    rng = random.Random(7)
    p = GMParams.strict()
    seen = {}
    while len(seen) < 10_000:
        length = rng.randint(0, 3)
        seq, pos = [], 1
        for _ in range(length):
            size = rng.randint(1, 3)
            seq.append(Average(size, tuple(Leaf(pos + i, Fraction(rng.randint(-9, 9), rng.randint(1, 9))) for i in range(size))))
            pos += size + rng.randint(0, 2)
        key = repr(seq)
        seen[key] = sigma_code(seq, p)
    assert len(set(seen.values())) == len(seen)
    assert all(code % 2 == 0 for code in seen.values())


def test_toy_sigma_exhausts():
    p = GMParams.toy((2, 4, 6, 8))
    sigma_code([Leaf(1)], p)
    sigma_code([Leaf(2)], p)
    with pytest.raises(JExhausted):
        sigma_code([Leaf(3)], p)


def test_certificate_examples():
    p = GMParams.toy(even_toy_J(20))
    assert validate_certificate(Average(2, (Leaf(1), Leaf(2))), p)
    heavy = validate_certificate(Combo(((Fraction(3, 4), Leaf(1)), (Fraction(1, 2), Leaf(2)))), p)
    assert not heavy and heavy.rules == {"l1-mass"}
    first = Average(8, tuple(Leaf(i) for i in range(1, 9)))
    right = p.J[sigma_code([first], p) - 1]
    wrong = Special(2, (first, Average(right + 2, tuple(Leaf(i) for i in range(9, 11 + right)))))
    verdict = validate_certificate(wrong, p)
    assert not verdict and "sigma-link" in verdict.rules
    assert any("sigma(prefix)" in d.message for d in verdict.diagnostics)


def test_evaluate_examples():
    five = FiniteVector.from_map({1: 5})
    assert evaluate(Leaf(1), five).exact == 5
    pair = evaluate(Average(2, (Leaf(1), Leaf(2))), FiniteVector.ones(2))
    assert interval_contains(2 / oracles.f(2), pair)
    dp = norm_S(FiniteVector.ones(2)).value
    assert pair.lo_q <= dp.hi_q and dp.lo_q <= pair.hi_q


tree_leaves = st.lists(st.tuples(st.integers(1, 12), rationals.filter(lambda q: abs(q) <= 1)), min_size=1, max_size=5)


@given(tree_leaves, vectors(), vectors(), rationals, rationals)
def test_evaluate_is_exactly_linear(parts, x, y, a, b):
    weight = Fraction(1, len(parts))
    t = Combo(tuple((weight, Leaf(pos, c)) for pos, c in parts))
    lhs = evaluate(t, x.scale(a) + y.scale(b))
    assert lhs.exact is not None
    assert lhs.exact == a * evaluate(t, x).exact + b * evaluate(t, y).exact


def test_unit_vector_has_norm_one():
    for p in (GMParams.strict(), GMParams.toy(even_toy_J(10))):
        result = gm_norm(FiniteVector.unit(1), p)
        assert result.lower.exact == 1


def test_activation_threshold():
    assert activation_threshold(GMParams.toy([4, 8, 16])) == 8
    strict = activation_threshold(GMParams.strict())
    assert isinstance(strict, StrictBound) and strict.log2_lower.lo_q > 200
    assert activation_threshold(GMParams.toy([1, 2])) >= 2


@settings(max_examples=40)
@given(vectors(max_support=10))
def test_strict_collapse(x):
    p = GMParams.strict()
    assert collapses(x, p)
    result = gm_norm(x, p)
    assert result.value.to_json() == norm_S(x).value.to_json()
    assert "f(j_2)" in result.justification


def test_toy_counterexample_exceeds_s_norm():
    p = GMParams.toy(even_toy_J(20))
    x = FiniteVector.ones(12)
    first = Average(8, tuple(Leaf(i) for i in range(1, 9)))
    size = p.J[sigma_code([first], p) - 1]
    assert size == 4
    cert = Special(2, (first, Average(4, tuple(Leaf(i) for i in range(9, 13)))))
    assert validate_certificate(cert, p)
    result = gm_norm(x, p, extra=[cert])
    assert result.lower.lo_q > norm_S(x).value.hi_q
    assert result.lower.hi_q <= result.upper.hi_q


def test_toy_enumeration_is_monotone_in_caps():
    x = FiniteVector.ones(12)
    values = []
    for k_max, d_max in ((2, 0), (2, 1), (3, 1)):
        p = GMParams.toy(even_toy_J(40))
        values.append(gm_norm(x, p, k_max=k_max, d_max=d_max).lower.lo_q)
    assert values == sorted(values)
    assert values[1] > values[0]


@settings(max_examples=30)
@given(vectors(max_support=8), st.integers(0, 20))
def test_valid_certificates_stay_below_upper_bound(x, seed):
    p, cases = build_corpus()
    upper, _ = upper_bound(x)
    for _, tree, valid, _ in cases[seed::21]:
        if valid:
            assert evaluate(tree, x).lo_q <= upper.hi_q


def test_valid_trees_have_coefficients_in_the_cube():
    p, cases = build_corpus()
    for name, tree, valid, _ in cases:
        if valid:
            assert all(-1 <= c.lo_q and c.hi_q <= 1 for c in coefficients(tree).values()), name


def test_ris_arithmetic_report():
    p = GMParams.strict()
    xs = [FiniteVector.unit(1), FiniteVector.unit(2)]
    report = check_ris_arithmetic(xs, [16, 64], p)
    assert report["all_hold"] is False
    assert report["rows"][0]["f(eps_n sqrt(k_n)) >= max supp(x_{n-1})/eps_n^2"] == "vacuous for n = 1"
    assert report["spreading_model"] == "not finitely checkable"
    # smaller eps needs a larger k
    needs = [int(check_ris_arithmetic([FiniteVector.unit(1)], [4], GMParams.strict(e))["rows"][0]["min_k_for_f(k)/k"])
             for e in ("2^-n-1", "2^-n-2", "2^-n-3")]
    assert needs == sorted(needs) and needs[0] < needs[-1]
