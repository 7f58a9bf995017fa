"""Acceptance suite: one test per criterion, each at its stated tolerance and time budget."""

import random
import time
from fractions import Fraction
from itertools import combinations, product

import pytest

import oracles
from cert_corpus import build_corpus
from conftest import interval_contains
from sspace import norm_S, norm_l
from sspace.arith import CertScalar, f_power
from sspace.aux_norms import constant_Cpq, dual_coefficient_check, extremal_xL, norm_g, triple_norm_g
from sspace.bench import run as run_bench, sample_vector
from sspace.cli import random_corpus
from sspace.functionals import Average, Leaf, Special, evaluate, symbolic_coefficients, uses_only_s_norm_rules
from sspace.gm import GMParams, even_toy_J, gm_norm, sigma_code, validate_certificate
from sspace.intertwine import build_construction, check_E65, check_E69
from sspace.vectors import FiniteVector
from sspace.yardstick import build_yardstick, is_admissible, level_coefficient

CORPUS_SEED = 2026
WIDTH = Fraction(1, 2**40)


@pytest.fixture(scope="module")
def corpus():
    return random_corpus(500, CORPUS_SEED, max_support=10, span=20)


@pytest.fixture(scope="module")
def corpus_norms(corpus):
    return [norm_S(x) for x in corpus]


def not_above(a, b) -> bool:
    """No certified violation of a <= b."""
    return a.lo_q <= b.hi_q


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed <= self.seconds, f"took {self.elapsed:.1f} s, budget {self.seconds} s"


def test_01_exact_flat_norms():
    with Budget(1):
        for n in (1, 2, 3, 4, 7, 8, 15):
            value = norm_S(FiniteVector.ones(n)).value
            assert interval_contains(n / oracles.f(n), value), n
            if n in (1, 3, 7, 15):
                assert value.exact == Fraction(n, (n + 1).bit_length() - 1)
            else:
                assert value.width() <= WIDTH


def test_02_oracle_equivalence():
    rng = random.Random(200)
    with Budget(30):
        for _ in range(200):
            k = rng.randint(1, 6)
            values = [Fraction(rng.choice([-1, 1]) * rng.randint(1, 20), rng.randint(1, 12)) for _ in range(k)]
            dp = norm_S(FiniteVector.from_list(values)).value
            assert interval_contains(oracles.partition_norm(values), dp), values


def test_03_structural_invariants(corpus, corpus_norms):
    rng = random.Random(3)
    failures = []
    with Budget(300):
        for idx, (x, result) in enumerate(zip(corpus, corpus_norms)):
            whole = result.value
            entries = x.entries
            if len(x) <= 8:
                patterns = product((1, -1), repeat=len(x))
            else:
                patterns = [tuple(rng.choice((1, -1)) for _ in entries) for _ in range(64)]
            for signs in patterns:
                flipped = FiniteVector.from_map({p: s * c for (p, c), s in zip(entries, signs)})
                if norm_S(flipped).value.to_json() != whole.to_json():
                    failures.append((idx, "unconditional", signs))
            for _ in range(5):
                positions = sorted(rng.sample(range(1, 200), len(x)))
                if norm_S(x.relocate(positions)).value.to_json() != whole.to_json():
                    failures.append((idx, "spreading", positions))
            for drop in x.support():
                smaller = FiniteVector.from_map({p: c for p, c in entries if p != drop})
                if not not_above(norm_S(smaller).value, whole):
                    failures.append((idx, "suppression", drop))
            other = corpus[(idx + 1) % len(corpus)]
            other_norm = corpus_norms[(idx + 1) % len(corpus)].value
            if not not_above(norm_S(x + other).value, whole + other_norm):
                failures.append((idx, "triangle"))
            parts = {l: norm_l(x, l) for l in range(2, len(x) + 1)}
            for l, part in parts.items():
                if not (not_above(whole / f_power(l), part) and not_above(part, whole)):
                    failures.append((idx, "sandwich", l))
            sup = CertScalar.of(x.sup_norm())
            best = max([sup, *parts.values()], key=lambda c: c.hi_q)
            if not (not_above(whole, best) and all(not_above(c, whole) for c in [sup, *parts.values()])):
                failures.append((idx, "reconstruction"))
    assert failures == []


def _grid(L: int, mesh: int):
    """Nonincreasing nonnegative vectors of length L with first entry 1 on a mesh."""
    for tail in combinations(range(mesh + L - 1), L - 1):
        # stars and bars: a nonincreasing sequence of L - 1 values in {0, ..., mesh}
        yield [Fraction(1)] + [Fraction(mesh - (t - slot), mesh) for slot, t in enumerate(tail)]


def test_04_gauge_inequalities_and_extremal_vectors(corpus, corpus_norms):
    C12 = constant_Cpq(1, 2)
    failures = []
    for idx, (x, result) in enumerate(zip(corpus, corpus_norms)):
        if not not_above(result.value, triple_norm_g(x, 1)):
            failures.append((idx, "S below triple"))
        if not not_above(triple_norm_g(x, 2), C12 * norm_g(x, 1)):
            failures.append((idx, "triple f^2 below C(1,2) gauge"))
    points = 0
    for L, mesh in ((1, 1), (2, 200), (3, 40), (4, 24), (5, 18)):
        coeffs = [c for _, c in extremal_xL(1, L)]
        assert norm_g(coeffs, 1).contains(1)
        target = triple_norm_g(coeffs, 2)
        for y in _grid(L, mesh):
            points += 1
            ratio = triple_norm_g(y, 2) / norm_g(y, 1)
            if not not_above(ratio, target):
                failures.append(("grid", L, y))
    assert points >= 10_000
    assert failures == []


def test_05_dual_coefficient_bound(corpus_norms):
    failures = []
    for idx, result in enumerate(corpus_norms):
        assert uses_only_s_norm_rules(result.certificate)
        coeffs = list(symbolic_coefficients(result.certificate).values())
        if not dual_coefficient_check(coeffs).ok:
            failures.append(idx)
    assert failures == []


def test_06_yardsticks():
    with Budget(10):
        a, b = level_coefficient(2), level_coefficient(4)
        assert build_yardstick((2, 4)).coefficients == [a, b, b, a, b, b]
        for m in (3, 7):
            assert norm_S(build_yardstick((m,), require_admissible=False).vector).value.exact == 1
        assert is_admissible((2, 4, 48))
        assert not is_admissible((2, 3))
        assert not is_admissible((2, 4, 24))
        for size in range(4):
            for sub in combinations((2, 4, 48), size):
                assert is_admissible(sub), sub


def test_07_strict_collapse_and_toy_counterexample(corpus, corpus_norms):
    strict = GMParams.strict()
    failures = [
        idx for idx, (x, result) in enumerate(zip(corpus, corpus_norms))
        if gm_norm(x, strict).value.to_json() != result.value.to_json()
    ]
    assert failures == []
    toy = GMParams.toy(even_toy_J(20))
    x = FiniteVector.ones(12)
    first = Average(8, tuple(Leaf(i) for i in range(1, 9)))
    size = toy.J[sigma_code([first], toy) - 1]
    cert = Special(2, (first, Average(size, tuple(Leaf(i) for i in range(9, 9 + size)))))
    assert validate_certificate(cert, toy)
    assert gm_norm(x, toy, extra=[cert]).lower.lo_q > norm_S(x).value.hi_q


def test_08_grammar_corpus_and_linearity():
    p, cases = build_corpus()
    assert len(cases) == 50
    wrong = [name for name, tree, valid, _ in cases if bool(validate_certificate(tree, p)) != valid]
    assert wrong == []
    rng = random.Random(8)
    rational = [tree for _, tree, _, _ in cases if evaluate(tree, FiniteVector.ones(400)).exact is not None]
    assert len(rational) >= 10
    for tree in rational:
        for _ in range(5):
            x = random_corpus(1, rng.randint(0, 10**6), max_support=10, span=400)[0]
            y = random_corpus(1, rng.randint(0, 10**6), max_support=10, span=400)[0]
            s, t = Fraction(rng.randint(-9, 9), rng.randint(1, 9)), Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            lhs = evaluate(tree, x.scale(s) + y.scale(t))
            assert lhs.exact == s * evaluate(tree, x).exact + t * evaluate(tree, y).exact


def test_09_intertwined_construction():
    with Budget(120):
        c = build_construction(GMParams.toy(even_toy_J(1728)), n_count=3, D=1)
        report = check_E65(c)
        rows = [r for fam in report["families"] for r in fam["rows"]]
        assert all(r["c_equalities"] for r in rows)
        assert all(r["d_linkage"] for r in rows)
        assert report["all_hold"]
        count = 0
        for m in (1, 2, 3):
            for indices in combinations((1, 2, 3), m):
                for signs in product((1, -1), repeat=m):
                    row = check_E69(c, signs, indices)
                    assert row["lower_bound_holds"], row
                    assert row["below_upper"], row
                    count += 1
        assert count == 26


def test_10_performance():
    with Budget(60):
        norm_S(sample_vector(60))
    report = run_bench((10, 20, 40, 60), repeats=2, full_norm=False)
    assert report["all_hold"], report["scaling"]
