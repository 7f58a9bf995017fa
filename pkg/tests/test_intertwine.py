import json
from fractions import Fraction
from itertools import product

import pytest

from sspace.functionals import Leaf
from sspace.gm import GMParams, JExhausted, even_toy_J
from sspace.intertwine import (
    BaseExhausted,
    FamilyMissing,
    IntertwinedConstruction,
    build_construction,
    check_E65,
    check_E69,
    check_family,
    flip_sign,
    ratio_report,
)
from sspace.vectors import BlockSequence, FiniteVector


def fresh(n_count=3, **kw):
    return build_construction(GMParams.toy(even_toy_J(1728)), n_count=n_count, **kw)


@pytest.fixture(scope="module")
def construction():
    return fresh()


@pytest.fixture(scope="module")
def family_report(construction):
    return check_E65(construction)


def test_shape(construction):
    c = construction
    assert c.n_count == 3
    assert [len(s) for s in c.sizes] == [1, 2, 8]
    assert c.sizes[0] == (12,)
    assert len(c.families) == 26
    for i in range(3):
        assert c.us[i] + c.vs[i] == c.zs[i]
        assert c.us[i].to_json() != c.vs[i].to_json()


def test_blocks_are_successive(construction):
    c = construction
    ranges = [(min(z.support()), max(z.support())) for z in c.zs]
    assert all(a[1] < b[0] for a, b in zip(ranges, ranges[1:]))


def test_family_conditions_all_hold(family_report):
    assert family_report["count"] == 26
    assert family_report["all_hold"]
    assert family_report["inequalities_hold"]
    for fam in family_report["families"]:
        assert all(r["d_linkage"] for r in fam["rows"])
        assert all(r["c_equalities"] for r in fam["rows"])


def test_flipped_sign_breaks_the_inequality(construction):
    fam = construction.family((1, 2), (1, 1))
    report = check_family(construction, flip_sign(fam, 2))
    assert report["inequality_holds"] is False
    assert report["rows"][1]["c_inequality"] is False


@pytest.mark.parametrize("m", [1, 2])
def test_special_lower_bound_small(construction, m):
    for indices in [tuple(range(1, m + 1)), tuple(range(3 - m + 1, 4))]:
        for signs in product((1, -1), repeat=m):
            coeffs = [s * Fraction(k + 1, 2) for k, s in enumerate(signs)]
            report = check_E69(construction, coeffs, indices)
            assert report["holds"], report
            assert report["special_valid"], report["diagnostics"]


def test_special_lower_bound_rejects_bad_input(construction):
    with pytest.raises(ValueError):
        check_E69(construction, [1, 1], [2, 1])
    with pytest.raises(ValueError):
        check_E69(construction, [0], [1])
    with pytest.raises(FamilyMissing):
        check_E69(construction, [1], [4])


def test_prefix_stable():
    small, large = fresh(2), fresh(3)
    assert [z.to_json() for z in small.zs] == [z.to_json() for z in large.zs[:2]]
    assert small.sizes == large.sizes[:2]


def test_json_round_trip(construction):
    data = json.loads(json.dumps(construction.to_json()))
    back = IntertwinedConstruction.from_json(data)
    assert back.to_json() == construction.to_json()
    assert check_E65(back)["all_hold"]


def test_deterministic():
    assert json.dumps(fresh(2).to_json()) == json.dumps(fresh(2).to_json())


def test_first_q_changes_the_first_block():
    c = build_construction(GMParams.toy(even_toy_J(40)), n_count=1, first_q=1)
    assert c.sizes[0] == (4,)
    assert len(c.us[0]) == 2 and len(c.vs[0]) == 2


def test_short_base_reports_needed_size():
    base = BlockSequence.of([FiniteVector.unit(i) for i in range(1, 6)])
    p = GMParams.toy(even_toy_J(1728))
    with pytest.raises(BaseExhausted, match="needs 12 base blocks, got 5"):
        build_construction(p, base=base, n_count=1)
    assert not p.sigma.table
    with pytest.raises(BaseExhausted, match="needs 60 base blocks"):
        build_construction(p, base=base, n_count=2)


def test_short_J_exhausts():
    with pytest.raises(JExhausted):
        build_construction(GMParams.toy(even_toy_J(100)), n_count=3)


def test_custom_base_blocks():
    base = BlockSequence.of([FiniteVector.from_map({2 * i - 1: 1, 2 * i: 1}) for i in range(1, 61)])
    c = build_construction(GMParams.toy(even_toy_J(400)), base=base, n_count=2)
    assert check_E65(c)["all_hold"]


def test_toy_mode_required():
    with pytest.raises(ValueError):
        build_construction(GMParams.strict())


def test_ratio_report(construction):
    report = ratio_report(construction, 1)
    assert report["report_only"]
    with pytest.raises(ValueError):
        ratio_report(construction, 4)
