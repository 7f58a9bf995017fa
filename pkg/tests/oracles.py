"""Independent reference implementations used only by the tests.

Nothing here shares code with the package: values are computed with mpmath at
high precision by direct recursion, without tables or memoization.
"""

from __future__ import annotations

from itertools import combinations

from mpmath import log, mp, mpf

mp.dps = 50


def _mp(v) -> mpf:
    from fractions import Fraction

    if isinstance(v, Fraction):
        return mpf(v.numerator) / v.denominator
    return mpf(v)


def f(x) -> mpf:
    return log(_mp(x) + 1, 2)


def compositions(n: int):
    """Every way to cut range(n) into consecutive nonempty pieces (as slice bounds)."""
    for k in range(n):
        for cuts in combinations(range(1, n), k):
            bounds = (0, *cuts, n)
            yield [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]


def partition_norm(values) -> mpf:
    """The implicit norm by recursion over interval partitions, no memo."""
    values = [abs(_mp(v)) for v in values]
    n = len(values)
    if n == 0:
        return mpf(0)
    best = max(values)
    if n == 1:
        return best
    for pieces in compositions(n):
        if len(pieces) < 2:
            continue
        total = sum(partition_norm(values[a:b]) for a, b in pieces)
        best = max(best, total / f(len(pieces)))
    return best


def successive_subsets(n: int):
    """All sequences E_1 < ... < E_l (l >= 2) of nonempty subsets of range(n)."""
    def rest(start: int):
        for size in range(1, n - start + 1):
            for first in combinations(range(start, n), size):
                yield [first]
                for tail in rest(first[-1] + 1):
                    yield [first, *tail]

    for seq in rest(0):
        if len(seq) >= 2:
            yield seq


def subset_norm(values) -> mpf:
    """The implicit norm with arbitrary successive subsets instead of intervals."""
    values = [abs(_mp(v)) for v in values]
    n = len(values)
    if n == 0:
        return mpf(0)
    best = max(values)
    for seq in successive_subsets(n):
        total = sum(subset_norm([values[i] for i in part]) for part in seq)
        best = max(best, total / f(len(seq)))
    return best


def triple_norm(values, p=1) -> mpf:
    ordered = sorted((abs(_mp(v)) for v in values), reverse=True)
    return sum(v / f(i) ** p for i, v in enumerate(ordered, start=1))


def gauge_norm(values, p=1) -> mpf:
    ordered = sorted((abs(_mp(v)) for v in values), reverse=True)
    best, total = mpf(0), mpf(0)
    for l, v in enumerate(ordered, start=1):
        total += v
        best = max(best, total / f(l) ** p)
    return best
