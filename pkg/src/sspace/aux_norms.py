"""Symmetric gauge norms built from powers of f, and the constants around them.

``norm_g`` is the largest normalized sum of the l biggest coordinates and
``triple_norm_g`` the weighted sum of the decreasing rearrangement.  Both are
1-unconditional and permutation invariant, so they only ever look at the
decreasing rearrangement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from itertools import combinations_with_replacement
from typing import Sequence

from .arith import (
    CertScalar,
    IndeterminateComparison,
    LogMonomial,
    symbolic_compare,
    symbolic_enclosure,
    certified_compare,
    cmax,
    csum,
    f_power,
    to_fraction,
)
from .vectors import FiniteVector, decreasing_rearrangement


@dataclass(frozen=True)
class GaugeFunction:
    """g = f**p."""

    p: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", Fraction(self.p))
        if self.p <= 0:
            raise ValueError("gauge exponent must be positive")

    def __call__(self, l: int, prec: int | None = None) -> CertScalar:
        return f_power(l, self.p, prec)


def _gauge(g) -> GaugeFunction:
    return g if isinstance(g, GaugeFunction) else GaugeFunction(Fraction(g))


def _sorted_bounds(values: Sequence[CertScalar]) -> tuple[list[CertScalar], list[CertScalar]]:
    """Lower and upper enclosing sequences for the decreasing rearrangement.

    The k-th largest true value lies between the k-th largest lower end and
    the k-th largest upper end, so sorting the two ends separately is sound
    even when intervals overlap.
    """
    lows = sorted(values, key=lambda v: v.lo_q, reverse=True)
    highs = sorted(values, key=lambda v: v.hi_q, reverse=True)
    return lows, highs


def _rearranged(x) -> list[CertScalar] | None:
    if isinstance(x, FiniteVector):
        return None
    return [abs(v) if isinstance(v, CertScalar) else CertScalar.of(abs(Fraction(v))) for v in x]


def norm_g(x, g=1, prec: int | None = None) -> CertScalar:
    """max over l of (sum of the l largest |x_i|) / g(l).

    ``x`` is a FiniteVector or a sequence of rationals or CertScalars.
    """
    g = _gauge(g)
    scalars = _rearranged(x)
    if scalars is None:
        values = decreasing_rearrangement(x)
        if not values:
            return CertScalar.of(0, prec)
        total, candidates = Fraction(0), []
        for l, v in enumerate(values, start=1):
            total += v
            candidates.append(CertScalar.of(total, prec) / g(l, prec))
        return cmax(candidates)
    if not scalars:
        return CertScalar.of(0, prec)
    lows, highs = _sorted_bounds(scalars)
    candidates = []
    lo_sum, hi_sum = CertScalar.of(0, prec), CertScalar.of(0, prec)
    for l in range(1, len(scalars) + 1):
        lo_sum = lo_sum + lows[l - 1]
        hi_sum = hi_sum + highs[l - 1]
        partial = CertScalar.between(lo_sum.lo_q, hi_sum.hi_q, prec) if lows != highs else lo_sum
        candidates.append(partial / g(l, prec))
    return cmax(candidates)


def triple_norm_g(x, g=1, prec: int | None = None) -> CertScalar:
    """sum over i of x#_i / g(i)."""
    g = _gauge(g)
    scalars = _rearranged(x)
    if scalars is None:
        values = decreasing_rearrangement(x)
        return csum((CertScalar.of(v, prec) / g(i, prec) for i, v in enumerate(values, start=1)), prec)
    lows, highs = _sorted_bounds(scalars)
    lo = csum((v / g(i, prec) for i, v in enumerate(lows, start=1)), prec)
    hi = csum((v / g(i, prec) for i, v in enumerate(highs, start=1)), prec)
    if lows == highs:
        return lo
    return CertScalar.between(lo.lo_q, hi.hi_q, prec)


# the constant C(p, q) ----------------------------------------------------


def _tail_bounds(N: int, p: Fraction, q: Fraction, prec: int | None) -> tuple[CertScalar, CertScalar]:
    """Two-sided bounds on sum_{n > N} (f^p(n) - f^p(n-1)) / f^q(n).

    Each term is the integral of (f^p)' over [n-1, n] divided by f^q(n).  Since
    f increases, f^q(x) <= f^q(n) <= (f(N+1)/f(N))^q f^q(x) there, so the tail
    sits between (f(N)/f(N+1))^q and 1 times the integral of (f^p)'/f^q over
    [N, oo), which is p / (q - p) * f(N)^(p - q).
    """
    integral = CertScalar.of(p / (q - p), prec) / f_power(N, q - p, prec)
    ratio = f_power(N, q, prec) / f_power(N + 1, q, prec)
    return integral * ratio, integral


def constant_Cpq(p, q, tail_tol=Fraction(1, 10**6), prec: int | None = None) -> CertScalar:
    """Certified enclosure of sum_{n >= 1} (f^p(n) - f^p(n-1)) / f^q(n).

    Terms are summed until the gap between the upper and lower tail bounds is
    at most ``tail_tol``; the two tail bounds are added to the two ends.
    """
    p, q, tail_tol = Fraction(p), Fraction(q), Fraction(tail_tol)
    if p <= 0 or tail_tol <= 0:
        raise ValueError("need p > 0 and tail_tol > 0")
    if p >= q:
        raise ArithmeticError(f"the series diverges for p = {p} >= q = {q}")
    total = CertScalar.of(0, prec)
    previous = CertScalar.of(0, prec)
    n, check = 0, 1
    while True:
        n += 1
        current = f_power(n, p, prec)
        total = total + (current - previous) / f_power(n, q, prec)
        previous = current
        if n == check:
            check *= 2
            low, high = _tail_bounds(n, p, q, prec)
            if (high.hi_q - low.lo_q) <= tail_tol:
                return CertScalar.between((total + low).lo_q, (total + high).hi_q, prec)


# the extremal vector ---------------------------------------------------------


def extremal_xL(p, L: int, prec: int | None = None) -> list[tuple[int, CertScalar]]:
    """Coefficients f^p(j) - f^p(j-1) at positions j = 1..L."""
    if L < 1:
        raise ValueError("L >= 1")
    p = Fraction(p)
    return [(j, f_power(j, p, prec) - f_power(j - 1, p, prec)) for j in range(1, L + 1)]


# epsilon for eta -----------------------------------------------------------


def _threshold_index(p: Fraction, q: Fraction, eta: Fraction, prec: int | None) -> int:
    """Least n with f(n)^(q-p) >= 1/eta; f increases so this holds for all larger n too."""
    target = 1 / eta
    gap = q - p

    def holds(n: int) -> bool:
        if n < 1:
            return False
        verdict = certified_compare(lambda b: f_power(n, gap, b), lambda b: CertScalar.of(target, b), prec)
        return verdict >= 0

    hi = 1
    while not holds(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def delta_eps_for_eta(p, q, eta, prec: int | None = None) -> Fraction:
    """A rational epsilon > 0 that forces the modulus Delta_(p,q)(epsilon) below eta.

    epsilon = eta * min over n <= n_eta of f^q(n)/n, where n_eta is the least n
    with 1/f^(q-p)(m) <= eta for every m >= n.  The map n -> f^q(n)/n rises and
    then falls, so the minimum over 1..n_eta sits at n = 1 or n = n_eta.  The
    returned rational is a certified lower bound of that value, which is still
    a valid choice because Delta is nondecreasing in epsilon.
    """
    p, q, eta = Fraction(p), Fraction(q), Fraction(eta)
    if not 0 < p < q or eta <= 0:
        raise ValueError("need 0 < p < q and eta > 0")
    n_eta = _threshold_index(p, q, eta, prec)
    ratio = f_power(n_eta, q, prec) / n_eta
    least = min(Fraction(1), ratio.lo_q)
    return eta * least


def threshold_index(p, q, eta, prec: int | None = None) -> int:
    return _threshold_index(Fraction(p), Fraction(q), Fraction(eta), prec)


def delta_lower_estimate(p, q, eps, dim: int = 6, mesh: int = 8, prec: int | None = None) -> CertScalar:
    """Brute-force lower estimate of Delta_(p,q)(eps) over vectors of length <= dim.

    Searches decreasing nonnegative grids ``eps * k / mesh`` (k = 0..mesh) and
    rescales each candidate into the unit ball of the f^p gauge norm without
    exceeding eps coordinatewise.  Only a lower estimate: the true sup runs over
    all of c00.
    """
    p, q, eps = Fraction(p), Fraction(q), Fraction(eps)
    best = CertScalar.of(0, prec)
    for length in range(1, dim + 1):
        for ks in combinations_with_replacement(range(mesh, 0, -1), length):
            x = [eps * k / mesh for k in ks]
            scale_norm = norm_g(x, GaugeFunction(p), prec)
            if scale_norm.lo_q > 1:
                factor = 1 / scale_norm.hi_q
                x = [v * factor for v in x]
            value = norm_g(x, GaugeFunction(q), prec)
            if value.lo_q > best.lo_q:
                best = value
    return best


# dual coefficient bound -------------------------------------------------------


@dataclass(frozen=True)
class DualCheck:
    ok: bool
    verdicts: tuple[bool, ...]
    first_failure: int | None

    def to_json(self) -> dict:
        return {"ok": self.ok, "verdicts": list(self.verdicts), "first_failure": self.first_failure}


def _magnitude(c):
    if isinstance(c, tuple):
        if len(c) == 1:
            return abs(c[0])
        return abs(symbolic_enclosure(c))
    if isinstance(c, (LogMonomial, CertScalar)):
        return abs(c)
    return LogMonomial.rational(abs(Fraction(c)))


def dual_coefficient_check(coeffs, prec: int | None = None) -> DualCheck:
    """Check xi#_n <= 1/f(n) for every n, certified.

    Entries may be rationals, CertScalars, LogMonomials, or tuples of
    LogMonomials read as sums (see ``functionals.symbolic_coefficients``).
    Symbolic entries decide exact ties such as 1/f(2) <= 1/f(2); an order
    that stays undecided at maximum precision counts as a failure.
    """
    mags = [_magnitude(c) for c in coeffs]
    try:
        ordered = sorted(mags, key=cmp_to_key(lambda a, b: symbolic_compare(a, b, prec)), reverse=True)
    except IndeterminateComparison:
        ordered = None
    verdicts = []
    if ordered is None:
        _, highs = _sorted_bounds([symbolic_enclosure(m, prec) for m in mags])
        ordered = highs
    for n, v in enumerate(ordered, start=1):
        try:
            verdicts.append(symbolic_compare(v, LogMonomial.f_power(n, -1), prec) <= 0)
        except IndeterminateComparison:
            verdicts.append(False)
    first = next((i + 1 for i, ok in enumerate(verdicts) if not ok), None)
    return DualCheck(first is None, tuple(verdicts), first)


def lemma_report(lemma: str, inputs: dict, verdicts: list, enclosures: list) -> dict:
    return {
        "lemma": lemma,
        "inputs": inputs,
        "verdicts": verdicts,
        "enclosures": [e.to_json() if isinstance(e, CertScalar) else e for e in enclosures],
    }


def as_fraction_list(values) -> list[Fraction]:
    return [to_fraction(v) if not isinstance(v, Fraction) else v for v in values]
