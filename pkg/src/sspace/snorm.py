"""The implicit norm of the space S on finitely supported vectors.

The norm satisfies ``|x| = max(|x|_inf, max_l (1/f(l)) max sum_i |E_i x|)`` with
successive intervals E_1 < ... < E_l.  Every piece of an l >= 2 partition is
strictly shorter than the whole, so a bottom-up DP over intervals by length
evaluates it directly with no fixed-point iteration.  The support is compacted
to 1..n first (the basis is 1-spreading), pieces are taken to cover the range
(enlarging a piece never lowers its norm), and at most n pieces are used.

The kernel works in outward-rounded binary64.  The lower end is then raised to
the value of the extracted certificate, evaluated at the requested precision,
and when that value is rational a second pass in exact rational arithmetic with
rounded-up reciprocals tries to close the interval to a point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import inf, nextafter
from typing import Sequence

from . import _dp
from .arith import CertScalar, LogMonomial, cmax, f_power, inv_f, to_fraction
from .functionals import ZERO, Average, Functional, Leaf, evaluate
from .vectors import AnyVector, MonomialVector

EXACT_PASS_LIMIT = 24


def _float_enclosure(q: Fraction) -> tuple[float, float]:
    v = float(q)
    back = Fraction(v)
    if back == q:
        return v, v
    if back < q:
        return v, nextafter(v, inf)
    return nextafter(v, -inf), v


def _coefficient_enclosure(c) -> tuple[float, float]:
    if isinstance(c, LogMonomial):
        if c.is_rational:
            return _float_enclosure(abs(c.scale))
        e = abs(c).enclosure(64)
        return _float_enclosure(e.lo_q)[0], _float_enclosure(e.hi_q)[1]
    return _float_enclosure(abs(c))


def _sign(c) -> int:
    value = c.scale if isinstance(c, LogMonomial) else c
    return 1 if value > 0 else -1


def _rational_coefficients(x: AnyVector) -> list[Fraction] | None:
    if isinstance(x, MonomialVector):
        return x.to_rational().coefficients() if x.is_rational() else None
    return x.coefficients()


def _reciprocals(n: int, power: Fraction = Fraction(1)) -> tuple[list[float], list[float]]:
    rlo, rhi = [1.0, 1.0], [1.0, 1.0]
    for l in range(2, n + 1):
        r = inv_f(l, power, 53)
        rlo.append(float(r.lo))
        rhi.append(float(r.hi))
    return rlo, rhi


@dataclass
class PartitionTable:
    """DP tables for one vector, indexed over its compacted support."""

    positions: tuple[int, ...]
    coefficients: tuple
    mlo: Sequence[float]
    mhi: Sequence[float]
    split: Sequence[int]
    choice: Sequence[int]
    supk: Sequence[int]

    @classmethod
    def build(cls, x: AnyVector, kernel=None, power: Fraction = Fraction(1)) -> "PartitionTable":
        """Tables for the norm with weights 1/f(l)**power (power 1 is S)."""
        coeffs = x.coefficients()
        pairs = [_coefficient_enclosure(c) for c in coeffs]
        rlo, rhi = _reciprocals(len(coeffs), Fraction(power))
        run = kernel or _dp.run_dp
        mlo, mhi, split, choice, supk = run([p[0] for p in pairs], [p[1] for p in pairs], rlo, rhi)
        return cls(tuple(x.support()), tuple(coeffs), mlo, mhi, split, choice, supk)

    @property
    def n(self) -> int:
        return len(self.positions)

    def _at(self, l: int, i: int, j: int) -> int:
        n = self.n
        return l * n * n + i * n + j

    def norm_bounds(self, i: int, j: int) -> tuple[float, float]:
        at = self._at(1, i, j)
        return self.mlo[at], self.mhi[at]

    def piece_sum_bounds(self, l: int, i: int, j: int) -> tuple[float, float]:
        """Bounds on the best sum of norms over l covering pieces of [i, j]."""
        if not 1 <= l <= j - i + 1:
            raise ValueError(f"{l} pieces do not fit in [{i}, {j}]")
        at = self._at(l, i, j)
        return self.mlo[at], self.mhi[at]

    def pieces(self, l: int, i: int, j: int) -> list[tuple[int, int]]:
        out = []
        while l > 1:
            m = self.split[self._at(l, i, j)]
            out.append((m + 1, j))
            j = m
            l -= 1
        out.append((i, j))
        out.reverse()
        return out

    def certificate(self, i: int = 0, j: int | None = None) -> Functional:
        if j is None:
            j = self.n - 1
        l = self.choice[i * self.n + j]
        if l == 0:
            k = self.supk[i * self.n + j]
            return Leaf(self.positions[k], Fraction(_sign(self.coefficients[k])))
        return Average(l, tuple(self.certificate(a, b) for a, b in self.pieces(l, i, j)))


@dataclass(frozen=True)
class NormResult:
    value: CertScalar
    certificate: Functional
    argmax_l: int | None = None
    notes: tuple[str, ...] = field(default=())

    def to_json(self, with_certificate: bool = True) -> dict:
        from .functionals import to_json

        out = {"value": self.value.to_json(), "argmax_l": self.argmax_l}
        if with_certificate:
            out["certificate"] = to_json(self.certificate)
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _exact_upper(coeffs: Sequence[Fraction], prec: int | None) -> Fraction:
    """Rational upper bound on the norm using rounded-up reciprocals of f."""
    a = [abs(c) for c in coeffs]
    n = len(a)
    r = [Fraction(1), Fraction(1)]
    for l in range(2, n + 1):
        rec = inv_f(l, 1, prec)
        r.append(rec.exact if rec.exact is not None else to_fraction(rec.hi))
    norm: dict[tuple[int, int], Fraction] = {}
    best: dict[tuple[int, int, int], Fraction] = {}
    for length in range(1, n + 1):
        for i in range(n - length + 1):
            j = i + length - 1
            top = max(a[i : j + 1])
            for l in range(2, length + 1):
                if l == 2:
                    s = max(norm[i, m] + norm[m + 1, j] for m in range(i, j))
                else:
                    s = max(best[l - 1, i, m] + norm[m + 1, j] for m in range(i + l - 2, j))
                best[l, i, j] = s
                top = max(top, s * r[l])
            norm[i, j] = top
    return norm[0, n - 1]


def norm_S(x: AnyVector, prec: int | None = None, kernel=None) -> NormResult:
    """Certified norm of ``x`` in S with an extremal functional certificate."""
    if not x:
        return NormResult(CertScalar.of(0, prec), ZERO, None)
    table = PartitionTable.build(x, kernel)
    n = table.n
    klo, khi = table.norm_bounds(0, n - 1)
    cert = table.certificate()
    argmax = table.choice[n - 1] or None
    achieved = evaluate(cert, x, prec)
    rational = _rational_coefficients(x)
    if achieved.exact is not None and rational is not None and n <= EXACT_PASS_LIMIT:
        if _exact_upper(rational, prec) == achieved.exact:
            return NormResult(achieved, cert, argmax)
    lo = max(Fraction(klo), achieved.lo_q)
    hi = Fraction(khi)
    if achieved.exact is not None:
        hi = max(hi, achieved.exact)
    return NormResult(CertScalar.between(lo, hi, prec), cert, argmax)


def norm(x: AnyVector, prec: int | None = None) -> CertScalar:
    return norm_S(x, prec).value


def extremal_certificate(x: AnyVector, prec: int | None = None) -> Functional:
    if not x:
        raise ValueError("the zero vector has no norming functional")
    return norm_S(x, prec).certificate


def norm_l(x: AnyVector, l: int, prec: int | None = None, table: PartitionTable | None = None) -> CertScalar:
    """(1/f(l)) times the best sum of norms over at most l successive pieces."""
    if l < 2:
        raise ValueError("norm_l needs l >= 2")
    if not x:
        return CertScalar.of(0, prec)
    table = table or PartitionTable.build(x)
    n = table.n
    sums = []
    for pieces in range(1, min(l, n) + 1):
        lo, hi = table.piece_sum_bounds(pieces, 0, n - 1)
        sums.append(CertScalar.between(Fraction(lo), Fraction(hi), prec))
    return cmax(sums) / f_power(l, 1, prec)


def norm_l_profile(x: AnyVector, prec: int | None = None) -> dict[int, CertScalar]:
    """``norm_l(x, l)`` for every l from 2 to the support size."""
    if len(x) < 2:
        return {}
    table = PartitionTable.build(x)
    return {l: norm_l(x, l, prec, table) for l in range(2, len(x) + 1)}


def proves_at_least(x: AnyVector, bound, prec: int | None = None, result: NormResult | None = None) -> bool:
    """True when ||x|| >= bound is certified.

    Tries the interval first, then the exact symbolic value of the extremal
    certificate, which settles ties such as ||(1, 1)|| = 2/f(2).
    """
    from .arith import IndeterminateComparison, symbolic_compare, symbolic_enclosure
    from .functionals import evaluate_symbolic

    result = result or norm_S(x, prec)
    target = symbolic_enclosure(bound, prec)
    if result.value.certainly_ge(target):
        return True
    try:
        return symbolic_compare(evaluate_symbolic(result.certificate, x), bound, prec) >= 0
    except IndeterminateComparison:
        return False


def proves_at_most(x: AnyVector, bound, prec: int | None = None, result: NormResult | None = None) -> bool:
    """True when ||x|| <= bound is certified by the upper end of the enclosure."""
    from .arith import symbolic_enclosure

    result = result or norm_S(x, prec)
    return result.value.certainly_le(symbolic_enclosure(bound, prec))
