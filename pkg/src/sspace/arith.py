"""Exact rationals and certified enclosures for f(x) = log2(x + 1) and friends.

Rationals are plain :class:`fractions.Fraction` values.  Irrational quantities
are carried as :class:`CertScalar` intervals whose endpoints are MPFR numbers
produced under directed rounding, so ``lo <= true value <= hi`` holds by
construction rather than by a padding heuristic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Iterable, Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

DEFAULT_PRECISION = 64
MIN_PRECISION = 24
MAX_PRECISION = 4096
PRECISION_ENV = "SSPACE_PRECISION"

Number = Union[int, Fraction, "CertScalar"]


class PrecisionExhausted(ArithmeticError):
    """Raised when an enclosure cannot be made narrow enough at the maximum precision."""


class IndeterminateComparison(PrecisionExhausted):
    """Raised when two enclosures still overlap at the maximum precision."""


def default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_PRECISION
    bits = int(raw)
    if bits < MIN_PRECISION:
        raise ValueError(f"{PRECISION_ENV}={bits} is below the minimum of {MIN_PRECISION} bits")
    return bits


def _resolve(prec: int | None) -> int:
    bits = default_precision() if prec is None else int(prec)
    if bits < MIN_PRECISION:
        raise ValueError(f"precision {bits} is below the minimum of {MIN_PRECISION} bits")
    return bits


def _down(prec: int):
    return gmpy2.context(precision=prec, round=gmpy2.RoundDown)


def _up(prec: int):
    return gmpy2.context(precision=prec, round=gmpy2.RoundUp)


def _exact_mpfr(n: int):
    """An integer as an mpfr with enough bits to hold it exactly."""
    return mpfr(mpz(n), max(2, int(n).bit_length()))


def to_fraction(value) -> Fraction:
    """Exact conversion of an mpfr, mpq, int or Fraction to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    q = mpq(value)
    return Fraction(int(q.numerator), int(q.denominator))


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse "p/q", an integer, or a decimal literal into an exact Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    return Fraction(str(text).strip())


def format_rational(q: Fraction | int) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _dyadic_decimal(q: Fraction) -> str:
    """Exact decimal expansion of a dyadic rational."""
    num, den = q.numerator, q.denominator
    k = den.bit_length() - 1
    if den != 1 << k:
        raise ValueError("not a dyadic rational")
    sign = "-" if num < 0 else ""
    digits = str(abs(num) * 5**k)
    if k == 0:
        return sign + digits
    digits = digits.rjust(k + 1, "0")
    whole, frac = digits[:-k], digits[-k:].rstrip("0")
    return sign + whole + ("." + frac if frac else "")


def _mpfr_from_fraction(q: Fraction, prec: int, upward: bool):
    with (_up(prec) if upward else _down(prec)):
        return mpfr(mpq(q.numerator, q.denominator))


@dataclass(frozen=True)
class CertScalar:
    """A certified enclosure ``lo <= value <= hi``, exact when ``exact`` is set."""

    lo: object
    hi: object
    exact: Fraction | None = None
    prec: int = DEFAULT_PRECISION

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    # construction -------------------------------------------------------

    @classmethod
    def of(cls, value: Number, prec: int | None = None) -> "CertScalar":
        if isinstance(value, CertScalar):
            return value
        q = Fraction(value)
        bits = _resolve(prec)
        return cls(
            _mpfr_from_fraction(q, bits, upward=False),
            _mpfr_from_fraction(q, bits, upward=True),
            q,
            bits,
        )

    @classmethod
    def between(cls, lo: Fraction, hi: Fraction, prec: int | None = None) -> "CertScalar":
        """Enclosure of an unknown value known to lie in ``[lo, hi]``."""
        bits = _resolve(prec)
        lo, hi = Fraction(lo), Fraction(hi)
        if lo == hi:
            return cls.of(lo, bits)
        return cls(
            _mpfr_from_fraction(lo, bits, upward=False),
            _mpfr_from_fraction(hi, bits, upward=True),
            None,
            bits,
        )

    # inspection ---------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    @property
    def lo_q(self) -> Fraction:
        return self.exact if self.exact is not None else to_fraction(self.lo)

    @property
    def hi_q(self) -> Fraction:
        return self.exact if self.exact is not None else to_fraction(self.hi)

    def width(self) -> Fraction:
        if self.exact is not None:
            return Fraction(0)
        return to_fraction(self.hi) - to_fraction(self.lo)

    def midpoint(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return float((to_fraction(self.lo) + to_fraction(self.hi)) / 2)

    def contains(self, value: Number) -> bool:
        if isinstance(value, CertScalar):
            return self.lo <= value.lo and value.hi <= self.hi
        q = Fraction(value)
        if self.exact is not None:
            return q == self.exact
        return to_fraction(self.lo) <= q <= to_fraction(self.hi)

    def overlaps(self, other: "CertScalar") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    # certified order ----------------------------------------------------

    def certainly_lt(self, other: Number) -> bool:
        other = CertScalar.of(other, self.prec)
        if self.exact is not None and other.exact is not None:
            return self.exact < other.exact
        return self.hi_q < other.lo_q

    def certainly_le(self, other: Number) -> bool:
        other = CertScalar.of(other, self.prec)
        if self.exact is not None and other.exact is not None:
            return self.exact <= other.exact
        return self.hi_q <= other.lo_q

    def certainly_gt(self, other: Number) -> bool:
        return CertScalar.of(other, self.prec).certainly_lt(self)

    def certainly_ge(self, other: Number) -> bool:
        return CertScalar.of(other, self.prec).certainly_le(self)

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other: Number) -> "CertScalar":
        return other if isinstance(other, CertScalar) else CertScalar.of(other, self.prec)

    def __neg__(self) -> "CertScalar":
        exact = -self.exact if self.exact is not None else None
        # gmpy2 rounds even negation to the context precision
        with _down(max(self.prec, self.lo.precision, self.hi.precision)):
            lo, hi = -self.hi, -self.lo
        return CertScalar(lo, hi, exact, self.prec)

    def __add__(self, other: Number) -> "CertScalar":
        other = self._coerce(other)
        bits = max(self.prec, other.prec)
        if self.exact is not None and other.exact is not None:
            return CertScalar.of(self.exact + other.exact, bits)
        with _down(bits):
            lo = self.lo + other.lo
        with _up(bits):
            hi = self.hi + other.hi
        return CertScalar(lo, hi, None, bits)

    __radd__ = __add__

    def __sub__(self, other: Number) -> "CertScalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Number) -> "CertScalar":
        return self._coerce(other) - self

    def __mul__(self, other: Number) -> "CertScalar":
        other = self._coerce(other)
        bits = max(self.prec, other.prec)
        if self.exact is not None and other.exact is not None:
            return CertScalar.of(self.exact * other.exact, bits)
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        with _down(bits):
            lo = min(a * b for a, b in pairs)
        with _up(bits):
            hi = max(a * b for a, b in pairs)
        return CertScalar(lo, hi, None, bits)

    __rmul__ = __mul__

    def reciprocal(self) -> "CertScalar":
        if self.exact is not None:
            if self.exact == 0:
                raise ZeroDivisionError("reciprocal of zero")
            return CertScalar.of(1 / self.exact, self.prec)
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("reciprocal of an enclosure containing zero")
        with _down(self.prec):
            lo = 1 / self.hi
        with _up(self.prec):
            hi = 1 / self.lo
        return CertScalar(lo, hi, None, self.prec)

    def __truediv__(self, other: Number) -> "CertScalar":
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other: Number) -> "CertScalar":
        return self._coerce(other) * self.reciprocal()

    def __abs__(self) -> "CertScalar":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return CertScalar(mpfr(0), max((-self).hi, self.hi), None, self.prec)

    def sqrt(self) -> "CertScalar":
        if self.lo < 0:
            raise ValueError("square root of a possibly negative enclosure")
        if self.exact is not None:
            root = _rational_root(self.exact, 2)
            if root is not None:
                return CertScalar.of(root, self.prec)
        with _down(self.prec):
            lo = gmpy2.sqrt(self.lo)
        with _up(self.prec):
            hi = gmpy2.sqrt(self.hi)
        return CertScalar(lo, hi, None, self.prec)

    # serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "lo": _dyadic_decimal(to_fraction(self.lo)),
            "hi": _dyadic_decimal(to_fraction(self.hi)),
            "exact": None if self.exact is None else format_rational(self.exact),
        }

    @classmethod
    def from_json(cls, data: dict, prec: int | None = None) -> "CertScalar":
        bits = _resolve(prec)
        if data.get("exact") is not None:
            return cls.of(parse_rational(data["exact"]), bits)
        lo, hi = Fraction(data["lo"]), Fraction(data["hi"])
        bits = max(bits, _mantissa_bits(lo), _mantissa_bits(hi))
        return cls.between(lo, hi, bits)

    def __str__(self) -> str:
        if self.exact is not None:
            return format_rational(self.exact)
        return f"[{self.lo}, {self.hi}]"


def _mantissa_bits(q: Fraction) -> int:
    n = abs(q.numerator)
    if n == 0:
        return MIN_PRECISION
    while n % 2 == 0:
        n //= 2
    return max(MIN_PRECISION, n.bit_length())


def _rational_root(q: Fraction, k: int) -> Fraction | None:
    """The exact k-th root of a nonnegative rational, if it is rational."""
    if q < 0:
        return None
    num, ok_n = gmpy2.iroot(mpz(q.numerator), k)
    den, ok_d = gmpy2.iroot(mpz(q.denominator), k)
    if ok_n and ok_d:
        return Fraction(int(num), int(den))
    return None


def cmax(values: Iterable[CertScalar]) -> CertScalar:
    """Enclosure of the maximum; exact when an exact candidate provably dominates."""
    vals = list(values)
    if not vals:
        raise ValueError("max of no values")
    bits = max(v.prec for v in vals)
    top = max(vals, key=lambda v: v.lo_q)
    if top.exact is not None and all(v is top or v.hi_q <= top.exact for v in vals):
        return CertScalar.of(top.exact, bits)
    return CertScalar(max(v.lo for v in vals), max(v.hi for v in vals), None, bits)


def csum(values: Iterable[CertScalar], prec: int | None = None) -> CertScalar:
    total = CertScalar.of(0, prec)
    for v in values:
        total = total + v
    return total


def compare(a: CertScalar, b: CertScalar) -> int | None:
    """-1, 0 or 1 when the order is certified; None when the enclosures overlap."""
    if a.exact is not None and b.exact is not None:
        return (a.exact > b.exact) - (a.exact < b.exact)
    if a.hi_q < b.lo_q:
        return -1
    if a.lo_q > b.hi_q:
        return 1
    return None


def certified_compare(
    make_a: Callable[[int], CertScalar],
    make_b: Callable[[int], CertScalar],
    prec: int | None = None,
    max_prec: int = MAX_PRECISION,
) -> int:
    """Compare two lazily computed quantities, doubling precision until they separate."""
    bits = _resolve(prec)
    while True:
        verdict = compare(make_a(bits), make_b(bits))
        if verdict is not None:
            return verdict
        if bits >= max_prec:
            raise IndeterminateComparison(f"enclosures still overlap at {bits} bits")
        bits = min(2 * bits, max_prec)


def log2_exact(l: int) -> int | None:
    """log2(l) when l is a power of two."""
    if l >= 1 and l & (l - 1) == 0:
        return l.bit_length() - 1
    return None


def _exact_f_power(l: int, p: Fraction) -> Fraction | None:
    if l == 0:
        return Fraction(0)
    e = log2_exact(l + 1)
    if e is None:
        return None
    return _rational_root(Fraction(e) ** p.numerator, p.denominator)


def _f_power_enclosure(l: int, p: Fraction, prec: int) -> CertScalar:
    base = _exact_mpfr(l + 1)
    with _down(prec):
        lo = gmpy2.rootn(gmpy2.log2(base) ** p.numerator, p.denominator)
    with _up(prec):
        hi = gmpy2.rootn(gmpy2.log2(base) ** p.numerator, p.denominator)
    return CertScalar(lo, hi, None, prec)


def f_power(l: int, p: Fraction | int = 1, prec: int | None = None) -> CertScalar:
    """f(l)**p for l >= 0 with the convention f(0) = 0."""
    if l < 0:
        raise ValueError("f is evaluated at nonnegative integers")
    p = Fraction(p)
    if p <= 0:
        raise ValueError("exponent must be positive")
    return _f_power_cached(int(l), p, _resolve(prec))


@lru_cache(maxsize=8192)
def _f_power_cached(l: int, p: Fraction, bits: int) -> CertScalar:
    exact = _exact_f_power(l, p)
    if exact is not None:
        return CertScalar.of(exact, bits)
    return _f_power_enclosure(l, p, bits)


def f_eval(
    l: int,
    p: Fraction | int = 1,
    prec: int | None = None,
    max_width: Fraction | None = None,
) -> CertScalar:
    """Certified enclosure of log2(l + 1) ** p.

    Exact when l + 1 is a power of two and the power stays rational.  With
    ``max_width`` the precision is doubled until the enclosure is that narrow.
    """
    if l < 1:
        raise ValueError("f_eval needs l >= 1")
    bits = _resolve(prec)
    while True:
        value = f_power(l, p, bits)
        if max_width is None or value.width() <= Fraction(max_width):
            return value
        if bits >= MAX_PRECISION:
            raise PrecisionExhausted(f"width {max_width} not reached at {bits} bits")
        bits = min(2 * bits, MAX_PRECISION)


def sqrt_f_eval(k: int, prec: int | None = None, max_width: Fraction | None = None) -> CertScalar:
    return f_eval(k, Fraction(1, 2), prec, max_width)


def f_real(t: CertScalar) -> CertScalar:
    """log2(1 + t) for a nonnegative real enclosure t."""
    if t.lo < 0:
        raise ValueError("f is evaluated at nonnegative arguments")
    with _down(t.prec):
        lo = gmpy2.log2(gmpy2.add(t.lo, 1))
    with _up(t.prec):
        hi = gmpy2.log2(gmpy2.add(t.hi, 1))
    return CertScalar(lo, hi, None, t.prec)


def inv_f(l: int, p: Fraction | int = 1, prec: int | None = None) -> CertScalar:
    return f_power(l, p, prec).reciprocal()


# symbolic products of powers of f ------------------------------------------


def _perfect_power(m: int) -> tuple[int, int]:
    """Write m = r**a with a maximal."""
    for a in range(max(1, m.bit_length()), 1, -1):
        root, exact = gmpy2.iroot(mpz(m), a)
        if exact:
            return int(root), a
    return m, 1


def _factor_small(a: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= a:
        while a % d == 0:
            out[d] = out.get(d, 0) + 1
            a //= d
        d += 1
    if a > 1:
        out[a] = out.get(a, 0) + 1
    return out


def _floor_fraction(e: Fraction) -> int:
    return e.numerator // e.denominator


@dataclass(frozen=True)
class LogMonomial:
    """``scale * prod(base ** e) * prod(log2(r) ** e)`` in canonical form.

    ``radicals`` holds primes raised to exponents in (0, 1); ``logs`` holds
    log2(r) for r > 2 that are not perfect powers.  Equal canonical forms are
    equal reals.  Distinct forms are separated numerically, with precision
    escalation, so no algebraic independence is ever assumed.
    """

    scale: Fraction
    radicals: tuple[tuple[int, Fraction], ...] = ()
    logs: tuple[tuple[int, Fraction], ...] = ()

    @classmethod
    def rational(cls, q) -> "LogMonomial":
        return cls(Fraction(q))

    @classmethod
    def f_power(cls, l: int, p) -> "LogMonomial":
        """f(l) ** p for l >= 1 and any nonzero rational p."""
        p = Fraction(p)
        r, a = _perfect_power(l + 1)
        scale = Fraction(1)
        radicals: dict[int, Fraction] = {}
        for prime, mult in _factor_small(a).items():
            radicals[prime] = radicals.get(prime, Fraction(0)) + mult * p
        logs = {r: p} if r != 2 else {}
        return cls._normal(scale, radicals, logs)

    @classmethod
    def _normal(cls, scale: Fraction, radicals: dict, logs: dict) -> "LogMonomial":
        rad = []
        for prime in sorted(radicals):
            e = radicals[prime]
            whole = _floor_fraction(e)
            scale *= Fraction(prime) ** whole
            rest = e - whole
            if rest:
                rad.append((prime, rest))
        lg = tuple((r, e) for r, e in sorted(logs.items()) if e != 0)
        if scale == 0:
            return cls(Fraction(0))
        return cls(scale, tuple(rad), lg)

    def __mul__(self, other) -> "LogMonomial":
        if not isinstance(other, LogMonomial):
            other = LogMonomial.rational(other)
        radicals = dict(self.radicals)
        for prime, e in other.radicals:
            radicals[prime] = radicals.get(prime, Fraction(0)) + e
        logs = dict(self.logs)
        for r, e in other.logs:
            logs[r] = logs.get(r, Fraction(0)) + e
        return LogMonomial._normal(self.scale * other.scale, radicals, logs)

    __rmul__ = __mul__

    def __neg__(self) -> "LogMonomial":
        return LogMonomial(-self.scale, self.radicals, self.logs)

    def __abs__(self) -> "LogMonomial":
        return LogMonomial(abs(self.scale), self.radicals, self.logs)

    @property
    def is_rational(self) -> bool:
        return not self.radicals and not self.logs

    def enclosure(self, prec: int | None = None) -> CertScalar:
        bits = _resolve(prec)
        value = CertScalar.of(self.scale, bits)
        for prime, e in self.radicals:
            value = value * _pow_enclosure(CertScalar.of(prime, bits), e)
        for r, e in self.logs:
            # log2(r) = f(r - 1)
            if e > 0:
                value = value * f_power(r - 1, e, bits)
            else:
                value = value / f_power(r - 1, -e, bits)
        return value


def _pow_enclosure(base: CertScalar, e: Fraction) -> CertScalar:
    """base ** e for an exact base >= 1 and 0 < e < 1."""
    bits = base.prec
    root = _rational_root(base.exact ** e.numerator, e.denominator)
    if root is not None:
        return CertScalar.of(root, bits)
    with _down(bits):
        lo = gmpy2.rootn(mpfr(base.exact.numerator) ** e.numerator, e.denominator)
    with _up(bits):
        hi = gmpy2.rootn(mpfr(base.exact.numerator) ** e.numerator, e.denominator)
    return CertScalar(lo, hi, None, bits)


Symbolic = Union[LogMonomial, tuple]


def symbolic_enclosure(value, prec: int | None = None) -> CertScalar:
    """Enclosure of a Fraction, CertScalar, LogMonomial or tuple (sum) of those."""
    if isinstance(value, CertScalar):
        return value
    if isinstance(value, LogMonomial):
        return value.enclosure(prec)
    if isinstance(value, tuple):
        return csum((symbolic_enclosure(v, prec) for v in value), prec)
    return CertScalar.of(value, prec)


def _canonical_symbolic(value):
    if value == ():
        return LogMonomial.rational(0)
    if isinstance(value, tuple) and len(value) == 1:
        value = value[0]
    if isinstance(value, (int, Fraction)):
        return LogMonomial.rational(value)
    return value


def symbolic_compare(a, b, prec: int | None = None, max_prec: int = MAX_PRECISION) -> int:
    """Certified three-way comparison; identical canonical forms compare equal."""
    a, b = _canonical_symbolic(a), _canonical_symbolic(b)
    if isinstance(a, LogMonomial) and isinstance(b, LogMonomial) and a == b:
        return 0
    if isinstance(a, CertScalar) or isinstance(b, CertScalar):
        verdict = compare(symbolic_enclosure(a, prec), symbolic_enclosure(b, prec))
        if verdict is None:
            raise IndeterminateComparison("fixed enclosures overlap")
        return verdict
    return certified_compare(
        lambda bits: symbolic_enclosure(a, bits),
        lambda bits: symbolic_enclosure(b, bits),
        prec,
        max_prec,
    )


def monomial_sum(terms: Iterable) -> tuple[LogMonomial, ...]:
    """Collect like terms; the result is a canonical sum of distinct monomials."""
    groups: dict[tuple, Fraction] = {}
    for t in terms:
        t = t if isinstance(t, LogMonomial) else LogMonomial.rational(t)
        key = (t.radicals, t.logs)
        groups[key] = groups.get(key, Fraction(0)) + t.scale
    return tuple(
        LogMonomial(scale, rad, lg) for (rad, lg), scale in sorted(groups.items()) if scale != 0
    )
