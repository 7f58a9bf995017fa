"""Admissible sequences, yardstick vectors, and audits of the growth lemmas.

``y(m_1, ..., m_k)`` is built recursively: the coordinates of the previous
yardstick are spread out with ``m_k / (m_1 + ... + m_{k-1})`` empty slots after
each one, and the empty slots are filled with ``f(m_k) / m_k``.  So
``y(2, 4) = (a, b, b, a, b, b)`` with ``a = f(2)/2`` and ``b = f(4)/4``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Sequence

from .arith import (
    CertScalar,
    LogMonomial,
    certified_compare,
    f_power,
    format_rational,
    symbolic_enclosure,
)
from .epsilons import EpsSequence
from .snorm import norm_S, proves_at_least, proves_at_most
from .vectors import AnyVector, BlockSequence, FiniteVector, IndexInterval, MonomialVector

MAX_SUBSET_INDEX = 22


class NotAdmissible(ValueError):
    pass


# admissible sequences ----------------------------------------------------------


def subset_sum_product(previous: Sequence[int]) -> int:
    """Product of sum(A) over all nonempty A within ``previous``; 1 when empty."""
    if len(previous) > MAX_SUBSET_INDEX:
        raise ValueError(f"subset product over {len(previous)} terms is out of range")
    total = 1
    for size in range(1, len(previous) + 1):
        for combo in combinations(previous, size):
            total *= sum(combo)
    return total


@dataclass(frozen=True)
class AdmissibilityReport:
    ms: tuple[int, ...]
    ok: bool
    witness: tuple[int, ...]
    failure_index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {
            "ms": list(self.ms),
            "admissible": self.ok,
            "witness": [str(w) for w in self.witness],
            "failure_index": self.failure_index,
            "reason": self.reason,
        }


def is_admissible(ms: Sequence[int]) -> AdmissibilityReport:
    """Every m_i is even and a multiple of the nonempty-subset-sum product of its predecessors.

    The empty sequence is vacuously admissible.
    """
    ms = tuple(int(m) for m in ms)
    witness = []
    for i, m in enumerate(ms, start=1):
        if m <= 0:
            return AdmissibilityReport(ms, False, tuple(witness), i, f"m_{i} = {m} is not positive")
        if m % 2:
            return AdmissibilityReport(ms, False, tuple(witness), i, f"m_{i} = {m} is odd")
        needed = subset_sum_product(ms[: i - 1])
        witness.append(needed)
        if m % needed:
            return AdmissibilityReport(
                ms, False, tuple(witness), i, f"m_{i} = {m} is not a multiple of {needed}"
            )
    return AdmissibilityReport(ms, True, tuple(witness))


@dataclass(frozen=True)
class AdmissibleSeq:
    ms: tuple[int, ...]
    witness: tuple[int, ...]

    @classmethod
    def of(cls, ms: Sequence[int]) -> "AdmissibleSeq":
        report = is_admissible(ms)
        if not report:
            raise NotAdmissible(report.reason)
        return cls(report.ms, report.witness)

    @property
    def total(self) -> int:
        return sum(self.ms)


# yardsticks ----------------------------------------------------------------------


def level_coefficient(m: int) -> LogMonomial:
    """f(m) / m as an exact monomial."""
    return LogMonomial.f_power(m, 1) * Fraction(1, m)


@dataclass(frozen=True)
class YardstickVector:
    spec: AdmissibleSeq
    levels: tuple[int, ...]
    vector: MonomialVector = field(compare=False)

    @property
    def coefficients(self) -> list[LogMonomial]:
        return self.vector.coefficients()

    def piece(self, level: int) -> MonomialVector:
        """The coordinates carrying ``f(m_level)/m_level``."""
        return MonomialVector(tuple((p, c) for (p, c), lv in zip(self.vector.entries, self.levels) if lv == level))

    def pieces(self) -> list[MonomialVector]:
        return [self.piece(i) for i in range(1, len(self.spec.ms) + 1)]

    def piece_functional(self, level: int):
        """(1/f(m)) times the sum of e*_j over one level: norms that piece to 1."""
        from .functionals import Average, Leaf

        positions = self.piece(level).support()
        return Average(len(positions), tuple(Leaf(p) for p in positions))


def yardstick_levels(ms: Sequence[int]) -> list[int]:
    """Level index (1-based) of each coordinate of y(ms)."""
    if not ms:
        return []
    levels = [1] * ms[0]
    for k in range(1, len(ms)):
        gap, rem = divmod(ms[k], len(levels))
        if rem:
            raise NotAdmissible(f"m_{k + 1} = {ms[k]} is not a multiple of {len(levels)}")
        spread = []
        for level in levels:
            spread.append(level)
            spread.extend([k + 1] * gap)
        levels = spread
    return levels


def build_yardstick(ms: Sequence[int] | AdmissibleSeq, require_admissible: bool = True) -> YardstickVector:
    """The yardstick y(ms).

    With ``require_admissible=False`` only the divisibility needed for the
    spreading step is enforced (used for small experimental parameters).
    """
    if isinstance(ms, AdmissibleSeq):
        spec = ms
    elif require_admissible:
        spec = AdmissibleSeq.of(ms)
    else:
        spec = AdmissibleSeq(tuple(int(m) for m in ms), ())
    levels = yardstick_levels(spec.ms)
    coeff = [level_coefficient(m) for m in spec.ms]
    vector = MonomialVector(tuple((pos, coeff[lv - 1]) for pos, lv in enumerate(levels, start=1)))
    return YardstickVector(spec, tuple(levels), vector)


def transplant(ms: Sequence[int] | AdmissibleSeq, xs: BlockSequence) -> MonomialVector:
    """sum_i a_i x_i where y(ms) = sum_i a_i e_i."""
    y = build_yardstick(ms)
    if len(xs) < len(y.levels):
        raise ValueError(f"transplant needs {len(y.levels)} blocks, got {len(xs)}")
    total = MonomialVector()
    for (pos, a), block in zip(y.vector.entries, xs):
        total = total + MonomialVector.lift(block).scale(a)
    return total


# l1 averages ------------------------------------------------------------------


@dataclass(frozen=True)
class AverageVerdict:
    ok: bool
    is_average: bool
    parts_in_ball: tuple[bool, ...]
    lower_bound: bool
    sign_patterns: tuple[tuple[tuple[int, ...], bool], ...] = ()

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "is_average": self.is_average,
            "parts_in_ball": list(self.parts_in_ball),
            "lower_bound": self.lower_bound,
            "sign_patterns": [[list(s), v] for s, v in self.sign_patterns],
        }


def check_l1_plus_average(
    x: AnyVector,
    parts: BlockSequence | Sequence[AnyVector],
    n: int,
    c,
    variant: str = "plus",
    prec: int | None = None,
) -> AverageVerdict:
    """Check that x = (1/n) sum(parts) with parts in the unit ball and ||x|| >= c.

    ``variant="l1"`` also checks ||sum eps_i x_i|| >= c * n for every sign pattern.
    """
    if not isinstance(parts, BlockSequence):
        parts = BlockSequence.of(parts)
    if len(parts) != n:
        raise ValueError(f"expected {n} parts, got {len(parts)}")
    if variant not in ("plus", "l1"):
        raise ValueError("variant is 'plus' or 'l1'")
    total = MonomialVector()
    for part in parts:
        total = total + MonomialVector.lift(part)
    is_average = total.scale(Fraction(1, n)) == MonomialVector.lift(x)
    in_ball = tuple(proves_at_most(p, 1, prec) for p in parts)
    lower = proves_at_least(x, c, prec)
    patterns = []
    if variant == "l1":
        target = c * n if not isinstance(c, (int, Fraction)) else Fraction(c) * n
        for signs in product((1, -1), repeat=n):
            combo = MonomialVector()
            for s, part in zip(signs, parts):
                combo = combo + MonomialVector.lift(part).scale(s)
            patterns.append((signs, proves_at_least(combo, target, prec)))
    ok = is_average and all(in_ball) and lower and all(v for _, v in patterns)
    return AverageVerdict(ok, is_average, in_ball, lower, tuple(patterns))


# growth-lemma audits ---------------------------------------------------------------


def _least_l_with_f_at_least(target: Fraction, prec: int | None = None) -> int:
    """min{l : f(l) >= target} for a rational target."""
    def holds(l: int) -> bool:
        return certified_compare(lambda b: f_power(l, 1, b), lambda b: CertScalar.of(target, b), prec) >= 0

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


def l0() -> int:
    """min{l : f(l) >= 6}."""
    return _least_l_with_f_at_least(Fraction(6))


def growth_constant(prec: int | None = None) -> CertScalar:
    """f(l0) f(l0 - 1) / (f(l0) - f(l0 - 1))."""
    l = l0()
    a, b = f_power(l, 1, prec), f_power(l - 1, 1, prec)
    return a * b / (a - b)


def _verdict(name: str, holds, **detail) -> dict:
    return {"name": name, "holds": holds, **detail}


def _certified_ge(a: CertScalar, b: CertScalar) -> bool | None:
    if a.certainly_ge(b):
        return True
    if a.certainly_lt(b):
        return False
    return None


def _min_m_for_f(bound: CertScalar) -> dict:
    """Least m with f(m) >= bound, i.e. m = ceil(2^bound) - 1, as far as it can be pinned."""
    if bound.exact is not None and bound.exact.denominator == 1:
        return {"min_m": f"2^{bound.exact} - 1", "min_m_log2": str(bound.exact)}
    return {"min_m": None, "min_m_log2": bound.to_json()}


def _eps_range(eps: Fraction, prec: int | None) -> bool | None:
    if eps <= 0:
        return False
    cap = (f_power(2, 1, prec) - 1) / f_power(2, 1, prec)
    if cap.certainly_gt(eps):
        return True
    return False if cap.certainly_le(eps) else None


def _ratio_ok(m: int, k: int, eps: Fraction, prec: int | None) -> bool:
    """f(m)/f(m/k) <= 1 + eps/6, decided with precision escalation."""
    return (
        certified_compare(
            lambda b: f_power(m, 1, b) / f_power(m // k, 1, b),
            lambda b: CertScalar.of(1 + eps / 6, b),
            prec,
        )
        <= 0
    )


def _least_multiple_for_ratio(k: int, eps: Fraction, prec: int | None) -> int:
    if k == 1:
        return 1
    hi = 1
    while not _ratio_ok(k * hi, k, eps, prec):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _ratio_ok(k * mid, k, eps, prec):
            hi = mid
        else:
            lo = mid
    return k * hi


def audit_lemma_1_12(k: int, m: int, c=1, C=1, eps=Fraction(1, 2), prec: int | None = None) -> dict:
    """Certified check of the hypotheses of the one-step growth lemma.

    Reports each hypothesis, the smallest m meeting it, and whether the
    parameters are feasible at desk scale.  Report only: no pass/fail is
    claimed for the lemma's conclusion.
    """
    c, C, eps = Fraction(c), Fraction(C), Fraction(eps)
    fm = f_power(m, 1, prec)
    k0 = growth_constant(prec)
    eps_term = CertScalar.of(C * 50 / eps**2, prec)
    full = CertScalar.of(C, prec) * (k0 if k0.certainly_ge(50 / eps**2) else CertScalar.of(50 / eps**2, prec))
    if not k0.certainly_ge(50 / eps**2) and not k0.certainly_lt(50 / eps**2):
        full = CertScalar.between(eps_term.lo_q, (CertScalar.of(C, prec) * k0).hi_q, prec)
    verdicts = [
        _verdict("k < m", k < m),
        _verdict("c >= 1", c >= 1),
        _verdict("eps in (0, (f(2)-1)/f(2))", _eps_range(eps, prec)),
        _verdict("1.12.1 m divisible by k", m % k == 0),
        _verdict(
            "1.12.2 f(m) >= C*50/eps^2",
            _certified_ge(fm, eps_term),
            required_f=eps_term.to_json(),
            **_min_m_for_f(eps_term),
        ),
        _verdict(
            "1.12.2 f(m) >= C*max(50/eps^2, f(l0)f(l0-1)/(f(l0)-f(l0-1)))",
            _certified_ge(fm, full),
            required_f=full.to_json(),
            **_min_m_for_f(full),
        ),
    ]
    if m % k == 0:
        verdicts.append(
            _verdict(
                "1.12.3 f(m)/f(m/k) <= 1 + eps/6",
                _ratio_ok(m, k, eps, prec),
                min_m=str(_least_multiple_for_ratio(k, eps, prec)),
            )
        )
    else:
        verdicts.append(_verdict("1.12.3 f(m)/f(m/k) <= 1 + eps/6", False, reason="m/k is not an integer"))
    feasible = all(v["holds"] is True for v in verdicts)
    return {
        "lemma": "1.12",
        "inputs": {"k": k, "m": m, "c": format_rational(c), "C": format_rational(C), "eps": format_rational(eps)},
        "l0": l0(),
        "verdicts": verdicts,
        "enclosures": [fm.to_json(), k0.to_json()],
        "feasible": feasible,
        "report_only": True,
    }


def product_tail(eps: EpsSequence, i: int, tol=Fraction(1, 10**12), prec: int | None = None) -> CertScalar:
    """Certified enclosure of C_i = prod_{j >= i} (1 + eps_j).

    The partial product runs until the tail sum T drops below ``tol``; the
    remaining factor lies in [1, exp(T)] and exp(T) <= 1/(1 - T).
    """
    tol = Fraction(tol)
    partial = Fraction(1)
    j = i
    while True:
        tail = eps.tail_sum(j)
        if tail == 0:
            return CertScalar.of(partial, prec)
        if tail <= tol and tail < 1:
            return CertScalar.between(partial, partial / (1 - tail), prec)
        partial *= 1 + eps(j)
        j += 1


def audit_lemma_1_13(
    eps: EpsSequence,
    ms: Sequence[int],
    prec: int | None = None,
    conclusion_limit: int = 64,
    first_index: int = 0,
) -> dict:
    """Check the growth hypotheses index by index; report the first failure.

    ``ms[0]`` carries index ``first_index`` (0 for (m_0, m_1, ...)).  Where a
    yardstick is short enough its norm is compared with C_i as a report-only
    conclusion check.
    """
    ms = tuple(int(m) for m in ms)
    k0 = growth_constant(prec)
    cap = (f_power(2, 1, prec) - 1) / f_power(2, 1, prec)
    eps_ok = eps.sup() > 0 and CertScalar.of(eps.sup(), prec).certainly_lt(cap) and all(
        eps(j) > 0 for j in range(len(eps.head) + 1)
    )
    admissible = is_admissible(ms)
    rows = []
    first_failure = None
    for pos, m in enumerate(ms):
        i = pos + first_index
        if i < 1:
            continue
        Ci = product_tail(eps, i, prec=prec)
        e = eps(i)
        base = CertScalar.of(50 / e**2, prec) if e > 0 else None
        bound = Ci * (k0 if base is None or k0.certainly_ge(base) else base)
        fm = f_power(m, 1, prec)
        first = _certified_ge(fm, bound)
        second = None
        if pos > 0:
            second = ms[pos] % ms[pos - 1] == 0 and _ratio_ok(ms[pos], ms[pos - 1], e, prec)
        row = {
            "i": i,
            "C_i": Ci.to_json(),
            "1.13.1": first,
            "1.13.1_required_f": bound.to_json(),
            "1.13.2": second,
        }
        if sum(ms[pos:]) <= conclusion_limit and is_admissible(ms[pos:]):
            y = build_yardstick(ms[pos:])
            value = norm_S(y.vector, prec).value
            row["conclusion_norm"] = value.to_json()
            row["conclusion_norm_le_C_i"] = value.certainly_le(Ci)
        rows.append(row)
        if first_failure is None and (first is not True or second is False):
            first_failure = i
    return {
        "lemma": "1.13",
        "inputs": {"eps": eps.to_json(), "ms": list(ms), "first_index": first_index},
        "verdicts": [
            _verdict("eps_i in (0, (f(2)-1)/f(2))", eps_ok),
            _verdict("admissible", bool(admissible), reason=admissible.reason),
            *rows,
        ],
        "enclosures": [k0.to_json()],
        "first_failure": first_failure,
        "report_only": True,
    }


# James blocking ------------------------------------------------------------------


@dataclass(frozen=True)
class JamesResult:
    found: bool
    m: int | None
    blocks: tuple[IndexInterval, ...]
    ratio: CertScalar | None
    best_ratio: CertScalar | None
    target: CertScalar

    def to_json(self) -> dict:
        return {
            "found": self.found,
            "m": self.m,
            "blocks": [[b.lo, b.hi] for b in self.blocks],
            "ratio": self.ratio.to_json() if self.ratio else None,
            "best_ratio": self.best_ratio.to_json() if self.best_ratio else None,
            "target": self.target.to_json(),
        }


def _root(c: Fraction, n: int, prec: int | None) -> CertScalar:
    from .arith import _rational_root

    exact = _rational_root(c, n)
    if exact is not None:
        return CertScalar.of(exact, prec)
    value = CertScalar.of(c, prec)
    import gmpy2

    from .arith import _down, _up

    with _down(value.prec):
        lo = gmpy2.rootn(value.lo, n)
    with _up(value.prec):
        hi = gmpy2.rootn(value.hi, n)
    return CertScalar(lo, hi, None, value.prec)


def james_blocking_search(
    norm_oracle: Callable[[FiniteVector], CertScalar],
    n: int,
    eps,
    max_m: int,
    c=1,
    prec: int | None = None,
) -> JamesResult:
    """Find the least m <= max_m, divisible by n, whose n equal consecutive blocks
    normalize to a c^(1/n)(1 - eps)-lower-l1^n sequence on every sign pattern.

    The oracle must compute a 1-subsymmetric norm, so all blocks share one norm.
    """
    eps, c = Fraction(eps), Fraction(c)
    target = _root(c, n, prec) * (1 - eps)
    need = target * n
    best = None
    for m in range(n, max_m + 1, n):
        size = m // n
        blocks = tuple(IndexInterval(i * size + 1, (i + 1) * size) for i in range(n))
        block_norm = norm_oracle(FiniteVector.ones(size))
        worst = None
        for signs in product((1, -1), repeat=n):
            vec = FiniteVector.from_map({p: s for s, b in zip(signs, blocks) for p in b})
            ratio = norm_oracle(vec) / block_norm
            if worst is None or ratio.lo_q < worst.lo_q:
                worst = ratio
        if best is None or worst.lo_q > best.lo_q:
            best = worst
        if worst.certainly_ge(need):
            return JamesResult(True, m, blocks, worst / n, best / n, target)
    return JamesResult(False, None, (), None, best / n if best else None, target)


def coefficient_enclosures(y: YardstickVector, prec: int | None = None) -> list[CertScalar]:
    return [symbolic_enclosure(c, prec) for c in y.coefficients]
