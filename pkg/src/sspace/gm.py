"""The Gowers-Maurey type space: parameters, the certificate grammar, the
sigma coder, and the norm in the strict and toy regimes.

Functionals are the trees of :mod:`sspace.functionals`.  A tree is valid when
it can be derived by the three rules (convex combination, averages of
successive functionals, and special functionals whose block sizes are chained
by the coder), with interval restrictions allowed at every level.

Strict parameters keep the lacunary set J symbolic: each j_i is known only
through a certified lower bound on log2(j_i + 1).  Toy parameters use a short
concrete J so special functionals can actually be built and evaluated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .arith import (
    CertScalar,
    IndeterminateComparison,
    LogMonomial,
    f_power,
    f_real,
    format_rational,
    symbolic_compare,
    symbolic_enclosure,
)
from .epsilons import GEOMETRIC, EpsSequence
from .functionals import (
    Average,
    Combo,
    Functional,
    Leaf,
    Restrict,
    Special,
    evaluate,
    evaluate_symbolic,
    from_json as functional_from_json,
    structural_support,
    symbolic_coefficients,
    to_json as functional_to_json,
)
from .snorm import PartitionTable, norm_S
from .vectors import AnyVector, BlockSequence, FiniteVector, IndexInterval, MonomialVector
from .yardstick import audit_lemma_1_13, growth_constant, is_admissible, product_tail

STRICT = "strict"
TOY = "toy"
DEFAULT_EPS = "2^-(n+2)^2"
UPPER_DP_LIMIT = 64

__all__ = [
    "GMParams",
    "SigmaCoder",
    "JExhausted",
    "validate_params",
    "sigma_code",
    "validate_certificate",
    "evaluate",
    "gm_norm",
    "activation_threshold",
    "check_ris_arithmetic",
]


class JExhausted(LookupError):
    pass


# the lacunary set ----------------------------------------------------------------


@dataclass(frozen=True)
class StrictBound:
    """j_index is known only through ``log2(j_index + 1) >= log2_lower``."""

    index: int
    log2_lower: CertScalar

    def to_json(self) -> dict:
        return {"index": self.index, "log2_lower": self.log2_lower.to_json(), "symbolic": True}

    def __str__(self) -> str:
        return f"j_{self.index} >= 2^{float(self.log2_lower.lo_q):.6g} - 1"


def _canonical_sequence(seq: Sequence[Functional]) -> str:
    return json.dumps([functional_to_json(t) for t in seq], sort_keys=True, separators=(",", ":"))


@dataclass
class SigmaCoder:
    """An injective map from finite sequences of functionals to even J indices.

    Strict mode is a pure function: the canonical serialization is read as a
    big integer t and sent to index 2t.  Toy mode keeps a registry and hands
    out unused even indices in request order, so a fixed call order gives a
    fixed code table.
    """

    mode: str = TOY
    table: dict[str, int] = field(default_factory=dict)

    def key(self, seq: Sequence[Functional]) -> str:
        return _canonical_sequence(seq)

    def lookup(self, seq: Sequence[Functional]) -> int | None:
        key = self.key(seq)
        if self.mode == STRICT:
            return 2 * int.from_bytes(b"\x01" + key.encode(), "big")
        return self.table.get(key)

    def _used(self) -> set[int]:
        return set(self.table.values())

    def assign(
        self,
        seq: Sequence[Functional],
        J: Sequence[int],
        min_value: int = 0,
        multiple_of: int = 1,
    ) -> int:
        """Code a sequence that has no code yet, under value constraints (toy mode)."""
        if self.mode == STRICT:
            raise ValueError("strict codes are fixed; nothing to assign")
        key = self.key(seq)
        if key in self.table:
            raise ValueError("sequence already has a code")
        used = self._used()
        start = max(used) + 2 if used else 2
        for index in range(start, len(J) + 1, 2):
            value = J[index - 1]
            if value >= min_value and value % multiple_of == 0:
                self.table[key] = index
                return index
        raise JExhausted(
            f"no even index >= {start} with j >= {min_value} divisible by {multiple_of}; J has {len(J)} terms"
        )

    def code(self, seq: Sequence[Functional], J: Sequence[int] | None = None) -> int:
        found = self.lookup(seq)
        if found is not None:
            return found
        if J is None:
            raise JExhausted("no J supplied to code a new sequence")
        return self.assign(seq, J)

    def to_json(self) -> dict:
        return {"mode": self.mode, "table": sorted(([k, v] for k, v in self.table.items()), key=lambda kv: kv[1])}

    @classmethod
    def from_json(cls, data: dict | None, mode: str = TOY) -> "SigmaCoder":
        if not data:
            return cls(mode)
        return cls(data.get("mode", mode), {k: int(v) for k, v in data.get("table", [])})


@dataclass
class GMParams:
    eps: EpsSequence
    mode: str = TOY
    J: tuple[int, ...] = ()
    sigma: SigmaCoder = field(default_factory=SigmaCoder)

    def __post_init__(self) -> None:
        if self.mode not in (STRICT, TOY):
            raise ValueError(f"mode is {STRICT!r} or {TOY!r}")
        if self.mode == TOY:
            if len(self.J) < 2:
                raise ValueError("toy J needs at least j_1 and j_2")
            if any(b <= a for a, b in zip(self.J, self.J[1:])) or self.J[0] < 1:
                raise ValueError("J must be a strictly increasing sequence of positive integers")
        self.sigma.mode = self.mode

    @classmethod
    def toy(cls, J: Iterable[int], eps: str | EpsSequence = DEFAULT_EPS) -> "GMParams":
        eps = eps if isinstance(eps, EpsSequence) else EpsSequence.parse(eps)
        return cls(eps, TOY, tuple(int(j) for j in J), SigmaCoder(TOY))

    @classmethod
    def strict(cls, eps: str | EpsSequence = DEFAULT_EPS) -> "GMParams":
        eps = eps if isinstance(eps, EpsSequence) else EpsSequence.parse(eps)
        return cls(eps, STRICT, (), SigmaCoder(STRICT))

    def j(self, index: int) -> int:
        if self.mode == STRICT:
            raise ValueError(f"strict j_{index} is symbolic; use j_bound")
        if not 1 <= index <= len(self.J):
            raise JExhausted(f"J has {len(self.J)} terms, j_{index} requested")
        return self.J[index - 1]

    def j_bound(self, index: int, prec: int | None = None) -> StrictBound:
        """A certified lower bound on log2(j_index + 1)."""
        if self.mode == TOY:
            return StrictBound(index, f_power(self.j(index), 1, prec))
        e = self.eps(index)
        need = CertScalar.of(50 / e**2, prec)
        k0 = growth_constant(prec)
        factor = k0 if k0.lo_q >= need.hi_q else need
        lower = product_tail(self.eps, index, prec=prec) * factor
        return StrictBound(index, lower)

    def to_json(self) -> dict:
        out = {"mode": self.mode, "eps": self.eps.to_json(), "sigma": self.sigma.to_json()}
        if self.mode == TOY:
            out["J"] = list(self.J)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GMParams":
        mode = data.get("mode", TOY)
        eps = EpsSequence.from_json(data.get("eps", DEFAULT_EPS))
        J = _parse_J(data.get("J", ())) if mode == TOY else ()
        return cls(eps, mode, J, SigmaCoder.from_json(data.get("sigma"), mode))


def _parse_J(spec) -> tuple[int, ...]:
    if isinstance(spec, dict):
        count = int(spec["count"])
        if "ratio" in spec:
            a, r = int(spec["start"]), int(spec["ratio"])
            return tuple(a * r**i for i in range(count))
        start, step = int(spec.get("start", spec.get("step", 2))), int(spec.get("step", 2))
        return tuple(start + step * i for i in range(count))
    return tuple(int(j) for j in spec)


def even_toy_J(count: int) -> tuple[int, ...]:
    """J = (2, 4, 6, ..., 2 * count)."""
    return tuple(range(2, 2 * count + 1, 2))


# parameter validation ------------------------------------------------------------


def _verdict(name: str, holds, **detail) -> dict:
    return {"name": name, "holds": holds, **detail}


def _standard_conditions(eps: EpsSequence, prec: int | None, search: int = 100_000) -> list[dict]:
    half_gap = (f_power(2, 1, prec) - 1) / 2
    e0 = CertScalar.of(eps(0), prec)
    first = True if e0.certainly_lt(half_gap) else (False if e0.certainly_ge(half_gap) else None)
    out = [_verdict("2.1 eps_0 < (f(2)-1)/2", first, eps_0=format_rational(eps(0)))]

    # eps_n <= 2^-n: explicit up to the point where the term ratio is <= 1/2
    tail_start = len(eps.head)
    ratio_ok = eps.kind != GEOMETRIC or eps.ratio <= Fraction(1, 2)
    limit = tail_start if ratio_ok else search
    bad = next((n for n in range(limit + 1) if eps(n) > Fraction(1, 2**n)), None)
    if bad is None and not ratio_ok:
        out.append(_verdict("2.1 eps_n <= 2^-n", None, reason=f"no violation up to n = {search}"))
    else:
        out.append(_verdict("2.1 eps_n <= 2^-n", bad is None, first_violation=bad))

    # sum_{i>n} i^2 eps_i <= eps_n / 10
    name = "2.1 sum_{i>n} i^2 eps_i <= eps_n/10"
    if eps.kind == GEOMETRIC:
        # exact tails; the ratio to eps_n grows without bound on the geometric part
        for n in range(search):
            tail, bound = eps.weighted_tail(n + 1), eps(n) / 10
            if tail > bound:
                out.append(_verdict(name, False, first_violation=n, tail=format_rational(tail), bound=format_rational(bound)))
                break
        else:
            out.append(_verdict(name, None, reason=f"no violation up to n = {search}"))
        return out
    start = max(tail_start, 1)
    for n in range(start):
        tail, bound = eps.weighted_tail(n + 1), eps(n) / 10
        if tail > bound:
            lower = sum((i * i * eps(i) for i in range(n + 1, n + 64)), Fraction(0))
            holds = False if lower > bound else None
            out.append(_verdict(name, holds, first_violation=n, tail_upper=format_rational(tail), bound=format_rational(bound)))
            return out
    # for n >= start the bound (n+1)^2 b^-(2(n+s)+1) / (1 - rho_{n+1}) on the ratio is decreasing
    n = start
    b, s = eps.base, eps.shift
    rho = Fraction(n + 2, n + 1) ** 2 / Fraction(b) ** (2 * (n + 1 + s) + 1)
    ratio_bound = Fraction((n + 1) ** 2) / Fraction(b) ** (2 * (n + s) + 1) / (1 - rho)
    out.append(_verdict(name, ratio_bound <= Fraction(1, 10), checked_explicitly_below=start, ratio_bound=format_rational(ratio_bound)))
    return out


def validate_params(p: GMParams, prec: int | None = None) -> dict:
    """Per-condition verdicts for the parameter pack.

    ``holds`` is True, False, None (undecided or not finitely checkable) or
    "assumed" (strict-mode growth conditions, recorded with their witnesses).
    """
    verdicts = _standard_conditions(p.eps, prec)
    verdicts.append(_verdict("2.2-2.4 Q closure", True, reason="Q is the closure of the rational unit cube under restriction and block averages"))
    if p.mode == STRICT:
        witness = [p.j_bound(i, prec).to_json() for i in (1, 2, 3)]
        verdicts += [
            _verdict("2.5 sum_{i>n} 2/j_i < 1/f(j_n)", "assumed"),
            _verdict("2.6 J admissible with 1.13.1-1.13.2", "assumed", lower_bounds=witness),
            _verdict("2.9 j_s <= N(j_s, eps_s) <= eps_{s+1} f(j_{s+1})/2", "assumed"),
            _verdict(
                "2.10 eps_N f(sigma(...)) >= N",
                "assumed",
                reason="codes land at index 2t with t above the largest position N; "
                "f(j_2t) >= 50/eps_2t^2 >= 50/eps_N^2 and eps_N <= 2^-N give eps_N f >= 50 * 2^N >= N",
            ),
        ]
    else:
        verdicts += _toy_J_conditions(p, prec)
    first = next((v["name"] for v in verdicts if v["holds"] is False), None)
    return {"mode": p.mode, "verdicts": verdicts, "first_violation": first}


def _toy_J_conditions(p: GMParams, prec: int | None) -> list[dict]:
    J = p.J
    out = []
    terms = []
    for n in range(1, len(J)):
        tail = sum((Fraction(2, j) for j in J[n:]), Fraction(0))
        rhs = f_power(J[n - 1], 1, prec).reciprocal()
        terms.append((n, CertScalar.of(tail, prec).certainly_lt(rhs)))
    bad = next((n for n, ok in terms if not ok), None)
    out.append(
        _verdict(
            "2.5 sum_{i>n} 2/j_i < 1/f(j_n)",
            bad is None,
            per_n=[[n, ok] for n, ok in terms],
            first_violation=bad,
            note="tails are truncated to the listed terms",
        )
    )
    report = audit_lemma_1_13(p.eps, J[: min(len(J), 8)], prec, conclusion_limit=0, first_index=1)
    admissible = is_admissible(J)
    growth_fail = report["first_failure"]
    out.append(
        _verdict(
            "2.6 J admissible with 1.13.1-1.13.2",
            bool(admissible) and growth_fail is None,
            admissible=bool(admissible),
            admissibility_failure=admissible.reason,
            growth_first_failure=growth_fail,
        )
    )
    necessary = []
    for s in range(1, len(J)):
        rhs = f_power(J[s], 1, prec) * p.eps(s + 1) / 2
        necessary.append((s, CertScalar.of(J[s - 1], prec).certainly_le(rhs)))
    bad = next((s for s, ok in necessary if not ok), None)
    out.append(
        _verdict(
            "2.9 j_s <= N(j_s, eps_s) <= eps_{s+1} f(j_{s+1})/2",
            False if bad is not None else None,
            first_violation=bad,
            note="only the necessary part j_s <= eps_{s+1} f(j_{s+1})/2 is finitely checkable",
        )
    )
    flags = []
    for key, index in p.sigma.table.items():
        seq = [functional_from_json(t) for t in json.loads(key)]
        support = set().union(*(structural_support(t) for t in seq)) if seq else set()
        N = max(support) if support else 0
        ok = N == 0 or (f_power(p.j(index), 1, prec) * p.eps(N)).certainly_ge(N)
        if not ok:
            flags.append(index)
    out.append(_verdict("2.10 eps_N f(sigma(...)) >= N", not flags, flagged_codes=flags))
    return out


# the coder -----------------------------------------------------------------------


def sigma_code(seq: Sequence[Functional], p: GMParams) -> int:
    """The even J index assigned to a finite sequence of functionals."""
    return p.sigma.code(list(seq), p.J if p.mode == TOY else None)


# certificate grammar -------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    path: str
    rule: str
    message: str

    def to_json(self) -> dict:
        return {"path": self.path, "rule": self.rule, "message": self.message}


@dataclass(frozen=True)
class CertificateVerdict:
    valid: bool
    diagnostics: tuple[Diagnostic, ...]

    def __bool__(self) -> bool:
        return self.valid

    @property
    def rules(self) -> set[str]:
        return {d.rule for d in self.diagnostics}

    def to_json(self) -> dict:
        return {"valid": self.valid, "diagnostics": [d.to_json() for d in self.diagnostics]}


def _range(t: Functional) -> tuple[int, int] | None:
    support = structural_support(t)
    return (min(support), max(support)) if support else None


def _successive(children: Sequence[Functional], path: str, rule: str, out: list[Diagnostic]) -> None:
    last = None
    for i, c in enumerate(children):
        r = _range(c)
        if r is None:
            out.append(Diagnostic(f"{path}[{i}]", rule, "functional with empty support cannot be successive"))
            continue
        if last is not None and r[0] <= last:
            out.append(Diagnostic(f"{path}[{i}]", rule, f"range starts at {r[0]}, not after {last}"))
        last = r[1]


def in_Q(t: Functional) -> tuple[bool, str]:
    """Membership in the coefficient class Q.

    Q is generated by rational vectors in [-1, 1] under interval restriction
    and the two block averages; a convex combination belongs only when its
    coefficient vector is itself rational.
    """
    if isinstance(t, Leaf):
        return abs(t.coefficient) <= 1, "leaf coefficient exceeds 1"
    if isinstance(t, (Average, Special)):
        for c in t.children:
            ok, why = in_Q(c)
            if not ok:
                return ok, why
        return True, ""
    if isinstance(t, Restrict):
        return in_Q(t.child)
    if isinstance(t, Combo):
        for pos, parts in symbolic_coefficients(t).items():
            value = sum((m.scale for m in parts if m.is_rational), Fraction(0))
            if not all(m.is_rational for m in parts):
                return False, f"combination has an irrational coefficient at position {pos}"
            if abs(value) > 1:
                return False, f"combination coefficient {value} at position {pos} is outside [-1, 1]"
        return True, ""
    raise TypeError(f"not a functional node: {t!r}")


def _as_block(t: Functional) -> Average | None:
    """The average behind an A*-block, seeing through a restriction that keeps everything."""
    if isinstance(t, Average):
        return t
    if isinstance(t, Restrict) and isinstance(t.child, Average):
        support = structural_support(t.child)
        if all(p in t.interval for p in support):
            return t.child
    return None


def _check_sigma(t: Special, p: GMParams, path: str, out: list[Diagnostic], prec: int | None) -> None:
    blocks = [_as_block(c) for c in t.children]
    sizes = [b.l for b in blocks]
    n1 = sizes[0]
    if p.mode == TOY:
        hits = [i for i in range(2, len(p.J) + 1, 2) if p.J[i - 1] == n1]
        if not hits:
            out.append(Diagnostic(path, "sigma-first", f"n_1 = {n1} is not an even-indexed element of J"))
        elif hits[0] // 2 < t.k:
            out.append(Diagnostic(path, "sigma-first", f"n_1 = j_{hits[0]} needs index k' = {hits[0] // 2} >= k = {t.k}"))
    else:
        bound = p.j_bound(2, prec).log2_lower
        if f_power(n1, 1, prec).certainly_lt(bound):
            out.append(Diagnostic(path, "sigma-first", f"n_1 = {n1} is below the strict lower bound of j_2"))
    for i in range(1, t.k):
        code = p.sigma.lookup(list(t.children[:i]))
        if code is None:
            out.append(Diagnostic(f"{path}[{i}]", "sigma-link", "prefix has no sigma code"))
            continue
        if p.mode == STRICT:
            out.append(Diagnostic(f"{path}[{i}]", "sigma-link", f"n_{i + 1} = {sizes[i]} but the strict code is a symbolic j_{{2t}}"))
            continue
        if code > len(p.J):
            out.append(Diagnostic(f"{path}[{i}]", "sigma-link", f"code j_{code} lies beyond J"))
        elif p.J[code - 1] != sizes[i]:
            out.append(
                Diagnostic(f"{path}[{i}]", "sigma-link", f"n_{i + 1} = {sizes[i]} but sigma(prefix) = j_{code} = {p.J[code - 1]}")
            )


def _validate(t: Functional, p: GMParams, path: str, out: list[Diagnostic], prec: int | None) -> None:
    if isinstance(t, Leaf):
        if abs(t.coefficient) > 1:
            out.append(Diagnostic(path, "leaf-bound", f"|{t.coefficient}| > 1"))
        if t.position < 1:
            out.append(Diagnostic(path, "leaf-bound", f"position {t.position} < 1"))
    elif isinstance(t, Combo):
        mass = sum((abs(w) for w, _ in t.terms), Fraction(0))
        if mass > 1:
            out.append(Diagnostic(path, "l1-mass", f"sum of |weights| = {mass} > 1"))
        for i, (_, c) in enumerate(t.terms):
            _validate(c, p, f"{path}.terms[{i}]", out, prec)
    elif isinstance(t, Average):
        if t.l < 1 or len(t.children) != t.l:
            out.append(Diagnostic(path, "arity", f"average of l = {t.l} has {len(t.children)} children"))
        _successive(t.children, f"{path}.children", "successive", out)
        for i, c in enumerate(t.children):
            _validate(c, p, f"{path}.children[{i}]", out, prec)
    elif isinstance(t, Special):
        if t.k < 1 or len(t.children) != t.k:
            out.append(Diagnostic(path, "arity", f"special of k = {t.k} has {len(t.children)} children"))
            return
        blocks = [_as_block(c) for c in t.children]
        if any(b is None for b in blocks):
            out.append(Diagnostic(path, "special-shape", "every child of a special node must be an average"))
            return
        inner = [z for b in blocks for z in b.children]
        _successive(inner, f"{path}.inner", "special-successive", out)
        for i, b in enumerate(blocks):
            if len(b.children) != b.l:
                out.append(Diagnostic(f"{path}.children[{i}]", "arity", f"average of l = {b.l} has {len(b.children)} children"))
            for j, z in enumerate(b.children):
                ok, why = in_Q(z)
                if not ok:
                    out.append(Diagnostic(f"{path}.children[{i}].children[{j}]", "Q-membership", why))
                _validate(z, p, f"{path}.children[{i}].children[{j}]", out, prec)
        _check_sigma(t, p, path, out, prec)
    elif isinstance(t, Restrict):
        _validate(t.child, p, f"{path}.child", out, prec)
    else:
        raise TypeError(f"not a functional node: {t!r}")


def validate_certificate(t: Functional, p: GMParams, prec: int | None = None) -> CertificateVerdict:
    """Derivability in the grammar, with per-node diagnostics instead of exceptions."""
    out: list[Diagnostic] = []
    _validate(t, p, "root", out, prec)
    if not out:
        for pos, parts in symbolic_coefficients(t).items():
            try:
                if symbolic_compare(parts, 1, prec) > 0 or symbolic_compare(parts, -1, prec) < 0:
                    out.append(Diagnostic("root", "coefficient-range", f"coefficient at {pos} leaves [-1, 1]"))
            except IndeterminateComparison:
                out.append(Diagnostic("root", "coefficient-range", f"coefficient at {pos} undecided"))
    return CertificateVerdict(not out, tuple(out))


# the norm ------------------------------------------------------------------------


@dataclass(frozen=True)
class GMNormResult:
    lower: CertScalar
    upper: CertScalar
    certificate: Functional
    mode: str
    justification: str = ""
    warnings: tuple[str, ...] = ()

    @property
    def value(self) -> CertScalar:
        if self.lower is self.upper:
            return self.lower
        return CertScalar.between(self.lower.lo_q, max(self.upper.hi_q, self.lower.lo_q), self.lower.prec)

    @property
    def gap(self) -> Fraction:
        return self.upper.hi_q - self.lower.lo_q

    def to_json(self, with_certificate: bool = True) -> dict:
        out = {
            "mode": self.mode,
            "value": self.value.to_json(),
            "lower": self.lower.to_json(),
            "upper": self.upper.to_json(),
            "gap": format_rational(self.gap) if self.gap.denominator < 10**30 else str(float(self.gap)),
            "justification": self.justification,
        }
        if with_certificate:
            out["certificate"] = functional_to_json(self.certificate)
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out


def activation_threshold(p: GMParams, prec: int | None = None) -> int | StrictBound:
    """j_2: the shortest first block of any special functional with k >= 2."""
    if p.mode == TOY:
        return p.j(2)
    return p.j_bound(2, prec)


def _l1(x: AnyVector, prec: int | None) -> CertScalar:
    return sum((abs(symbolic_enclosure(c, prec)) for c in x.coefficients()), CertScalar.of(0, prec))


def upper_bound(x: AnyVector, prec: int | None = None) -> tuple[CertScalar, str]:
    """A certified upper bound on the GM norm.

    Every rule weight 1/f(l) and 1/sqrt(f(k)) is at most 1/sqrt(f(l)), so the
    norm of the same recursive kind with weights 1/sqrt(f(l)) dominates every
    functional of the grammar.  Past the DP limit the l1 norm is used.
    """
    if not x:
        return CertScalar.of(0, prec), "zero vector"
    if len(x) <= UPPER_DP_LIMIT:
        table = PartitionTable.build(x, power=Fraction(1, 2))
        lo, hi = table.norm_bounds(0, table.n - 1)
        return CertScalar.between(Fraction(lo), Fraction(hi), prec), "1/sqrt(f) dominating norm"
    return _l1(x, prec), "l1 norm"


def collapses(x: AnyVector, p: GMParams, prec: int | None = None) -> bool:
    """True when no special functional can beat the S norm on x.

    A special functional is at most ||x||_1 / f(j_2) <= |supp x| ||x||_inf / f(j_2),
    so |supp x| <= f(j_2) suffices.
    """
    bound = activation_threshold(p, prec)
    log2_lower = bound.log2_lower if isinstance(bound, StrictBound) else f_power(bound, 1, prec)
    return log2_lower.certainly_ge(len(x))


def _special_candidates(x: AnyVector, p: GMParams, k_max: int, table: PartitionTable, warnings: list[str]):
    n = table.n
    J = p.J
    for k in range(2, k_max + 1):
        firsts = [J[i - 1] for i in range(2 * k, len(J) + 1, 2) if J[i - 1] <= n]
        if 2 * k > len(J):
            warnings.append(f"k = {k} needs j_{2 * k}, beyond the toy J")
            return
        for n1 in firsts:
            for e1 in range(n1 - 1, n):
                blocks = [(0, e1, n1)]
                children = [_block(table, 0, e1, n1)]
                start = e1 + 1
                complete = True
                for i in range(1, k):
                    try:
                        code = sigma_code(children, p)
                    except JExhausted as exc:
                        warnings.append(f"sigma codes exhausted: {exc}")
                        return
                    if code > len(J):
                        complete = False
                        break
                    size = J[code - 1]
                    end = n - 1 if i == k - 1 else start + size - 1
                    if end - start + 1 < size or end >= n:
                        complete = False
                        break
                    blocks.append((start, end, size))
                    children.append(_block(table, start, end, size))
                    start = end + 1
                if complete:
                    yield Special(k, tuple(children))


def _block(table: PartitionTable, i: int, j: int, size: int) -> Average:
    return Average(size, tuple(table.certificate(a, b) for a, b in table.pieces(size, i, j)))


def gm_norm(
    x: AnyVector,
    p: GMParams,
    prec: int | None = None,
    k_max: int = 2,
    d_max: int = 1,
    extra: Sequence[Functional] = (),
) -> GMNormResult:
    """Certified bounds on the GM norm.

    Strict mode returns norm_S exactly when the support is small enough for
    the collapse bound.  Toy mode reports the best certified lower bound found
    (S certificates, enumerated special functionals up to ``k_max`` blocks,
    and any valid ``extra`` certificates) together with a dominating upper
    bound.  Toy enumeration registers the sigma codes it uses.
    """
    warnings: list[str] = []
    if not x:
        zero = CertScalar.of(0, prec)
        return GMNormResult(zero, zero, Combo(()), p.mode, "zero vector")
    small = len(x) <= UPPER_DP_LIMIT
    if p.mode == STRICT and collapses(x, p, prec):
        result = norm_S(x, prec)
        return GMNormResult(
            result.value,
            result.value,
            result.certificate,
            STRICT,
            "support at most f(j_2): every special functional is bounded by ||x||_inf",
        )
    if small:
        base = norm_S(x, prec)
        best, cert = base.value, base.certificate
    else:
        cert = _flat_average(x)
        best = evaluate(cert, x, prec)
        warnings.append(f"support {len(x)} exceeds the DP limit; lower bound from flat averages")
    candidates: list[Functional] = list(extra)
    if p.mode == TOY and d_max >= 1 and small and len(x) >= p.j(2):
        table = PartitionTable.build(x)
        candidates.extend(_special_candidates(x, p, k_max, table, warnings))
    for t in candidates:
        if not validate_certificate(t, p, prec):
            warnings.append("an invalid candidate certificate was skipped")
            continue
        value = evaluate(t, x, prec)
        if value.lo_q > best.lo_q:
            best, cert = value, t
    upper, how = upper_bound(x, prec)
    if p.mode == STRICT:
        note = "strict support above the collapse bound; lower bound is the S norm"
    else:
        note = f"toy enumeration with k <= {k_max}, depth <= {d_max}; upper bound from the {how}"
    return GMNormResult(best, upper, cert, p.mode, note, tuple(dict.fromkeys(warnings)))


def _flat_average(x: AnyVector) -> Functional:
    """max(sup, (1/f(n)) sum |x_i|) as a functional."""
    coeffs = x.coefficients()
    enclosures = [abs(symbolic_enclosure(c, 53)) for c in coeffs]
    k = max(range(len(coeffs)), key=lambda i: enclosures[i].hi_q)
    leaves = tuple(Leaf(pos, Fraction(1 if _positive(c) else -1)) for pos, c in zip(x.support(), coeffs))
    average = Average(len(leaves), leaves)
    single = leaves[k]
    total = sum((e.lo_q for e in enclosures), Fraction(0))
    if enclosures[k].lo_q * f_power(len(leaves), 1, 53).lo_q >= total:
        return single
    return average


def _positive(c) -> bool:
    return (c.scale if isinstance(c, LogMonomial) else c) > 0


# rapidly increasing sequences -----------------------------------------------------


def _least_k(predicate, start: int = 1) -> int:
    hi = max(start, 1)
    while not predicate(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def check_ris_arithmetic(xs: BlockSequence | Sequence[AnyVector], ks: Sequence[int], p: GMParams, c=1, prec: int | None = None) -> dict:
    """The finitely checkable inequalities of the rapidly increasing condition.

    For each n: 2n/f(k_n) < eps_n^2, f(k_n)/k_n < eps_n^2, and for n >= 2
    f(eps_n sqrt(k_n)) >= max supp(x_{n-1}) / eps_n^2.  The spreading-model
    condition is an asymptotic statement and is only reported.
    """
    xs = list(xs)
    if len(xs) != len(ks):
        raise ValueError("one k_n per vector is needed")
    rows = []
    for n, (x, k) in enumerate(zip(xs, ks), start=1):
        e = p.eps(n)
        e2 = CertScalar.of(e * e, prec)
        first_need = CertScalar.of(2 * n / (e * e), prec)
        ineq1 = (CertScalar.of(2 * n, prec) / f_power(k, 1, prec)).certainly_lt(e2)
        ineq2 = (f_power(k, 1, prec) / k).certainly_lt(e2)
        row = {
            "n": n,
            "k_n": k,
            "2n/f(k_n) < eps_n^2": ineq1,
            "min_k_log2_for_2n/f(k)": first_need.to_json(),
            "f(k_n)/k_n < eps_n^2": ineq2,
            "min_k_for_f(k)/k": str(_least_k(lambda m: (f_power(m, 1, prec) / m).certainly_lt(e2), 2)),
        }
        if n == 1:
            row["f(eps_n sqrt(k_n)) >= max supp(x_{n-1})/eps_n^2"] = "vacuous for n = 1"
        else:
            prev = max(xs[n - 2].support())
            need = CertScalar.of(Fraction(prev) / (e * e), prec)
            arg = CertScalar.of(k, prec).sqrt() * e
            row["f(eps_n sqrt(k_n)) >= max supp(x_{n-1})/eps_n^2"] = f_real(arg).certainly_ge(need)
            row["min_k_log2_for_third"] = {
                "note": "k >= ((2^B - 1)/eps_n)^2 with B below",
                "B": need.to_json(),
            }
        rows.append(row)
    asserted = [
        v for r in rows for key, v in r.items() if key.startswith(("2n/", "f(k_n)", "f(eps")) and isinstance(v, bool)
    ]
    return {
        "constant": format_rational(Fraction(c)),
        "rows": rows,
        "all_hold": all(asserted),
        "spreading_model": "not finitely checkable",
    }
