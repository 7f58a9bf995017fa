"""Intertwined block sequences z_n = u_n + v_n and their sign-family certificates.

Each z_n is (1/D) times a yardstick transplanted onto the next unused blocks
of a base sequence, and u_n, v_n are its first and second halves by position.
Every yardstick level holds an even number of coordinates spread evenly over
the vector, so each half carries exactly half of every level and u_n < v_n.

A family is a pair (iota, rho): increasing indices i_1 < ... < i_m and signs.
Its t-th functional is the signed average of the base functionals over one
level of z_{i_t}.  The level sizes of z_n are the sigma codes of all families
on {1, ..., n-1}, which is what makes (1/sqrt f(m)) times the sum of a
family's functionals a special functional.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .arith import (
    CertScalar,
    IndeterminateComparison,
    LogMonomial,
    format_rational,
    monomial_sum,
    parse_rational,
    symbolic_compare,
    symbolic_enclosure,
)
from .functionals import (
    Average,
    Functional,
    Leaf,
    Restrict,
    Special,
    evaluate_symbolic,
    from_json as functional_from_json,
    negate,
    structural_support,
    to_json as functional_to_json,
)
from .gm import TOY, GMParams, JExhausted, SigmaCoder, gm_norm, in_Q, upper_bound, validate_certificate, _as_block
from .snorm import extremal_certificate
from .vectors import BlockSequence, FiniteVector, IndexInterval, MonomialVector
from .yardstick import level_coefficient, yardstick_levels

__all__ = [
    "BaseExhausted",
    "Family",
    "FamilyMissing",
    "IntertwinedConstruction",
    "build_construction",
    "check_E65",
    "check_E69",
    "check_family",
    "flip_sign",
    "ratio_report",
]

DEFAULT_FIRST_Q = 3
FAMILY_ORDER = "index sets lexicographically, then sign vectors with + before -"


class BaseExhausted(LookupError):
    pass


class FamilyMissing(KeyError):
    pass


FamilyKey = tuple[tuple[int, ...], tuple[int, ...]]


def _order(key: FamilyKey):
    iota, rho = key
    return iota, tuple(0 if r > 0 else 1 for r in rho)


@dataclass(frozen=True)
class Family:
    iota: tuple[int, ...]
    rho: tuple[int, ...]
    functionals: tuple[Functional, ...]
    pieces: tuple[tuple[int, int], ...]  # (i_t, r_t): the level of z_{i_t} each functional lives on

    @property
    def key(self) -> FamilyKey:
        return self.iota, self.rho

    def to_json(self) -> dict:
        return {
            "iota": list(self.iota),
            "rho": list(self.rho),
            "pieces": [list(p) for p in self.pieces],
            "functionals": [functional_to_json(t) for t in self.functionals],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Family":
        return cls(
            tuple(data["iota"]),
            tuple(data["rho"]),
            tuple(functional_from_json(t) for t in data["functionals"]),
            tuple(tuple(p) for p in data["pieces"]),
        )


@dataclass
class IntertwinedConstruction:
    params: GMParams
    base: BlockSequence
    D: Fraction
    zs: list[MonomialVector]
    us: list[MonomialVector]
    vs: list[MonomialVector]
    sizes: list[tuple[int, ...]]
    codes: list[tuple[int, ...]]
    positions: dict[tuple[int, int], tuple[int, ...]]  # (i, r) -> 0-based base block indices
    families: dict[FamilyKey, Family]
    recodings: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def n_count(self) -> int:
        return len(self.zs)

    def piece(self, i: int, r: int) -> MonomialVector:
        """z(i, r): the part of z_i carried by its r-th level."""
        z = self.zs[i - 1]
        keep = set()
        for b in self.positions[i, r]:
            keep.update(self.base[b].support())
        return MonomialVector(tuple((p, c) for p, c in z.entries if p in keep))

    def family(self, iota: Sequence[int], rho: Sequence[int]) -> Family:
        key = (tuple(iota), tuple(rho))
        if key not in self.families:
            raise FamilyMissing(f"no family for indices {list(iota)}; the construction has {self.n_count} vectors")
        return self.families[key]

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "base": [b.to_json() for b in self.base],
            "D": format_rational(self.D),
            "zs": [z.to_json() for z in self.zs],
            "us": [u.to_json() for u in self.us],
            "vs": [v.to_json() for v in self.vs],
            "sizes": [list(s) for s in self.sizes],
            "codes": [list(c) for c in self.codes],
            "positions": [[i, r, list(b)] for (i, r), b in sorted(self.positions.items())],
            "families": [self.families[k].to_json() for k in sorted(self.families, key=_order)],
            "recodings": self.recodings,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data: dict) -> "IntertwinedConstruction":
        families = [Family.from_json(f) for f in data["families"]]
        return cls(
            GMParams.from_json(data["params"]),
            BlockSequence.of(FiniteVector.from_json(b) for b in data["base"]),
            parse_rational(data["D"]),
            [MonomialVector.from_json(z) for z in data["zs"]],
            [MonomialVector.from_json(u) for u in data["us"]],
            [MonomialVector.from_json(v) for v in data["vs"]],
            [tuple(s) for s in data["sizes"]],
            [tuple(c) for c in data["codes"]],
            {(i, r): tuple(b) for i, r, b in data["positions"]},
            {f.key: f for f in families},
            list(data.get("recodings", [])),
            dict(data.get("metadata", {})),
        )


# construction --------------------------------------------------------------------


def _base_functional(x: FiniteVector) -> Functional:
    """A norm-one functional attaining ||x|| on x."""
    if len(x) == 1:
        (pos, c), = x.entries
        return Leaf(pos, Fraction(1 if c > 0 else -1))
    return extremal_certificate(x)


def _unwrap(t: Functional) -> Functional:
    return t.child if isinstance(t, Restrict) and _as_block(t) is not None else t


def _rewrap(seq: tuple[Functional, ...], p: GMParams) -> tuple[tuple[Functional, ...], int]:
    """Make the last functional new to the coder without changing its values.

    The last average is wrapped in a restriction to a window slightly wider than
    its support; the widening g is the least that gives an uncoded sequence.
    """
    inner = _unwrap(seq[-1])
    support = structural_support(inner)
    lo, hi = min(support), max(support)
    g = 1
    while True:
        candidate = seq[:-1] + (Restrict(IndexInterval(lo, hi + g), inner),)
        if p.sigma.lookup(list(candidate)) is None:
            return candidate, g
        g += 1


def _signed_average(size: int, functionals: Sequence[Functional], sign: int) -> Average:
    children = tuple(functionals) if sign > 0 else tuple(negate(t) for t in functionals)
    return Average(size, children)


def build_construction(
    p: GMParams,
    base: BlockSequence | None = None,
    n_count: int = 3,
    D=1,
    first_q: int = DEFAULT_FIRST_Q,
) -> IntertwinedConstruction:
    """Build z_1, ..., z_{n_count} with every sign family of certificates.

    z_1 is a one-level yardstick of size j_{2 first_q}, so families of up to
    first_q members starting at z_1 pass the first-block condition.  The
    default does not depend on n_count, which keeps the recursion prefix-stable.
    For n >= 2 the levels of z_n are coded, in family order, from the
    families on {1, ..., n-1}; a family whose sequence already has a code
    is re-coded after a value-preserving change of its last functional.  Each
    code is the least unused even index whose j exceeds every earlier j and is
    a multiple of the running total, which keeps the spreading exact.
    Default base: the unit vector basis, as long as needed.
    """
    snapshot = dict(p.sigma.table)
    try:
        return _build(p, base, n_count, D, first_q)
    except BaseExhausted:
        p.sigma.table = snapshot
        if base is None:
            raise
        # code choices do not depend on the base, so a unit-basis run gives the count
        probe = GMParams(p.eps, p.mode, p.J, SigmaCoder(p.mode, dict(snapshot)))
        needed = _build(probe, None, n_count, D, first_q).metadata["base_blocks_used"]
        raise BaseExhausted(f"the construction needs {needed} base blocks, got {len(base)}") from None


def _build(p: GMParams, base, n_count: int, D, first_q: int) -> IntertwinedConstruction:
    if p.mode != TOY:
        raise ValueError("the construction needs concrete toy parameters")
    if n_count < 1:
        raise ValueError("n_count must be at least 1")
    D = Fraction(D)
    if D <= 0:
        raise ValueError("D must be positive")
    blocks = list(base) if base is not None else None
    functional_cache: dict[int, Functional] = {}

    def block(b: int) -> FiniteVector:
        if blocks is None:
            return FiniteVector.unit(b + 1)
        if b >= len(blocks):
            raise BaseExhausted(f"the construction needs at least {b + 1} base blocks, got {len(blocks)}")
        return blocks[b]

    def block_functional(b: int) -> Functional:
        if b not in functional_cache:
            functional_cache[b] = _base_functional(block(b))
        return functional_cache[b]

    zs, us, vs, all_sizes, all_codes = [], [], [], [], []
    positions: dict[tuple[int, int], tuple[int, ...]] = {}
    families: dict[FamilyKey, Family] = {}
    recodings: list[dict] = []
    cursor = 0
    largest = 0
    for n in range(1, n_count + 1):
        keys = sorted(families, key=_order)
        if n == 1:
            index = 2 * first_q
            if index > len(p.J):
                raise JExhausted(f"z_1 needs j_{index}; J has {len(p.J)} terms")
            codes, sizes = [index], [p.J[index - 1]]
        else:
            codes, sizes = [], []
            total = 0
            for key in keys:
                fam = families[key]
                seq = fam.functionals
                if p.sigma.lookup(list(seq)) is not None:
                    seq, g = _rewrap(seq, p)
                    families[key] = fam = replace(fam, functionals=seq)
                    recodings.append({"n": n, "iota": list(key[0]), "rho": list(key[1]), "widening": g})
                index = p.sigma.assign(list(seq), p.J, min_value=max(largest, *sizes, 0) + 1, multiple_of=total or 1)
                codes.append(index)
                sizes.append(p.J[index - 1])
                total += sizes[-1]
        if any(m % 2 for m in sizes):
            raise ValueError(f"level sizes {sizes} must be even to split z_{n} at the half")
        largest = max(largest, *sizes)
        levels = yardstick_levels(sizes)
        coeff = [level_coefficient(m) * (1 / D) for m in sizes]
        entries = []
        level_blocks: dict[int, list[int]] = {}
        for t, lv in enumerate(levels):
            b = cursor + t
            x = block(b)
            level_blocks.setdefault(lv, []).append(b)
            entries.extend((pos, coeff[lv - 1] * c) for pos, c in x.entries)
        cursor += len(levels)
        half = len(levels) // 2
        split = max(block(cursor - len(levels) + half - 1).support())
        z = MonomialVector(tuple(entries))
        zs.append(z)
        us.append(MonomialVector(tuple(e for e in entries if e[0] <= split)))
        vs.append(MonomialVector(tuple(e for e in entries if e[0] > split)))
        all_sizes.append(tuple(sizes))
        all_codes.append(tuple(codes))
        for r, bs in level_blocks.items():
            positions[n, r] = tuple(bs)

        # new families end at n: the empty prefix uses level 1, a prefix family the level it coded
        prefixes: list[Family | None] = [None] + [families[k] for k in keys]
        for prefix in prefixes:
            if prefix is None:
                r = 1
            else:
                r = codes.index(p.sigma.lookup(list(prefix.functionals))) + 1
            base_functionals = [block_functional(b) for b in positions[n, r]]
            for sign in (1, -1):
                last = _signed_average(sizes[r - 1], base_functionals, sign)
                if prefix is None:
                    fam = Family((n,), (sign,), (last,), ((n, r),))
                else:
                    fam = Family(
                        prefix.iota + (n,), prefix.rho + (sign,), prefix.functionals + (last,), prefix.pieces + ((n, r),)
                    )
                families[fam.key] = fam

    used = BlockSequence.of(block(b) for b in range(cursor)) if blocks is None else BlockSequence.of(blocks)
    metadata = {
        "first_q": first_q,
        "family_order": FAMILY_ORDER,
        "recoding": "last functional wrapped in a restriction to a window widened until the sequence is uncoded",
        "base": "unit vector basis" if blocks is None else "supplied block sequence",
        "base_blocks_used": cursor,
        "base_k_indices": "odd positions of J (j_1, j_3, j_5, ...) when the base is taken as averages",
    }
    return IntertwinedConstruction(
        p, used, D, zs, us, vs, all_sizes, all_codes, positions, families, recodings, metadata
    )


# checks --------------------------------------------------------------------------


def _value(t: Functional, x) -> tuple[LogMonomial, ...]:
    return evaluate_symbolic(t, x)


def _block_union(c: IntertwinedConstruction, i: int, r: int) -> set[int]:
    out: set[int] = set()
    for b in c.positions[i, r]:
        out.update(c.base[b].support())
    return out


def check_family(c: IntertwinedConstruction, fam: Family, prec: int | None = None) -> dict:
    """Conditions (a)-(d) for one family; (c)'s inequality is reported."""
    target = Fraction(1) / (2 * c.D)
    rows = []
    for t, (z_star, (i, r), sign) in enumerate(zip(fam.functionals, fam.pieces, fam.rho), start=1):
        block = _as_block(z_star)
        support_ok = structural_support(z_star) <= _block_union(c, i, r)
        size = c.sizes[i - 1][r - 1]
        q_ok, _ = in_Q(z_star)
        member = bool(validate_certificate(z_star, c.params, prec)) and block is not None and block.l == size and q_ok
        on_u = _value(z_star, c.us[i - 1])
        on_v = _value(z_star, c.vs[i - 1])
        on_piece = _value(z_star, c.piece(i, r))
        halves = on_u == on_v and monomial_sum([m * 2 for m in on_u]) == on_piece
        signed = monomial_sum([m * sign for m in on_piece])
        try:
            inequality = symbolic_compare(signed, target, prec) >= 0
        except IndeterminateComparison:
            inequality = None
        if t == 1:
            linkage, expected = True, None
        else:
            code = c.params.sigma.lookup(list(fam.functionals[: t - 1]))
            expected = c.params.J[code - 1] if code is not None and code <= len(c.params.J) else None
            linkage = expected == size
        rows.append(
            {
                "t": t,
                "i": i,
                "r": r,
                "a_support": support_ok,
                "b_membership": member,
                "c_equalities": halves,
                "c_inequality": inequality,
                "value_on_piece": str(float(symbolic_enclosure(signed, prec).lo_q)),
                "d_linkage": linkage,
                "sigma_of_prefix": expected,
                "block_size": size,
            }
        )
    return {
        "iota": list(fam.iota),
        "rho": list(fam.rho),
        "rows": rows,
        "holds": all(r["a_support"] and r["b_membership"] and r["c_equalities"] and r["d_linkage"] for r in rows),
        "inequality_holds": all(r["c_inequality"] is True for r in rows),
    }


def check_E65(c: IntertwinedConstruction, prec: int | None = None) -> dict:
    """Every family's conditions, in family order.

    (a), (b), the exact equalities of (c) and the linkage (d) are asserted.
    The bound rho_t z*_t(z(i_t, r_t)) >= 1/(2D) is reported.
    """
    verdicts = [check_family(c, c.families[k], prec) for k in sorted(c.families, key=_order)]
    return {
        "families": verdicts,
        "count": len(verdicts),
        "all_hold": all(v["holds"] for v in verdicts),
        "inequalities_hold": all(v["inequality_holds"] for v in verdicts),
    }


def flip_sign(fam: Family, t: int) -> Family:
    """The family with the sign of its t-th functional flipped but rho kept (a negative control)."""
    functionals = list(fam.functionals)
    functionals[t - 1] = negate(_unwrap(functionals[t - 1]))
    return replace(fam, functionals=tuple(functionals))


def check_E69(c: IntertwinedConstruction, coeffs: Sequence, indices: Sequence[int], prec: int | None = None) -> dict:
    """Lower bound for sum_s a_s z_{n_s} from the sign-matched special functional.

    Asserted: value >= (1/(D sqrt f(m))) sum |a_s| and value <= the dominating
    upper bound.  Grammar validity of the special functional is reported.
    """
    coeffs = [Fraction(a) for a in coeffs]
    indices = [int(i) for i in indices]
    m = len(indices)
    if m == 0 or m != len(coeffs):
        raise ValueError("one coefficient per index is needed")
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ValueError("indices must increase")
    if any(a == 0 for a in coeffs):
        raise ValueError("coefficients must be nonzero")
    signs = tuple(1 if a > 0 else -1 for a in coeffs)
    fam = c.family(indices, signs)
    special = Special(m, fam.functionals)
    x = MonomialVector()
    for a, i in zip(coeffs, indices):
        x = x + c.zs[i - 1].scale(a)
    value = _value(special, x)
    bound = LogMonomial.f_power(m, Fraction(-1, 2)) * (sum(abs(a) for a in coeffs) / c.D)
    try:
        lower_ok = symbolic_compare(value, bound, prec) >= 0
    except IndeterminateComparison:
        lower_ok = False
    upper, how = upper_bound(x, prec)
    value_enclosure = symbolic_enclosure(value, prec)
    verdict = validate_certificate(special, c.params, prec)
    return {
        "indices": indices,
        "coeffs": [format_rational(a) for a in coeffs],
        "signs": list(signs),
        "value": value_enclosure.to_json(),
        "bound": symbolic_enclosure(bound, prec).to_json(),
        "lower_bound_holds": lower_ok,
        "upper": upper.to_json(),
        "upper_method": how,
        "below_upper": value_enclosure.certainly_le(upper),
        "special_valid": verdict.valid,
        "diagnostics": [d.to_json() for d in verdict.diagnostics],
        "holds": lower_ok and value_enclosure.certainly_le(upper),
    }


def ratio_report(c: IntertwinedConstruction, m: int, prec: int | None = None) -> dict:
    """||sum_{i<=m} (u_i - v_i)|| / ||sum_{i<=m} (u_i + v_i)|| as an interval. Report only."""
    if not 1 <= m <= c.n_count:
        raise ValueError(f"m must lie in 1..{c.n_count}")
    diff, total = MonomialVector(), MonomialVector()
    for i in range(m):
        diff = diff + c.us[i] - c.vs[i]
        total = total + c.zs[i]
    # d_max = 0: no special enumeration, which would register new sigma codes
    num = gm_norm(diff, c.params, prec, d_max=0)
    den = gm_norm(total, c.params, prec, d_max=0)
    lo = num.lower.lo_q / den.upper.hi_q
    hi = num.upper.hi_q / den.lower.lo_q
    ratio = CertScalar.between(lo, hi, prec)
    return {
        "m": m,
        "numerator": {"lower": num.lower.to_json(), "upper": num.upper.to_json()},
        "denominator": {"lower": den.lower.to_json(), "upper": den.upper.to_json()},
        "ratio": ratio.to_json(),
        "report_only": True,
    }
