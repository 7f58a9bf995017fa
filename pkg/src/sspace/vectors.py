"""Finitely supported rational vectors on the unit-vector basis of c00.

Positions are 1-based throughout.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .arith import LogMonomial, format_rational, monomial_sum, parse_rational


class EmptyRangeError(ValueError):
    """The zero vector has no range."""


class BlockError(ValueError):
    """Raised for block sequences whose ranges are not strictly successive."""


@dataclass(frozen=True, order=True)
class IndexInterval:
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo < 1 or self.hi < self.lo:
            raise ValueError(f"bad interval [{self.lo}, {self.hi}]")

    def __contains__(self, position: int) -> bool:
        return self.lo <= position <= self.hi

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.lo, self.hi + 1))


@dataclass(frozen=True)
class FiniteVector:
    """Sorted ``(position, coefficient)`` pairs with no stored zeros."""

    entries: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self) -> None:
        last = 0
        for pos, coeff in self.entries:
            if not isinstance(pos, int) or pos <= last:
                raise ValueError("positions must be strictly increasing positive integers")
            if not isinstance(coeff, Fraction) or coeff == 0:
                raise ValueError("coefficients must be nonzero Fractions")
            last = pos

    # construction -------------------------------------------------------

    @classmethod
    def from_map(cls, mapping: Mapping[int, object]) -> "FiniteVector":
        items = []
        for pos in sorted(mapping):
            coeff = parse_rational(mapping[pos])
            if coeff != 0:
                items.append((int(pos), coeff))
        return cls(tuple(items))

    @classmethod
    def from_list(cls, values: Sequence[object], start: int = 1) -> "FiniteVector":
        return cls.from_map({start + i: v for i, v in enumerate(values)})

    @classmethod
    def unit(cls, position: int, coeff: object = 1) -> "FiniteVector":
        return cls.from_map({position: coeff})

    @classmethod
    def ones(cls, n: int, start: int = 1) -> "FiniteVector":
        return cls.from_list([1] * n, start)

    # inspection ---------------------------------------------------------

    @cached_property
    def _by_position(self) -> dict[int, Fraction]:
        return dict(self.entries)

    def __getitem__(self, position: int) -> Fraction:
        return self._by_position.get(position, Fraction(0))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[int, Fraction]]:
        return iter(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.entries)

    def support(self) -> list[int]:
        return [pos for pos, _ in self.entries]

    def coefficients(self) -> list[Fraction]:
        return [coeff for _, coeff in self.entries]

    def range(self) -> IndexInterval:
        if not self.entries:
            raise EmptyRangeError("the zero vector has no range")
        return IndexInterval(self.entries[0][0], self.entries[-1][0])

    def sup_norm(self) -> Fraction:
        return max((abs(c) for c in self.coefficients()), default=Fraction(0))

    # algebra ------------------------------------------------------------

    def __add__(self, other: "FiniteVector") -> "FiniteVector":
        if isinstance(other, MonomialVector):
            return MonomialVector.lift(self) + other
        acc = self.as_dict()
        for pos, coeff in other.entries:
            acc[pos] = acc.get(pos, Fraction(0)) + coeff
        return FiniteVector.from_map(acc)

    def __neg__(self) -> "FiniteVector":
        return FiniteVector(tuple((p, -c) for p, c in self.entries))

    def __sub__(self, other: "FiniteVector") -> "FiniteVector":
        return self + (-other)

    def scale(self, factor: object) -> "FiniteVector":
        factor = parse_rational(factor)
        if factor == 0:
            return FiniteVector()
        return FiniteVector(tuple((p, c * factor) for p, c in self.entries))

    __rmul__ = scale

    def relocate(self, positions: Sequence[int]) -> "FiniteVector":
        """Move the coefficients, in order, onto the given increasing positions."""
        if len(positions) != len(self.entries):
            raise ValueError("need one target position per support point")
        return FiniteVector(tuple(zip((int(p) for p in positions), self.coefficients())))

    def compact(self) -> "FiniteVector":
        """The same coefficient list placed on 1..|supp|."""
        return self.relocate(range(1, len(self.entries) + 1))

    # serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {"entries": [[pos, format_rational(c)] for pos, c in self.entries]}

    @classmethod
    def from_json(cls, data: Mapping) -> "FiniteVector":
        last = 0
        mapping: dict[int, Fraction] = {}
        for i, item in enumerate(data["entries"]):
            pos, value = item
            pos = int(pos)
            if pos <= last:
                raise ValueError(f"entry {i}: position {pos} is not strictly increasing")
            last = pos
            mapping[pos] = parse_rational(value)
        return cls.from_map(mapping)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["position", "value"])
        for pos, coeff in self.entries:
            writer.writerow([pos, format_rational(coeff)])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FiniteVector":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] and rows[0][0].strip() == "position":
            rows = rows[1:]
        return cls.from_json({"entries": [[r[0], r[1]] for r in rows if r]})

    def __str__(self) -> str:
        body = ", ".join(f"{p}: {format_rational(c)}" for p, c in self.entries)
        return "{" + body + "}"


def restrict(x: FiniteVector, interval: IndexInterval) -> FiniteVector:
    return FiniteVector(tuple((p, c) for p, c in x.entries if p in interval))


def support(x: FiniteVector) -> list[int]:
    return x.support()


def vector_range(x: FiniteVector) -> IndexInterval:
    return x.range()


def same_distribution(x: FiniteVector, y: FiniteVector) -> bool:
    return x.coefficients() == y.coefficients()


def decreasing_rearrangement(x: FiniteVector | Iterable[Fraction]) -> list[Fraction]:
    values = x.coefficients() if isinstance(x, FiniteVector) else list(x)
    return sorted((abs(Fraction(v)) for v in values if v != 0), reverse=True)


def is_block_sequence(blocks: Sequence[FiniteVector]) -> bool:
    last = 0
    for block in blocks:
        if not block:
            return False
        r = block.range()
        if r.lo <= last:
            return False
        last = r.hi
    return True


@dataclass(frozen=True)
class BlockSequence:
    blocks: tuple[FiniteVector, ...]

    def __post_init__(self) -> None:
        if not is_block_sequence(self.blocks):
            raise BlockError("blocks must be nonzero with strictly successive ranges")

    @classmethod
    def of(cls, blocks: Iterable[FiniteVector]) -> "BlockSequence":
        return cls(tuple(blocks))

    @classmethod
    def unit_basis(cls, count: int, start: int = 1) -> "BlockSequence":
        return cls(tuple(FiniteVector.unit(start + i) for i in range(count)))

    def __len__(self) -> int:
        return len(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]

    def __iter__(self) -> Iterator[FiniteVector]:
        return iter(self.blocks)

    def tail(self, start: int) -> "BlockSequence":
        return BlockSequence(self.blocks[start:])

    def combine(self, coefficients: Sequence[object]) -> FiniteVector:
        total = FiniteVector()
        for a, block in zip(coefficients, self.blocks):
            total = total + block.scale(a)
        return total


def _monomial(value) -> LogMonomial:
    return value if isinstance(value, LogMonomial) else LogMonomial.rational(parse_rational(value))


@dataclass(frozen=True)
class MonomialVector:
    """A finitely supported vector whose coefficients are exact log-monomials.

    Used for yardstick-type vectors with coefficients such as f(m)/m.  Sums are
    defined when overlapping coordinates hold like monomials.
    """

    entries: tuple[tuple[int, LogMonomial], ...] = ()

    def __post_init__(self) -> None:
        last = 0
        for pos, coeff in self.entries:
            if pos <= last or coeff.scale == 0:
                raise ValueError("positions must increase and coefficients must be nonzero")
            last = pos

    @classmethod
    def from_map(cls, mapping: Mapping[int, object]) -> "MonomialVector":
        items = [(int(p), _monomial(mapping[p])) for p in sorted(mapping)]
        return cls(tuple((p, c) for p, c in items if c.scale != 0))

    @classmethod
    def lift(cls, x: "FiniteVector | MonomialVector") -> "MonomialVector":
        if isinstance(x, MonomialVector):
            return x
        return cls(tuple((p, LogMonomial.rational(c)) for p, c in x.entries))

    @cached_property
    def _by_position(self) -> dict[int, LogMonomial]:
        return dict(self.entries)

    def __getitem__(self, position: int) -> LogMonomial:
        found = self._by_position.get(position)
        return found if found is not None else LogMonomial.rational(0)

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def support(self) -> list[int]:
        return [p for p, _ in self.entries]

    def coefficients(self) -> list[LogMonomial]:
        return [c for _, c in self.entries]

    def range(self) -> IndexInterval:
        if not self.entries:
            raise EmptyRangeError("the zero vector has no range")
        return IndexInterval(self.entries[0][0], self.entries[-1][0])

    def is_rational(self) -> bool:
        return all(c.is_rational for c in self.coefficients())

    def to_rational(self) -> FiniteVector:
        if not self.is_rational():
            raise ValueError("vector has irrational coefficients")
        return FiniteVector(tuple((p, c.scale) for p, c in self.entries))

    def __add__(self, other) -> "MonomialVector":
        other = MonomialVector.lift(other)
        acc = dict(self.entries)
        for pos, coeff in other.entries:
            if pos in acc:
                terms = monomial_sum((acc[pos], coeff))
                if len(terms) > 1:
                    raise ValueError(f"coordinate {pos} would not be a single monomial")
                if terms:
                    acc[pos] = terms[0]
                else:
                    del acc[pos]
            else:
                acc[pos] = coeff
        return MonomialVector(tuple(sorted(acc.items())))

    def __neg__(self) -> "MonomialVector":
        return MonomialVector(tuple((p, -c) for p, c in self.entries))

    def __sub__(self, other) -> "MonomialVector":
        return self + (-MonomialVector.lift(other))

    def scale(self, factor) -> "MonomialVector":
        factor = _monomial(factor)
        if factor.scale == 0:
            return MonomialVector()
        return MonomialVector(tuple((p, c * factor) for p, c in self.entries))

    def relocate(self, positions: Sequence[int]) -> "MonomialVector":
        if len(positions) != len(self.entries):
            raise ValueError("need one target position per support point")
        return MonomialVector(tuple(zip((int(p) for p in positions), self.coefficients())))

    def restrict(self, interval: IndexInterval) -> "MonomialVector":
        return MonomialVector(tuple((p, c) for p, c in self.entries if p in interval))

    def to_json(self) -> dict:
        return {"entries": [[p, monomial_to_json(c)] for p, c in self.entries]}

    @classmethod
    def from_json(cls, data: Mapping) -> "MonomialVector":
        return cls(tuple((int(p), monomial_from_json(c)) for p, c in data["entries"]))


def monomial_to_json(m: LogMonomial):
    if m.is_rational:
        return format_rational(m.scale)
    return {
        "scale": format_rational(m.scale),
        "radicals": [[p, format_rational(e)] for p, e in m.radicals],
        "logs": [[r, format_rational(e)] for r, e in m.logs],
    }


def monomial_from_json(data) -> LogMonomial:
    if not isinstance(data, dict):
        return LogMonomial.rational(parse_rational(data))
    return LogMonomial(
        parse_rational(data["scale"]),
        tuple((int(p), parse_rational(e)) for p, e in data.get("radicals", [])),
        tuple((int(r), parse_rational(e)) for r, e in data.get("logs", [])),
    )


AnyVector = Union[FiniteVector, MonomialVector]


def restrict_any(x: AnyVector, interval: IndexInterval) -> AnyVector:
    if isinstance(x, MonomialVector):
        return x.restrict(interval)
    return restrict(x, interval)
