"""Summable positive sequences with certified tails.

A sequence is a finite explicit head followed by a closed-form tail, either
geometric ``scale * ratio**n`` or super-geometric ``scale * base**-((n + shift)**2)``.
Indexing starts at 0.  Geometric tails are summed exactly; super-geometric
tails get a rational upper bound from the decreasing term ratio.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .arith import format_rational, parse_rational

_COEF = r"(?:(?P<coef>[0-9]+(?:/[0-9]+)?)\s*\*\s*)?"
_GEOMETRIC = re.compile(
    r"^\s*" + _COEF + r"(?P<base>[0-9]+)\s*\^\s*\(?\s*-\s*n\s*(?P<shift>[+-]\s*[0-9]+)?\s*\)?\s*$"
)
_SQUARE = re.compile(
    r"^\s*" + _COEF + r"(?P<base>[0-9]+)\s*\^\s*-\s*\(\s*n\s*(?P<shift>[+-]\s*[0-9]+)?\s*\)\s*\^\s*2\s*$"
)

GEOMETRIC = "geometric"
SQUARE = "square"


@dataclass(frozen=True)
class EpsSequence:
    scale: Fraction
    ratio: Fraction = Fraction(0)
    head: tuple[Fraction, ...] = ()
    label: str = ""
    kind: str = GEOMETRIC
    base: int = 2
    shift: int = 0

    def __post_init__(self) -> None:
        if self.kind == GEOMETRIC and not 0 <= self.ratio < 1:
            raise ValueError("the geometric ratio must lie in [0, 1)")
        if self.kind == SQUARE and (self.base < 2 or self.shift < 0):
            raise ValueError("square-exponent tails need base >= 2 and shift >= 0")
        if self.kind not in (GEOMETRIC, SQUARE):
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if self.scale < 0 or any(h < 0 for h in self.head):
            raise ValueError("terms must be nonnegative")

    @classmethod
    def geometric(cls, scale, ratio, head=()) -> "EpsSequence":
        return cls(Fraction(scale), Fraction(ratio), tuple(Fraction(h) for h in head))

    @classmethod
    def square(cls, scale=1, base: int = 2, shift: int = 0, head=()) -> "EpsSequence":
        return cls(Fraction(scale), Fraction(0), tuple(Fraction(h) for h in head), "", SQUARE, base, shift)

    @classmethod
    def parse(cls, text: str) -> "EpsSequence":
        """Parse ``2^-n``, ``4^-n-3``, ``1/2*3^-n`` or ``2^-(n+2)^2``."""
        for pattern, kind in ((_SQUARE, SQUARE), (_GEOMETRIC, GEOMETRIC)):
            match = pattern.match(text)
            if match:
                break
        else:
            raise ValueError(f"cannot parse epsilon sequence {text!r}")
        base = int(match["base"])
        coef = parse_rational(match["coef"]) if match["coef"] else Fraction(1)
        shift = int(match["shift"].replace(" ", "")) if match["shift"] else 0
        if kind == SQUARE:
            return cls(coef, Fraction(0), (), text.strip(), SQUARE, base, shift)
        return cls(coef * Fraction(base) ** shift, Fraction(1, base), (), text.strip())

    def __call__(self, n: int) -> Fraction:
        if n < 0:
            raise IndexError("sequence starts at index 0")
        if n < len(self.head):
            return self.head[n]
        if self.kind == SQUARE:
            return self.scale / Fraction(self.base) ** ((n + self.shift) ** 2)
        return self.scale * self.ratio**n

    @property
    def exact_tails(self) -> bool:
        return self.kind == GEOMETRIC

    def _square_ratio_bound(self, n: int, weight: int) -> Fraction:
        """Upper bound on term(i+1)/term(i) for all i >= n (weighted by i**weight)."""
        decay = Fraction(1, self.base ** (2 * (n + self.shift) + 1))
        if weight and n > 0:
            decay *= Fraction(n + 1, n) ** weight
        return decay

    def _tail_bound(self, start: int, weight: int) -> Fraction:
        start = max(start, 0)
        explicit = sum((j**weight * self.head[j] for j in range(start, len(self.head))), Fraction(0))
        N = max(start, len(self.head))
        if self.kind == GEOMETRIC:
            r = self.ratio
            if weight == 0:
                closed = r**N / (1 - r)
            else:
                # sum_{j >= 0} (j + N)^2 r^(j + N)
                closed = r**N * (
                    r * (1 + r) / (1 - r) ** 3 + 2 * N * r / (1 - r) ** 2 + Fraction(N * N) / (1 - r)
                )
            return explicit + self.scale * closed
        # add terms until the term ratio bound drops below 1/2, then close geometrically
        while self._square_ratio_bound(N, weight) > Fraction(1, 2) or (weight and N == 0):
            explicit += N**weight * self(N)
            N += 1
        rho = self._square_ratio_bound(N, weight)
        return explicit + N**weight * self(N) / (1 - rho)

    def tail_sum(self, start: int) -> Fraction:
        """Upper bound on sum_{j >= start} eps_j; exact for geometric tails."""
        return self._tail_bound(start, 0)

    def weighted_tail(self, start: int) -> Fraction:
        """Upper bound on sum_{j >= start} j**2 eps_j; exact for geometric tails."""
        return self._tail_bound(start, 2)

    def decreasing_from(self) -> int:
        """An index from which the sequence is non-increasing."""
        return len(self.head)

    def sup(self) -> Fraction:
        """The largest term."""
        return max([*self.head, self(len(self.head))])

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "scale": format_rational(self.scale),
            "head": [format_rational(h) for h in self.head],
            "label": self.label,
        }
        if self.kind == GEOMETRIC:
            out["ratio"] = format_rational(self.ratio)
        else:
            out["base"] = self.base
            out["shift"] = self.shift
        return out

    @classmethod
    def from_json(cls, data) -> "EpsSequence":
        if isinstance(data, str):
            return cls.parse(data)
        head = tuple(parse_rational(h) for h in data.get("head", []))
        if data.get("kind", GEOMETRIC) == SQUARE:
            return cls(
                parse_rational(data["scale"]), Fraction(0), head, data.get("label", ""),
                SQUARE, int(data["base"]), int(data["shift"]),
            )
        return cls(parse_rational(data["scale"]), parse_rational(data["ratio"]), head, data.get("label", ""))
