"""Functional trees: the syntax of norming functionals and their evaluation.

A tree is built from five node kinds.  ``Leaf`` is a signed coordinate
functional, ``Combo`` a weighted sum, ``Average`` the sum of ``l`` children
scaled by 1/f(l), ``Special`` the sum of ``k`` average blocks scaled by
1/sqrt(f(k)), and ``Restrict`` the restriction of a child to an interval.
Whether a tree is *admissible* for a given space is decided elsewhere; here
trees are only built, evaluated, serialized and inspected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .arith import (
    CertScalar,
    LogMonomial,
    csum,
    f_power,
    format_rational,
    monomial_sum,
    parse_rational,
    symbolic_enclosure,
)
from .vectors import AnyVector, IndexInterval, restrict_any


@dataclass(frozen=True)
class Leaf:
    position: int
    coefficient: Fraction = Fraction(1)


@dataclass(frozen=True)
class Combo:
    terms: tuple[tuple[Fraction, "Functional"], ...]


@dataclass(frozen=True)
class Average:
    l: int
    children: tuple["Functional", ...]


@dataclass(frozen=True)
class Special:
    k: int
    children: tuple["Functional", ...]

    @property
    def block_sizes(self) -> list[int]:
        return [c.l if isinstance(c, Average) else 0 for c in self.children]


@dataclass(frozen=True)
class Restrict:
    interval: IndexInterval
    child: "Functional"


Functional = Union[Leaf, Combo, Average, Special, Restrict]

ZERO = Combo(())


def average(children) -> Average:
    children = tuple(children)
    return Average(len(children), children)


def negate(t: Functional) -> Functional:
    """The functional -t, keeping leaf/average trees in leaf/average form."""
    if isinstance(t, Leaf):
        return Leaf(t.position, -t.coefficient)
    if isinstance(t, Average):
        return Average(t.l, tuple(negate(c) for c in t.children))
    if isinstance(t, Restrict):
        return Restrict(t.interval, negate(t.child))
    if isinstance(t, Combo):
        return Combo(tuple((-w, c) for w, c in t.terms))
    return Combo(((Fraction(-1), t),))


def evaluate(t: Functional, x: AnyVector, prec: int | None = None) -> CertScalar:
    """Certified value of ``t`` on ``x``; exact whenever every weight is rational."""
    if isinstance(t, Leaf):
        return symbolic_enclosure(t.coefficient * x[t.position], prec)
    if isinstance(t, Combo):
        return csum((evaluate(c, x, prec) * w for w, c in t.terms), prec)
    if isinstance(t, Average):
        total = csum((evaluate(c, x, prec) for c in t.children), prec)
        return total / f_power(t.l, 1, prec) if t.l > 1 else total
    if isinstance(t, Special):
        total = csum((evaluate(c, x, prec) for c in t.children), prec)
        return total / f_power(t.k, Fraction(1, 2), prec) if t.k > 1 else total
    if isinstance(t, Restrict):
        return evaluate(t.child, restrict_any(x, t.interval), prec)
    raise TypeError(f"not a functional node: {t!r}")


def evaluate_symbolic(t: Functional, x: AnyVector) -> tuple[LogMonomial, ...]:
    """The exact value of ``t`` on ``x`` as a canonical sum of monomials."""
    coeffs = symbolic_coefficients(t)
    terms = []
    for pos, parts in coeffs.items():
        value = x[pos]
        if isinstance(value, Fraction) and value == 0:
            continue
        terms.extend(part * value for part in parts)
    return monomial_sum(terms)


def coefficients(t: Functional, prec: int | None = None) -> dict[int, CertScalar]:
    """The coordinate functional of ``t`` as position -> certified coefficient."""
    out: dict[int, CertScalar] = {}
    _collect(t, CertScalar.of(1, prec), None, out, prec)
    return {p: c for p, c in sorted(out.items()) if not (c.exact is not None and c.exact == 0)}


def _collect(t, scale, window, out, prec) -> None:
    if isinstance(t, Leaf):
        if window is None or t.position in window:
            term = scale * t.coefficient
            out[t.position] = out[t.position] + term if t.position in out else term
    elif isinstance(t, Combo):
        for w, c in t.terms:
            _collect(c, scale * w, window, out, prec)
    elif isinstance(t, Average):
        factor = scale / f_power(t.l, 1, prec) if t.l > 1 else scale
        for c in t.children:
            _collect(c, factor, window, out, prec)
    elif isinstance(t, Special):
        factor = scale / f_power(t.k, Fraction(1, 2), prec) if t.k > 1 else scale
        for c in t.children:
            _collect(c, factor, window, out, prec)
    elif isinstance(t, Restrict):
        inner = t.interval
        if window is not None:
            lo, hi = max(window.lo, inner.lo), min(window.hi, inner.hi)
            if lo > hi:
                return
            inner = IndexInterval(lo, hi)
        _collect(t.child, scale, inner, out, prec)
    else:
        raise TypeError(f"not a functional node: {t!r}")


def symbolic_coefficients(t: Functional) -> dict[int, tuple[LogMonomial, ...]]:
    """Position -> the exact monomial terms adding up to that coefficient."""
    out: dict[int, list[LogMonomial]] = {}
    _collect_symbolic(t, LogMonomial.rational(1), None, out)
    return {p: tuple(v) for p, v in sorted(out.items()) if any(m.scale != 0 for m in v)}


def _collect_symbolic(t, scale, window, out) -> None:
    if isinstance(t, Leaf):
        if window is None or t.position in window:
            out.setdefault(t.position, []).append(scale * t.coefficient)
    elif isinstance(t, Combo):
        for w, c in t.terms:
            _collect_symbolic(c, scale * w, window, out)
    elif isinstance(t, Average):
        factor = scale * LogMonomial.f_power(t.l, -1)
        for c in t.children:
            _collect_symbolic(c, factor, window, out)
    elif isinstance(t, Special):
        factor = scale * LogMonomial.f_power(t.k, Fraction(-1, 2))
        for c in t.children:
            _collect_symbolic(c, factor, window, out)
    elif isinstance(t, Restrict):
        inner = t.interval
        if window is not None:
            lo, hi = max(window.lo, inner.lo), min(window.hi, inner.hi)
            if lo > hi:
                return
            inner = IndexInterval(lo, hi)
        _collect_symbolic(t.child, scale, inner, out)
    else:
        raise TypeError(f"not a functional node: {t!r}")


def structural_support(t: Functional) -> frozenset[int]:
    """Positions a node can touch, ignoring cancellation between leaves."""
    if isinstance(t, Leaf):
        return frozenset() if t.coefficient == 0 else frozenset((t.position,))
    if isinstance(t, Combo):
        return frozenset().union(*(structural_support(c) for w, c in t.terms if w != 0))
    if isinstance(t, (Average, Special)):
        return frozenset().union(*(structural_support(c) for c in t.children))
    if isinstance(t, Restrict):
        return frozenset(p for p in structural_support(t.child) if p in t.interval)
    raise TypeError(f"not a functional node: {t!r}")


def node_count(t: Functional) -> int:
    if isinstance(t, Leaf):
        return 1
    if isinstance(t, Combo):
        return 1 + sum(node_count(c) for _, c in t.terms)
    if isinstance(t, (Average, Special)):
        return 1 + sum(node_count(c) for c in t.children)
    return 1 + node_count(t.child)


def uses_only_s_norm_rules(t: Functional) -> bool:
    """True when the tree has no special node."""
    if isinstance(t, Leaf):
        return True
    if isinstance(t, Combo):
        return all(uses_only_s_norm_rules(c) for _, c in t.terms)
    if isinstance(t, Average):
        return all(uses_only_s_norm_rules(c) for c in t.children)
    if isinstance(t, Restrict):
        return uses_only_s_norm_rules(t.child)
    return False


# serialization ----------------------------------------------------------


def to_json(t: Functional) -> dict:
    if isinstance(t, Leaf):
        return {"kind": "leaf", "position": t.position, "coefficient": format_rational(t.coefficient)}
    if isinstance(t, Combo):
        return {
            "kind": "combo",
            "terms": [{"weight": format_rational(w), "child": to_json(c)} for w, c in t.terms],
        }
    if isinstance(t, Average):
        return {"kind": "average", "l": t.l, "children": [to_json(c) for c in t.children]}
    if isinstance(t, Special):
        return {"kind": "special", "k": t.k, "children": [to_json(c) for c in t.children]}
    if isinstance(t, Restrict):
        return {"kind": "restrict", "lo": t.interval.lo, "hi": t.interval.hi, "child": to_json(t.child)}
    raise TypeError(f"not a functional node: {t!r}")


def from_json(data: dict) -> Functional:
    kind = data.get("kind")
    if kind == "leaf":
        return Leaf(int(data["position"]), parse_rational(data.get("coefficient", "1")))
    if kind == "combo":
        return Combo(tuple((parse_rational(t["weight"]), from_json(t["child"])) for t in data["terms"]))
    if kind == "average":
        children = tuple(from_json(c) for c in data["children"])
        return Average(int(data.get("l", len(children))), children)
    if kind == "special":
        children = tuple(from_json(c) for c in data["children"])
        return Special(int(data.get("k", len(children))), children)
    if kind == "restrict":
        return Restrict(IndexInterval(int(data["lo"]), int(data["hi"])), from_json(data["child"]))
    raise ValueError(f"unknown functional kind {kind!r}")


def canonical(t: Functional) -> str:
    """A canonical string form; equal trees give equal strings."""
    return json.dumps(to_json(t), sort_keys=True, separators=(",", ":"))
