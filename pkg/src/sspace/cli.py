"""Command-line front end.

Every command prints one JSON document (sorted keys) on stdout.  The exit
status is 1 when an asserted check fails, 2 on bad input, and 0 otherwise;
report-only items never change it.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import bench
from .arith import PRECISION_ENV, CertScalar, format_rational, parse_rational
from .aux_norms import (
    constant_Cpq,
    delta_eps_for_eta,
    delta_lower_estimate,
    dual_coefficient_check,
    extremal_xL,
    norm_g,
    triple_norm_g,
)
from .epsilons import EpsSequence
from .functionals import evaluate, from_json as functional_from_json, symbolic_coefficients
from .gm import DEFAULT_EPS, GMParams, _standard_conditions, check_ris_arithmetic, even_toy_J, gm_norm, validate_certificate, validate_params
from .intertwine import IntertwinedConstruction, build_construction, check_E65, check_E69, ratio_report
from .snorm import norm_l, norm_S
from .vectors import FiniteVector, MonomialVector
from .yardstick import audit_lemma_1_12, audit_lemma_1_13, build_yardstick, is_admissible

LEMMAS = ("1.3", "1.4", "1.6", "1.7", "1.9", "1.10", "1.12", "1.13", "2.1", "2.5", "4.3.1", "6.5", "6.9")
REPORT_ONLY = {"1.12", "1.13"}
CONSTRUCTION_J = 1728


class InputError(ValueError):
    pass


def emit(doc) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


# input ---------------------------------------------------------------------------


def _read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def load_vector(path: str) -> FiniteVector:
    if path.endswith(".csv"):
        lines = Path(path).read_text().splitlines()
        entries = []
        for lineno, line in enumerate(lines, start=1):
            cells = [c.strip() for c in line.split(",")]
            if not line.strip() or cells[0] == "position":
                continue
            if len(cells) != 2:
                raise InputError(f"{path}: line {lineno}: expected position,value")
            entries.append((lineno, cells))
        data = {"entries": [cells for _, cells in entries]}
        where = [f"line {lineno}" for lineno, _ in entries]
    else:
        data = _read_json(path)
        if not isinstance(data, dict) or not isinstance(data.get("entries"), list):
            raise InputError(f"{path}: expected an object with an \"entries\" list")
        where = [f"entries[{i}]" for i in range(len(data["entries"]))]
    last = 0
    for i, item in enumerate(data["entries"]):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise InputError(f"{path}: {where[i]}: expected [position, \"p/q\"]")
        try:
            pos = int(item[0])
            parse_rational(item[1])
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"{path}: {where[i]}: {exc}") from exc
        if pos <= last:
            raise InputError(f"{path}: {where[i]}: position {pos} is not strictly increasing")
        last = pos
    return FiniteVector.from_json(data)


def load_params(path: str | None, mode: str | None = None) -> GMParams:
    if path is None:
        if mode == "toy":
            return GMParams.toy(even_toy_J(CONSTRUCTION_J))
        return GMParams.strict()
    data = _read_json(path)
    if mode is not None:
        data = {**data, "mode": mode}
    try:
        return GMParams.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise InputError(f"expected comma-separated integers, got {text!r}") from exc


# commands ------------------------------------------------------------------------


def cmd_norm(args) -> int:
    x = load_vector(args.vector)
    if args.space == "S":
        result = norm_S(x, args.precision)
        emit(result.to_json(args.with_certificate))
        return 0
    p = load_params(args.params, args.mode)
    emit(gm_norm(x, p, args.precision).to_json(args.with_certificate))
    return 0


def cmd_yardstick(args) -> int:
    ms = _ints(args.ms)
    if args.action == "admissible":
        emit(is_admissible(ms).to_json())
        return 0
    y = build_yardstick(ms, require_admissible=not args.relaxed)
    doc = {
        "ms": ms,
        "levels": list(y.levels),
        "vector": y.vector.to_json(),
        "norm_S": norm_S(y.vector, args.precision).value.to_json() if len(y.levels) <= 64 else None,
    }
    if args.out:
        Path(args.out).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    emit(doc)
    return 0


def cmd_admissible(args) -> int:
    emit(is_admissible(_ints(args.ms)).to_json())
    return 0


def cmd_certify(args) -> int:
    p = load_params(args.params)
    try:
        tree = functional_from_json(_read_json(args.cert))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.cert}: {exc}") from exc
    verdict = validate_certificate(tree, p, args.precision)
    doc = verdict.to_json()
    if args.vector:
        doc["value"] = evaluate(tree, load_vector(args.vector), args.precision).to_json()
    emit(doc)
    return 0


def cmd_intertwine(args) -> int:
    if args.action == "build":
        p = load_params(args.params, "toy")
        c = build_construction(p, n_count=args.n, D=parse_rational(args.D), first_q=args.first_q)
        doc = c.to_json()
        if args.out:
            Path(args.out).write_text(json.dumps(doc, sort_keys=True) + "\n")
            emit({"out": args.out, "n_count": c.n_count, "sizes": [list(s) for s in c.sizes], "families": len(c.families)})
        else:
            emit(doc)
        return 0
    c = IntertwinedConstruction.from_json(_read_json(args.construction))
    if args.which == "E65":
        report = check_E65(c, args.precision)
        emit(report)
        return 0 if report["all_hold"] else 1
    if args.which == "E69":
        report = _e69_all(c, args.m or c.n_count, args.precision)
        emit(report)
        return 0 if report["all_hold"] else 1
    emit(ratio_report(c, args.m or 1, args.precision))
    return 0


def cmd_bench(args) -> int:
    sizes = _ints(args.sizes) if args.sizes else bench.SIZES
    report = bench.run(sizes, args.repeats, args.seed)
    if args.format == "table":
        print(bench.format_table(report))
    else:
        emit(report)
    return 0 if report["all_hold"] else 1


# verification --------------------------------------------------------------------


def random_corpus(n: int, seed: int, max_support: int = 6, span: int = 12) -> list[FiniteVector]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        k = rng.randint(1, max_support)
        positions = sorted(rng.sample(range(1, span + 1), k))
        values = [Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9)) for _ in positions]
        out.append(FiniteVector.from_map(dict(zip(positions, values))))
    return out


def _not_above(a: CertScalar, b: CertScalar) -> bool:
    """No certified violation of a <= b."""
    return a.lo_q <= b.hi_q


def _check_vector(lemma: str, x: FiniteVector, prec: int | None) -> bool:
    if lemma in ("1.3", "1.4"):
        whole = norm_S(x, prec).value
        parts = [norm_l(x, l, prec) for l in range(2, len(x) + 1)]
        if lemma == "1.3":
            from .arith import f_power

            return all(
                _not_above(whole / f_power(l, 1, prec), part) and _not_above(part, whole)
                for l, part in zip(range(2, len(x) + 1), parts)
            )
        sup = CertScalar.of(x.sup_norm(), prec)
        best = max([sup, *parts], key=lambda c: c.hi_q)
        return _not_above(whole, best) and all(_not_above(p, whole) for p in [sup, *parts])
    if lemma == "1.6":
        lhs = triple_norm_g(x, 2, prec)
        return _not_above(lhs, constant_Cpq(1, 2, prec=prec) * norm_g(x, 1, prec))
    if lemma == "1.9":
        cert = norm_S(x, prec).certificate
        return dual_coefficient_check(list(symbolic_coefficients(cert).values()), prec).ok
    if lemma == "1.10":
        return _not_above(norm_S(x, prec).value, triple_norm_g(x, 1, prec))
    raise KeyError(lemma)


def _corpus_task(job) -> bool:
    lemma, entries, prec = job
    return _check_vector(lemma, FiniteVector.from_json({"entries": entries}), prec)


def _corpus_report(lemma: str, args) -> dict:
    corpus = random_corpus(args.n, args.seed)
    jobs = [(lemma, x.to_json()["entries"], args.precision) for x in corpus]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            verdicts = list(pool.map(_corpus_task, jobs))
    else:
        verdicts = [_corpus_task(j) for j in jobs]
    enclosures = []
    if lemma == "1.6":
        enclosures.append({"C(1,2)": constant_Cpq(1, 2, prec=args.precision).to_json()})
        xL = extremal_xL(1, 5, args.precision)
        unit = norm_g([c for _, c in xL], 1, args.precision)
        verdicts.append(unit.contains(1))
        enclosures.append({"norm_f(x^(5))": unit.to_json()})
    failures = [i for i, ok in enumerate(verdicts) if not ok]
    return {
        "lemma": lemma,
        "inputs": {"corpus": "random", "n": args.n, "seed": args.seed},
        "verdicts": verdicts,
        "enclosures": enclosures,
        "failures": failures,
        "passed": not failures,
        "asserted": True,
    }


def _e69_all(c: IntertwinedConstruction, m_max: int, prec) -> dict:
    rows = []
    for m in range(1, m_max + 1):
        for indices in itertools.combinations(range(1, c.n_count + 1), m):
            for signs in itertools.product((1, -1), repeat=m):
                rows.append(check_E69(c, signs, indices, prec))
    return {"rows": rows, "count": len(rows), "all_hold": all(r["holds"] for r in rows)}


def _construction(args) -> IntertwinedConstruction:
    if args.construction:
        return IntertwinedConstruction.from_json(_read_json(args.construction))
    return build_construction(load_params(args.params, "toy"), n_count=3)


def _eps(args) -> EpsSequence:
    try:
        return EpsSequence.parse(args.eps_spec or DEFAULT_EPS)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def verify(args) -> dict:
    lemma = args.lemma
    prec = args.precision
    if lemma in ("1.3", "1.4", "1.6", "1.9", "1.10"):
        return _corpus_report(lemma, args)
    if lemma == "1.7":
        eta = parse_rational(args.eps or "1/2")
        eps = delta_eps_for_eta(1, 2, eta, prec)
        estimate = delta_lower_estimate(1, 2, eps, dim=4, mesh=6, prec=prec)
        ok = estimate.lo_q <= eta
        return {"lemma": lemma, "inputs": {"p": "1", "q": "2", "eta": format_rational(eta)}, "verdicts": [ok],
                "enclosures": [{"eps": format_rational(eps)}, {"delta_lower_estimate": estimate.to_json()}],
                "passed": ok, "asserted": True}
    if lemma == "1.12":
        report = audit_lemma_1_12(args.k or 3, args.m or 12, eps=parse_rational(args.eps or "1/2"), prec=prec)
        return {**report, "passed": True, "asserted": False}
    if lemma == "1.13":
        ms = _ints(args.ms) if args.ms else [2, 4, 48]
        report = audit_lemma_1_13(_eps(args), ms, prec)
        return {**report, "passed": True, "asserted": False}
    if lemma == "2.1":
        verdicts = _standard_conditions(_eps(args), prec)
        ok = all(v["holds"] is not False for v in verdicts)
        return {"lemma": lemma, "inputs": {"eps": _eps(args).label or DEFAULT_EPS}, "verdicts": verdicts,
                "enclosures": [], "passed": ok, "asserted": True}
    if lemma == "2.5":
        p = load_params(args.params, args.mode)
        report = validate_params(p, prec)
        picked = [v for v in report["verdicts"] if v["name"].startswith("2.5")]
        ok = all(v["holds"] is not False for v in picked)
        return {"lemma": lemma, "inputs": {"mode": p.mode}, "verdicts": picked, "enclosures": [],
                "passed": ok, "asserted": True}
    if lemma == "4.3.1":
        p = load_params(args.params, "toy")
        count = args.n if args.n and args.n <= 8 else 3
        xs = [FiniteVector.unit(i) for i in range(1, count + 1)]
        asserted = args.ks is not None
        ks = _ints(args.ks) if asserted else [p.j(2 * i - 1) for i in range(1, count + 1)]
        if len(ks) != count:
            xs = [FiniteVector.unit(i) for i in range(1, len(ks) + 1)]
        report = check_ris_arithmetic(xs, ks, p, prec=prec)
        return {"lemma": lemma, **report, "passed": report["all_hold"] or not asserted, "asserted": asserted}
    if lemma == "6.5":
        report = check_E65(_construction(args), prec)
        return {"lemma": lemma, **report, "passed": report["all_hold"], "asserted": True}
    if lemma == "6.9":
        c = _construction(args)
        report = _e69_all(c, c.n_count, prec)
        return {"lemma": lemma, **report, "passed": report["all_hold"], "asserted": True}
    raise InputError(f"unknown lemma id {lemma!r}; choose from {', '.join(LEMMAS)}")


def cmd_verify(args) -> int:
    report = verify(args)
    emit(report)
    return 1 if report["asserted"] and not report["passed"] else 0


# parser --------------------------------------------------------------------------


def _add_verify_options(sp) -> None:
    sp.add_argument("--corpus", choices=["random"], default="random")
    sp.add_argument("--n", type=int, default=100, help="corpus size")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1, help="worker processes for corpora")
    sp.add_argument("--eps-spec", help="epsilon sequence such as '2^-(n+2)^2'")
    sp.add_argument("--k", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--eps", help="a rational epsilon (1.12) or eta (1.7)")
    sp.add_argument("--ms", help="comma-separated sequence")
    sp.add_argument("--ks", help="comma-separated k_n for 4.3.1; asserted when given")
    sp.add_argument("--params")
    sp.add_argument("--mode", choices=["strict", "toy"])
    sp.add_argument("--construction")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sspace", description=__doc__.splitlines()[0])
    parser.add_argument("--precision", type=int, default=None, help=f"working precision in bits (default: ${PRECISION_ENV} or 64)")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("norm", help="norm of a vector in S or GM")
    sp.add_argument("--space", choices=["S", "GM"], default="S")
    sp.add_argument("--mode", choices=["strict", "toy"])
    sp.add_argument("--params")
    sp.add_argument("--vector", required=True)
    sp.add_argument("--with-certificate", action="store_true")
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("yardstick", help="build yardstick vectors or test admissibility")
    sp.add_argument("action", choices=["build", "admissible"])
    sp.add_argument("--ms", required=True)
    sp.add_argument("--out")
    sp.add_argument("--relaxed", action="store_true", help="only require the divisibility used by spreading")
    sp.set_defaults(func=cmd_yardstick)

    sp = sub.add_parser("admissible", help="admissibility report for a sequence")
    sp.add_argument("--ms", required=True)
    sp.set_defaults(func=cmd_admissible)

    sp = sub.add_parser("certify", help="validate a functional tree and evaluate it")
    sp.add_argument("--params")
    sp.add_argument("--cert", required=True)
    sp.add_argument("--vector")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("verify", help="run a lemma checker")
    sp.add_argument("--lemma", required=True)
    _add_verify_options(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("lemma", help="alias: lemma audit --id ID")
    sp.add_argument("action", choices=["audit"])
    sp.add_argument("--id", dest="lemma", required=True)
    _add_verify_options(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("intertwine", help="build or check an intertwined construction")
    sp.add_argument("action", choices=["build", "check"])
    sp.add_argument("--params")
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--D", default="1")
    sp.add_argument("--first-q", type=int, default=3)
    sp.add_argument("--out")
    sp.add_argument("--construction")
    sp.add_argument("--which", choices=["E65", "E69", "ratio"], default="E65")
    sp.add_argument("--m", type=int)
    sp.set_defaults(func=cmd_intertwine)

    sp = sub.add_parser("bench", help="DP timing, compiled against pure Python")
    sp.add_argument("--sizes")
    sp.add_argument("--repeats", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=["json", "table"], default="table")
    sp.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.precision is not None:
        if args.precision < 24:
            parser.error("--precision must be at least 24 bits")
        os.environ[PRECISION_ENV] = str(args.precision)
    if args.command == "intertwine" and args.action == "check" and not args.construction:
        parser.error("intertwine check needs --construction")
    try:
        return args.func(args)
    except InputError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
