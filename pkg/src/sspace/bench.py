"""Timing of the partition DP: compiled kernel against the pure-Python twin.

The DP is O(n^4) in the support size, so between sizes n1 < n2 the time may
grow by at most (n2/n1)^4, with a factor 3 of slack for noise.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction
from typing import Sequence

from . import _dp
from .snorm import PartitionTable, norm_S
from .vectors import FiniteVector

SIZES = (10, 20, 40, 60)
SLACK = 3


def sample_vector(n: int, seed: int = 0) -> FiniteVector:
    rng = random.Random(seed * 1000 + n)
    return FiniteVector.from_list([Fraction(rng.randint(1, 99), rng.randint(1, 99)) for _ in range(n)])


def _best_time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def kernels() -> dict:
    out = {"python": _dp.run_dp_python}
    if _dp.run_dp_compiled is not None:
        out["cython"] = _dp.run_dp_compiled
    return out


def run(sizes: Sequence[int] = SIZES, repeats: int = 3, seed: int = 0, python_limit: int = 60, full_norm: bool = True) -> dict:
    """Kernel timings per backend, the end-to-end norm time, and the scaling verdicts."""
    rows = []
    for n in sizes:
        x = sample_vector(n, seed)
        row = {"n": n}
        for name, kernel in kernels().items():
            if name == "python" and n > python_limit:
                row[name] = None
                continue
            row[name] = _best_time(lambda: PartitionTable.build(x, kernel), repeats)
        if full_norm:
            row["norm_S"] = _best_time(lambda: norm_S(x), 1)
        rows.append(row)
    scaling = []
    for name in kernels():
        timed = [(r["n"], r[name]) for r in rows if r.get(name)]
        for (n1, t1), (n2, t2) in zip(timed, timed[1:]):
            allowed = SLACK * (n2 / n1) ** 4
            scaling.append({"backend": name, "from": n1, "to": n2, "ratio": t2 / t1, "allowed": allowed, "holds": t2 / t1 <= allowed})
    return {"backend": _dp.BACKEND, "rows": rows, "scaling": scaling, "all_hold": all(s["holds"] for s in scaling)}


def format_table(report: dict) -> str:
    names = list(kernels()) + (["norm_S"] if report["rows"] and "norm_S" in report["rows"][0] else [])
    lines = ["n".rjust(4) + "".join(name.rjust(14) for name in names)]
    for row in report["rows"]:
        cells = ["-" if row.get(name) is None else f"{row[name]:.6f}" for name in names]
        lines.append(str(row["n"]).rjust(4) + "".join(c.rjust(14) for c in cells))
    for s in report["scaling"]:
        mark = "ok" if s["holds"] else "FAIL"
        lines.append(f"{s['backend']} n={s['from']}->{s['to']}: x{s['ratio']:.2f} (allowed x{s['allowed']:.1f}) {mark}")
    return "\n".join(lines)


if __name__ == "__main__":
    print(format_table(run()))
