"""Pure-Python interval-partition DP kernel.

Same operation order as the Cython kernel in ``_dp_core.pyx``, so both give
bit-identical tables.  All quantities are nonnegative and every sum and product
is widened one ulp outward, so each table entry is a certified enclosure.

Table layout (0-based, ``nn = n * n``):
  ``mlo/mhi[l * nn + i * n + j]``  best l-piece sum over ``[i, j]``; the ``l = 1``
                                   slot holds the norm of ``x`` restricted to ``[i, j]``
  ``split[l * nn + i * n + j]``    last-piece start minus one for the chosen split
  ``choice[i * n + j]``            0 for the sup-norm branch, else the chosen piece count
  ``supk[i * n + j]``              index of the chosen largest coordinate
"""

from __future__ import annotations

from math import inf, nextafter


def run_dp(alo, ahi, rlo, rhi):
    n = len(alo)
    nn = n * n
    mlo = [0.0] * ((n + 1) * nn)
    mhi = [0.0] * ((n + 1) * nn)
    split = [-1] * ((n + 1) * nn)
    choice = [0] * nn
    supk = [0] * nn
    suplo = [0.0] * nn
    suphi = [0.0] * nn

    for length in range(1, n + 1):
        for i in range(n - length + 1):
            j = i + length - 1
            ij = i * n + j
            if length == 1:
                slo, shi, k = alo[i], ahi[i], i
            else:
                slo, shi, k = suplo[ij - 1], suphi[ij - 1], supk[ij - 1]
                if alo[j] > slo:
                    slo = alo[j]
                if ahi[j] > shi:
                    shi = ahi[j]
                if alo[j] > ahi[k]:
                    k = j
            suplo[ij], suphi[ij], supk[ij] = slo, shi, k

            best_lo, best_hi = slo, shi
            chosen, chosen_hi = 0, ahi[k]
            for l in range(2, length + 1):
                prev = (l - 1) * nn + i * n
                vlo = vhi = -1.0
                cm, chi = -1, -1.0
                for m in range(i + l - 2, j):
                    t = nn + (m + 1) * n + j
                    s_lo = nextafter(mlo[prev + m] + mlo[t], -inf)
                    s_hi = nextafter(mhi[prev + m] + mhi[t], inf)
                    if s_lo > vlo:
                        vlo = s_lo
                    if s_hi > vhi:
                        vhi = s_hi
                    if cm < 0 or s_lo > chi:
                        cm, chi = m, s_hi
                at = l * nn + ij
                mlo[at], mhi[at], split[at] = vlo, vhi, cm
                w_lo = nextafter(vlo * rlo[l], -inf)
                w_hi = nextafter(vhi * rhi[l], inf)
                if w_lo > best_lo:
                    best_lo = w_lo
                if w_hi > best_hi:
                    best_hi = w_hi
                if w_lo > chosen_hi:
                    chosen, chosen_hi = l, w_hi
            mlo[nn + ij], mhi[nn + ij] = best_lo, best_hi
            choice[ij] = chosen
    return mlo, mhi, split, choice, supk
