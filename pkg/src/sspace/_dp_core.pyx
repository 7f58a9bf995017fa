# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interval-partition DP kernel; mirrors ``_dp_py.run_dp`` op for op."""

from cpython.array cimport array, clone
from libc.math cimport INFINITY, nextafter


def run_dp(alo_in, ahi_in, rlo_in, rhi_in):
    cdef Py_ssize_t n = len(alo_in)
    cdef Py_ssize_t nn = n * n
    cdef Py_ssize_t size = (n + 1) * nn
    cdef array dtemplate = array("d")
    cdef array itemplate = array("q")

    cdef array a_lo = array("d", alo_in)
    cdef array a_hi = array("d", ahi_in)
    cdef array r_lo = array("d", rlo_in)
    cdef array r_hi = array("d", rhi_in)
    cdef array mlo_a = clone(dtemplate, size, True)
    cdef array mhi_a = clone(dtemplate, size, True)
    cdef array split_a = clone(itemplate, size, False)
    cdef array choice_a = clone(itemplate, nn, True)
    cdef array supk_a = clone(itemplate, nn, True)
    cdef array suplo_a = clone(dtemplate, nn, True)
    cdef array suphi_a = clone(dtemplate, nn, True)

    cdef double[:] alo = a_lo
    cdef double[:] ahi = a_hi
    cdef double[:] rlo = r_lo
    cdef double[:] rhi = r_hi
    cdef double[:] mlo = mlo_a
    cdef double[:] mhi = mhi_a
    cdef long long[:] split = split_a
    cdef long long[:] choice = choice_a
    cdef long long[:] supk = supk_a
    cdef double[:] suplo = suplo_a
    cdef double[:] suphi = suphi_a

    cdef Py_ssize_t length, i, j, ij, l, m, prev, t, at, k, cm, chosen, idx
    cdef double slo, shi, best_lo, best_hi, chosen_hi, vlo, vhi, chi
    cdef double s_lo, s_hi, w_lo, w_hi

    for idx in range(size):
        split[idx] = -1

    for length in range(1, n + 1):
        for i in range(n - length + 1):
            j = i + length - 1
            ij = i * n + j
            if length == 1:
                slo = alo[i]
                shi = ahi[i]
                k = i
            else:
                slo = suplo[ij - 1]
                shi = suphi[ij - 1]
                k = supk[ij - 1]
                if alo[j] > slo:
                    slo = alo[j]
                if ahi[j] > shi:
                    shi = ahi[j]
                if alo[j] > ahi[k]:
                    k = j
            suplo[ij] = slo
            suphi[ij] = shi
            supk[ij] = k

            best_lo = slo
            best_hi = shi
            chosen = 0
            chosen_hi = ahi[k]
            for l in range(2, length + 1):
                prev = (l - 1) * nn + i * n
                vlo = -1.0
                vhi = -1.0
                cm = -1
                chi = -1.0
                for m in range(i + l - 2, j):
                    t = nn + (m + 1) * n + j
                    s_lo = nextafter(mlo[prev + m] + mlo[t], -INFINITY)
                    s_hi = nextafter(mhi[prev + m] + mhi[t], INFINITY)
                    if s_lo > vlo:
                        vlo = s_lo
                    if s_hi > vhi:
                        vhi = s_hi
                    if cm < 0 or s_lo > chi:
                        cm = m
                        chi = s_hi
                at = l * nn + ij
                mlo[at] = vlo
                mhi[at] = vhi
                split[at] = cm
                w_lo = nextafter(vlo * rlo[l], -INFINITY)
                w_hi = nextafter(vhi * rhi[l], INFINITY)
                if w_lo > best_lo:
                    best_lo = w_lo
                if w_hi > best_hi:
                    best_hi = w_hi
                if w_lo > chosen_hi:
                    chosen = l
                    chosen_hi = w_hi
            mlo[nn + ij] = best_lo
            mhi[nn + ij] = best_hi
            choice[ij] = chosen
    return mlo_a, mhi_a, split_a, choice_a, supk_a
