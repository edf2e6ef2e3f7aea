# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled zonal series kernel.

Same contract and arithmetic as the numpy fallback ``_zonal_np``; see
there for the interface documentation.  Points are processed in blocks
so the coefficient table is streamed once per block instead of once per
point; the per-point operation sequence matches the fallback exactly
(and the extension is compiled with FP contraction off), so both
backends produce identical bits.
"""

from libc.stdlib cimport free, malloc

import numpy as np

DEF BLOCK = 64


def zonal_sums(coeffs, t):
    """Legendre series sums and derivative sums at many points."""
    coeffs_arr = np.ascontiguousarray(coeffs, dtype=np.float64)
    t_arr = np.ascontiguousarray(t, dtype=np.float64)
    if coeffs_arr.ndim != 2 or t_arr.ndim != 1:
        raise ValueError("coeffs must be (m, j_max+1) and t must be 1-d")

    cdef double[:, ::1] cf = coeffs_arr
    cdef double[::1] tv = t_arr
    cdef Py_ssize_t m = cf.shape[0]
    cdef Py_ssize_t ncols = cf.shape[1]
    cdef Py_ssize_t n = tv.shape[0]

    s0_arr = np.zeros((m, n))
    s1_arr = np.zeros((m, n))
    cdef double[:, ::1] s0 = s0_arr
    cdef double[:, ::1] s1 = s1_arr

    # per-block state: 5 recurrence rows + 4 accumulator rows per series
    cdef double *work = <double *> malloc((5 + 4 * m) * BLOCK * sizeof(double))
    if work == NULL:
        raise MemoryError()
    cdef double *tb = work
    cdef double *pj = work + BLOCK
    cdef double *pj_prev = work + 2 * BLOCK
    cdef double *dpj = work + 3 * BLOCK
    cdef double *dpj_prev = work + 4 * BLOCK
    cdef double *acc0 = work + 5 * BLOCK
    cdef double *comp0 = acc0 + m * BLOCK
    cdef double *acc1 = comp0 + m * BLOCK
    cdef double *comp1 = acc1 + m * BLOCK

    cdef Py_ssize_t start, nb, q, j, i, base
    cdef double a, b, c, cij, term, y, tot, pn, dpn

    try:
        for start in range(0, n, BLOCK):
            nb = min(<Py_ssize_t> BLOCK, n - start)
            for q in range(nb):
                tb[q] = tv[start + q]
                pj_prev[q] = 0.0
                pj[q] = 1.0
                dpj_prev[q] = 0.0
                dpj[q] = 0.0
            for i in range(4 * m * BLOCK):
                acc0[i] = 0.0
            for j in range(ncols):
                a = <double> (2 * j + 1)
                b = <double> j
                c = <double> (j + 1)
                for i in range(m):
                    cij = cf[i, j]
                    base = i * BLOCK
                    for q in range(nb):
                        term = cij * pj[q]
                        y = term - comp0[base + q]
                        tot = acc0[base + q] + y
                        comp0[base + q] = (tot - acc0[base + q]) - y
                        acc0[base + q] = tot

                        term = cij * dpj[q]
                        y = term - comp1[base + q]
                        tot = acc1[base + q] + y
                        comp1[base + q] = (tot - acc1[base + q]) - y
                        acc1[base + q] = tot
                for q in range(nb):
                    pn = ((tb[q] * pj[q]) * a - pj_prev[q] * b) / c
                    dpn = pj[q] * a + dpj_prev[q]
                    pj_prev[q] = pj[q]
                    pj[q] = pn
                    dpj_prev[q] = dpj[q]
                    dpj[q] = dpn
            for i in range(m):
                base = i * BLOCK
                for q in range(nb):
                    s0[i, start + q] = acc0[base + q]
                    s1[i, start + q] = acc1[base + q]
    finally:
        free(work)

    return s0_arr, s1_arr
