# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled series accumulation kernel."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def accumulate_terms(weights, coeffs, multi):
    """out[m] = sum_t weights[t] * prod_i coeffs[t, i, multi[m, i]]."""
    cdef double complex[::1] w = np.ascontiguousarray(weights, dtype=np.complex128)
    cdef double[:, :, ::1] cf = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef long long[:, ::1] mi = np.ascontiguousarray(multi, dtype=np.int64)
    cdef Py_ssize_t T = w.shape[0]
    cdef Py_ssize_t M = mi.shape[0]
    cdef Py_ssize_t n = mi.shape[1]
    out = np.zeros(M, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t t, m, i
    cdef double p
    cdef double complex acc
    for m in range(M):
        acc = 0
        for t in range(T):
            p = 1.0
            for i in range(n):
                p *= cf[t, i, mi[m, i]]
                if p == 0.0:
                    break
            if p != 0.0:
                acc = acc + w[t] * p
        o[m] = acc
    return out
