# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: row-wise dot products and signed scatter-add."""

import numpy as np

cimport numpy as cnp


def dot_scores(double[:, ::1] mat, double[::1] q):
    cdef Py_ssize_t n = mat.shape[0]
    cdef Py_ssize_t d = mat.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(d):
            acc += mat[i, j] * q[j]
        ov[i] = acc
    return out


def signed_accumulate(Py_ssize_t dim, long long[::1] idx, double[::1] contrib):
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(dim, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = idx.shape[0]
    for i in range(n):
        ov[idx[i]] += contrib[i]
    return out
