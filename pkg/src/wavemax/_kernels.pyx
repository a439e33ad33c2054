# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels (see ``_pure`` for the reference semantics).

The cubic products go through the BLAS that scipy links against; the
elementwise reductions around them are fused here so no ``(n_angles*n, n)``
temporaries beyond one product buffer are allocated.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

cdef double GOLDEN = 0.5 * (sqrt(5.0) - 1.0)


def diag_traces(const double complex[:, ::1] stacked, const double complex[:, ::1] Z):
    cdef int rows = stacked.shape[0]
    cdef int n = stacked.shape[1]
    if Z.shape[0] != n or Z.shape[1] != n:
        raise ValueError("Z shape does not match the sampling stack")
    prod_arr = np.empty((rows, n), dtype=np.complex128)
    cdef double complex[:, ::1] prod = prod_arr
    out_arr = np.empty(rows, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double complex one = 1.0, zero = 0.0
    cdef char transa = b'N', transb = b'N'
    cdef int r, j
    cdef double complex acc, f
    if rows == 0:
        return out_arr
    # row-major prod = stacked @ Z  <=>  column-major prod^T = Z^T stacked^T
    zgemm(&transa, &transb, &n, &rows, &n, &one,
          <double complex*> &Z[0, 0], &n,
          <double complex*> &stacked[0, 0], &n,
          &zero, &prod[0, 0], &n)
    for r in range(rows):
        acc = 0
        for j in range(n):
            f = stacked[r, j]
            acc = acc + prod[r, j] * (f.real - 1j * f.imag)
        out[r] = acc
    return out_arr


def weighted_gram(const double complex[:, ::1] stacked, const double complex[::1] g):
    cdef int rows = stacked.shape[0]
    cdef int n = stacked.shape[1]
    if g.shape[0] != rows:
        raise ValueError("weight length does not match the sampling stack")
    q_arr = np.empty((rows, n), dtype=np.complex128)
    cdef double complex[:, ::1] q = q_arr
    out_arr = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex one = 1.0, zero = 0.0
    cdef char transa = b'N', transb = b'C'
    cdef int r, j
    cdef double complex w
    if rows == 0:
        return out_arr
    for r in range(rows):
        w = g[r]
        for j in range(n):
            q[r, j] = w * stacked[r, j]
    # row-major out = stacked^H q  <=>  column-major out^T = q^T conj(stacked)
    zgemm(&transa, &transb, &n, &n, &rows, &one,
          &q[0, 0], &n,
          <double complex*> &stacked[0, 0], &n,
          &zero, &out[0, 0], &n)
    return out_arr


cdef inline double _modulus_sq(const double complex[:, ::1] h, Py_ssize_t c, double b) nogil:
    cdef Py_ssize_t k, n = h.shape[1]
    cdef double re = 0.0, im = 0.0, cb, sb, hr, hi, ang
    for k in range(n):
        ang = b * k
        cb = cos(ang)
        sb = sin(ang)
        hr = h[c, k].real
        hi = h[c, k].imag
        # h * exp(-i b k)
        re += hr * cb + hi * sb
        im += hi * cb - hr * sb
    return re * re + im * im


def refine_modulation(const double complex[:, ::1] h, lo, hi, double tol):
    cdef Py_ssize_t count = h.shape[0]
    cdef double[::1] lo_v = np.ascontiguousarray(lo, dtype=np.float64)
    cdef double[::1] hi_v = np.ascontiguousarray(hi, dtype=np.float64)
    best_b = np.empty(count, dtype=np.float64)
    best_f = np.empty(count, dtype=np.float64)
    cdef double[::1] bb = best_b
    cdef double[::1] bf = best_f
    cdef Py_ssize_t c
    cdef double a, b, x1, x2, f1, f2, mid
    with nogil:
        for c in range(count):
            a = lo_v[c]
            b = hi_v[c]
            x1 = b - GOLDEN * (b - a)
            x2 = a + GOLDEN * (b - a)
            f1 = _modulus_sq(h, c, x1)
            f2 = _modulus_sq(h, c, x2)
            while b - a > tol:
                if f1 > f2:
                    b = x2
                    x2 = x1
                    f2 = f1
                    x1 = b - GOLDEN * (b - a)
                    f1 = _modulus_sq(h, c, x1)
                else:
                    a = x1
                    x1 = x2
                    f1 = f2
                    x2 = a + GOLDEN * (b - a)
                    f2 = _modulus_sq(h, c, x2)
            mid = 0.5 * (a + b)
            bb[c] = mid
            bf[c] = _modulus_sq(h, c, mid)
    return best_b, best_f
