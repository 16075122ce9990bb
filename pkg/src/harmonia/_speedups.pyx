# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled iteration kernels; semantics are defined by ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()


def mean_value_iterate(const int[::1] indptr, const int[::1] indices, const double[::1] data,
                       free, u0, double tol, long max_iter):
    cdef Py_ssize_t n = u0.shape[0]
    cdef double[::1] u = np.array(u0, dtype=np.float64)
    cdef double[::1] nxt = np.array(u0, dtype=np.float64)
    cdef double[::1] deg = np.zeros(n, dtype=np.float64)
    cdef cnp.uint8_t[::1] fr = np.ascontiguousarray(free, dtype=np.uint8)
    cdef Py_ssize_t i, k
    cdef long sweeps = 0
    cdef double inc = INFINITY, acc, step
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k]
        deg[i] = acc
    with nogil:
        while sweeps < max_iter:
            inc = 0.0
            for i in range(n):
                if not fr[i]:
                    continue
                acc = 0.0
                for k in range(indptr[i], indptr[i + 1]):
                    acc += data[k] * u[indices[k]]
                nxt[i] = acc / deg[i]
                step = fabs(nxt[i] - u[i])
                if step > inc:
                    inc = step
            for i in range(n):
                if fr[i]:
                    u[i] = nxt[i]
            sweeps += 1
            if inc <= tol:
                break
    return np.asarray(u), sweeps, inc


cdef void _gemv(const double[:, ::1] a, const double[::1] x, double[::1] y) noexcept nogil:
    """``y = a @ x`` for a row-major ``a`` via BLAS (as the transpose of a column-major view)."""
    cdef int rows = <int>a.shape[0], cols = <int>a.shape[1], one = 1, r
    cdef double alpha = 1.0, beta = 0.0
    cdef char trans = b'T'
    if rows == 0:
        return
    if cols == 0:
        for r in range(rows):
            y[r] = 0.0
        return
    dgemv(&trans, &cols, &rows, &alpha, <double*>&a[0, 0], &cols, <double*>&x[0], &one,
          &beta, &y[0], &one)


def alternating_iterate(t21, mask2, fixed2, t12, mask1, fixed1, f1_init,
                        double tol, long max_iter, bint trace):
    rows2_arr = np.flatnonzero(mask2)
    rows1_arr = np.flatnonzero(mask1)
    # only the updated rows are ever multiplied
    cdef const double[:, ::1] a21 = np.ascontiguousarray(np.asarray(t21, dtype=np.float64)[rows2_arr])
    cdef const double[:, ::1] a12 = np.ascontiguousarray(np.asarray(t12, dtype=np.float64)[rows1_arr])
    cdef cnp.int64_t[::1] rows2 = rows2_arr.astype(np.int64)
    cdef cnp.int64_t[::1] rows1 = rows1_arr.astype(np.int64)
    cdef double[::1] f1 = np.array(f1_init, dtype=np.float64)
    cdef double[::1] f2 = np.where(mask2, 0.0, fixed2).astype(np.float64)
    cdef double[::1] y2 = np.zeros(rows2.shape[0], dtype=np.float64)
    cdef double[::1] y1 = np.zeros(rows1.shape[0], dtype=np.float64)
    cdef Py_ssize_t n1 = f1.shape[0], n2 = f2.shape[0]
    cdef Py_ssize_t r, i
    cdef long it = 0
    cdef double delta = INFINITY, min_step = INFINITY, d
    cdef double lo1, hi1, lo2, hi2
    cdef double[:, ::1] tr
    tr_arr = np.empty((max_iter if trace else 0, 5), dtype=np.float64)
    tr = tr_arr
    with nogil:
        while it < max_iter:
            delta = 0.0
            _gemv(a21, f1, y2)
            for r in range(rows2.shape[0]):
                i = rows2[r]
                d = y2[r] - f2[i]
                if fabs(d) > delta:
                    delta = fabs(d)
                if d < min_step:
                    min_step = d
                f2[i] = y2[r]
            _gemv(a12, f2, y1)
            for r in range(rows1.shape[0]):
                i = rows1[r]
                d = y1[r] - f1[i]
                if fabs(d) > delta:
                    delta = fabs(d)
                if d < min_step:
                    min_step = d
                f1[i] = y1[r]
            if trace:
                lo1 = INFINITY; hi1 = -INFINITY; lo2 = INFINITY; hi2 = -INFINITY
                for i in range(n1):
                    if f1[i] < lo1:
                        lo1 = f1[i]
                    if f1[i] > hi1:
                        hi1 = f1[i]
                for i in range(n2):
                    if f2[i] < lo2:
                        lo2 = f2[i]
                    if f2[i] > hi2:
                        hi2 = f2[i]
                tr[it, 0] = delta
                tr[it, 1] = lo1
                tr[it, 2] = hi1
                tr[it, 3] = lo2
                tr[it, 4] = hi2
            it += 1
            if delta <= tol:
                break
    return (np.asarray(f1), np.asarray(f2), it, delta, min_step,
            tr_arr[:it].copy() if trace else None)
