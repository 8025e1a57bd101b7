# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: small complex Cholesky factorizations.

Hot path of the Monte Carlo sweep is one K x K Cholesky of (I + gamma*G)
per (trial, SNR) pair.  K is small (7 in the reference experiments), so a
tight nogil loop beats per-call LAPACK dispatch by a wide margin.  API
mirrors `_kernels_py`; failures are signalled with NaN.
"""

import numpy as np

from libc.math cimport NAN, log, sqrt

ctypedef double complex zdouble

# pivots that collapse below this fraction of their column's original
# diagonal signal a numerically singular matrix (rank loss eaten by rounding)
cdef double _REL_PIVOT_FLOOR = 1e-13


cdef int _chol_lower(zdouble[:, ::1] a, Py_ssize_t k) noexcept nogil:
    """In-place lower-triangular Cholesky; -1 on a failed pivot."""
    cdef Py_ssize_t i, j, p
    cdef zdouble s
    cdef double piv, orig
    for j in range(k):
        orig = a[j, j].real
        if not orig > 0.0:
            return -1
        s = a[j, j]
        for p in range(j):
            s = s - a[j, p] * a[j, p].conjugate()
        piv = s.real
        if not piv > _REL_PIVOT_FLOOR * orig:
            return -1
        piv = sqrt(piv)
        a[j, j] = piv
        for i in range(j + 1, k):
            s = a[i, j]
            for p in range(j):
                s = s - a[i, p] * a[j, p].conjugate()
            a[i, j] = s / piv
    return 0


cdef double _logdet_from_chol(zdouble[:, ::1] ell, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(k):
        acc += log(ell[i, i].real)
    return 2.0 * acc


cdef void _inv_diag_from_chol(zdouble[:, ::1] ell, Py_ssize_t k,
                              zdouble[::1] work,
                              double[:, :, ::1] out,
                              Py_ssize_t t, Py_ssize_t j) noexcept nogil:
    """out[t, j, c] = [(L L^H)^{-1}]_{cc} = ||L^{-1} e_c||^2."""
    cdef Py_ssize_t c, i, p
    cdef zdouble s
    cdef double acc
    for c in range(k):
        acc = 0.0
        for i in range(c, k):
            if i == c:
                s = 1.0
            else:
                s = 0.0
            for p in range(c, i):
                s = s - ell[i, p] * work[p]
            work[i] = s / ell[i, i]
            acc += work[i].real * work[i].real + work[i].imag * work[i].imag
        out[t, j, c] = acc


def logdet_hpd(a):
    """ln det of a Hermitian positive definite matrix, NaN on failure."""
    buf = np.array(a, dtype=np.complex128, order="C", copy=True)
    cdef zdouble[:, ::1] m = buf
    cdef Py_ssize_t k = m.shape[0]
    cdef double out
    with nogil:
        if _chol_lower(m, k) != 0:
            out = NAN
        else:
            out = _logdet_from_chol(m, k)
    return out


def regularized_inverse(g, double gamma):
    """Inverse of (I + gamma * g) for Hermitian PSD g and gamma >= 0."""
    gm = np.ascontiguousarray(g, dtype=np.complex128)
    cdef zdouble[:, ::1] G = gm
    cdef Py_ssize_t k = G.shape[0]
    a = np.empty((k, k), dtype=np.complex128)
    inv = np.empty((k, k), dtype=np.complex128)
    y = np.empty(k, dtype=np.complex128)
    cdef zdouble[:, ::1] A = a
    cdef zdouble[:, ::1] X = inv
    cdef zdouble[::1] Y = y
    cdef Py_ssize_t r, c, i, p
    cdef zdouble s
    cdef int fail = 0
    with nogil:
        for r in range(k):
            for c in range(k):
                A[r, c] = gamma * G[r, c]
            A[r, r] = A[r, r] + 1.0
        if _chol_lower(A, k) != 0:
            fail = 1
        else:
            # solve A x = e_c column by column: forward then adjoint-back
            for c in range(k):
                for i in range(k):
                    if i == c:
                        s = 1.0
                    else:
                        s = 0.0
                    for p in range(i):
                        s = s - A[i, p] * Y[p]
                    Y[i] = s / A[i, i]
                for i in range(k - 1, -1, -1):
                    s = Y[i]
                    for p in range(i + 1, k):
                        s = s - A[p, i].conjugate() * X[p, c]
                    X[i, c] = s / A[i, i].real
    if fail:
        raise ArithmeticError("I + gamma*G is not positive definite")
    return inv


def sweep_metrics(grams_in, gammas_in):
    """Per-trial factorization primitives over an SNR grid.

    See `_kernels_py.sweep_metrics` for the shared contract.
    """
    grams = np.ascontiguousarray(grams_in, dtype=np.complex128)
    gammas = np.ascontiguousarray(gammas_in, dtype=np.float64)
    if grams.ndim != 3 or grams.shape[1] != grams.shape[2]:
        raise ValueError("grams must have shape (n, k, k)")
    cdef zdouble[:, :, ::1] G = grams
    cdef double[::1] gam = gammas
    cdef Py_ssize_t n = G.shape[0], k = G.shape[1], m = gam.shape[0]

    logdet_gram = np.empty(n)
    inv_diag = np.empty((n, m, k))
    logdet_reg = np.empty((n, m))
    a = np.empty((k, k), dtype=np.complex128)
    work = np.empty(k, dtype=np.complex128)
    cdef double[::1] ldg = logdet_gram
    cdef double[:, :, ::1] dia = inv_diag
    cdef double[:, ::1] ldr = logdet_reg
    cdef zdouble[:, ::1] A = a
    cdef zdouble[::1] W = work
    cdef Py_ssize_t t, j, r, c
    cdef double gj

    with nogil:
        for t in range(n):
            for r in range(k):
                for c in range(k):
                    A[r, c] = G[t, r, c]
            if _chol_lower(A, k) != 0:
                ldg[t] = NAN
            else:
                ldg[t] = _logdet_from_chol(A, k)
            for j in range(m):
                gj = gam[j]
                for r in range(k):
                    for c in range(k):
                        A[r, c] = gj * G[t, r, c]
                    A[r, r] = A[r, r] + 1.0
                if _chol_lower(A, k) != 0:
                    ldr[t, j] = NAN
                    for c in range(k):
                        dia[t, j, c] = NAN
                else:
                    ldr[t, j] = _logdet_from_chol(A, k)
                    _inv_diag_from_chol(A, k, W, dia, t, j)
    return logdet_gram, inv_diag, logdet_reg
