# cython: language_level=3
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, NAN

cnp.import_array()

BACKEND = "cython"


def chain_decompose(x):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t i, j, k
    cdef cnp.int64_t key
    perm_arr = np.empty(n, dtype=np.int64)
    lam_arr = np.empty(n + 1, dtype=np.float64)
    mask_arr = np.empty(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] perm = perm_arr
    cdef double[::1] lam = lam_arr
    cdef cnp.int64_t[::1] masks = mask_arr
    # insertion sort: stable, decreasing value, ties keep ascending index
    for i in range(n):
        perm[i] = i
    for i in range(1, n):
        key = perm[i]
        j = i - 1
        while j >= 0 and xv[perm[j]] < xv[key]:
            perm[j + 1] = perm[j]
            j -= 1
        perm[j + 1] = key
    cdef double prev = 1.0
    masks[0] = 0
    for k in range(n):
        lam[k] = prev - xv[perm[k]]
        prev = xv[perm[k]]
        masks[k + 1] = masks[k] + ((<cnp.int64_t>1) << perm[k])
    lam[n] = prev - 0.0
    return perm_arr, lam_arr, mask_arr


def mixture_probs(lambdas, double mu):
    cdef double[::1] lam = np.ascontiguousarray(lambdas, dtype=np.float64)
    cdef Py_ssize_t m = lam.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double floor = mu / m
    cdef Py_ssize_t i
    for i in range(m):
        out[i] = (1.0 - mu) * lam[i] + floor
    return out_arr


def draw_index(probs, double u):
    cdef double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef Py_ssize_t m = p.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0
    for i in range(m):
        total += p[i]
    cdef double v = u * total
    cdef double acc = 0.0
    for i in range(m):
        acc += p[i]
        if acc > v:
            return i
    i = m - 1
    while i > 0 and p[i] <= 0.0:
        i -= 1
    return i


def one_point_estimate(perm, probs, Py_ssize_t i_star, double value):
    cdef cnp.int64_t[::1] pv = np.ascontiguousarray(perm, dtype=np.int64)
    cdef double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0]
    g_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] g = g_arr
    cdef double fhat = value / p[i_star]
    # fhat is zero away from i_star, so only two entries can be nonzero
    if i_star >= 1:
        g[pv[i_star - 1]] = fhat
    if i_star < n:
        g[pv[i_star]] = 0.0 - fhat
    return g_arr


def chain_gradient(perm, chain_values):
    cdef cnp.int64_t[::1] pv = np.ascontiguousarray(perm, dtype=np.int64)
    cdef double[::1] cv = np.ascontiguousarray(chain_values, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0]
    g_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] g = g_arr
    cdef Py_ssize_t i
    for i in range(n):
        g[pv[i]] = cv[i + 1] - cv[i]
    return g_arr


def project_step(x, direction, double eta):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(direction, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double v
    for i in range(n):
        v = xv[i] - eta * dv[i]
        if v < 0.0:
            v = 0.0
        elif v > 1.0:
            v = 1.0
        out[i] = v
    return out_arr


cdef void _visit(Py_ssize_t depth, Py_ssize_t last, cnp.int64_t mask,
                 double parent_val, bint parent_dead, Py_ssize_t n, double tol,
                 double[:, ::1] gram, double[::1] rhs, double[:, ::1] chol,
                 double[::1] z, Py_ssize_t[::1] elems,
                 double[::1] values, cnp.uint8_t[::1] deficient) noexcept nogil:
    cdef Py_ssize_t j, r, c
    cdef double acc, schur, diag, znew, val
    cdef bint dead
    cdef cnp.int64_t child
    for j in range(last + 1, n):
        for r in range(depth):
            acc = gram[elems[r], j]
            for c in range(r):
                acc = acc - chol[r, c] * chol[depth, c]
            chol[depth, r] = acc / chol[r, r]
        schur = gram[j, j]
        for c in range(depth):
            schur = schur - chol[depth, c] * chol[depth, c]
        dead = parent_dead or (schur <= tol * gram[j, j])
        if dead:
            diag = 1.0
        else:
            diag = sqrt(schur)
        acc = rhs[j]
        for c in range(depth):
            acc = acc - chol[depth, c] * z[c]
        znew = acc / diag
        child = mask | ((<cnp.int64_t>1) << j)
        val = parent_val + 0.5 * znew * znew
        if dead:
            values[child] = NAN
            deficient[child] = 1
        else:
            values[child] = val
            deficient[child] = 0
        chol[depth, depth] = diag
        z[depth] = znew
        elems[depth] = j
        _visit(depth + 1, j, child, val, dead, n, tol, gram, rhs, chol, z,
               elems, values, deficient)


def subset_gain_table(gram, rhs, double tol=1e-10):
    cdef double[:, :, ::1] g3 = np.ascontiguousarray(gram, dtype=np.float64)
    cdef double[:, ::1] b2 = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t T = b2.shape[0]
    cdef Py_ssize_t n = b2.shape[1]
    values_arr = np.zeros((T, 1 << n), dtype=np.float64)
    deficient_arr = np.zeros((T, 1 << n), dtype=np.uint8)
    cdef double[:, ::1] values = values_arr
    cdef cnp.uint8_t[:, ::1] deficient = deficient_arr
    cdef double[:, ::1] chol = np.zeros((n, n), dtype=np.float64)
    cdef double[::1] z = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t[::1] elems = np.zeros(n, dtype=np.intp)
    cdef Py_ssize_t t
    with nogil:
        for t in range(T):
            _visit(0, -1, 0, 0.0, False, n, tol, g3[t], b2[t], chol, z,
                   elems, values[t], deficient[t])
    return values_arr, deficient_arr.astype(bool)
