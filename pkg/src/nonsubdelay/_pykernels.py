"""Pure-Python (numpy) implementation of the hot kernels.

Every function here has a compiled twin in ``_kernels.pyx`` with the same
signature and the same floating-point operation order where practical.
"""

import numpy as np

BACKEND = "python"


def chain_decompose(x):
    """Sort ``x`` decreasingly (ties by ascending index) and build the chain.

    Returns
    -------
    perm : ndarray of int64, shape (n,)
        Zero-based element order, ``x[perm[0]] >= x[perm[1]] >= ...``.
    lambdas : ndarray of float64, shape (n + 1,)
        Chain weights with the conventions x_pi(0) = 1, x_pi(n+1) = 0.
    masks : ndarray of int64, shape (n + 1,)
        Bitmask of each chain set, ``masks[0] == 0``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    perm = np.argsort(-x, kind="stable").astype(np.int64)
    padded = np.empty(n + 2)
    padded[0] = 1.0
    padded[1:n + 1] = x[perm]
    padded[n + 1] = 0.0
    lambdas = padded[:-1] - padded[1:]
    masks = np.zeros(n + 1, dtype=np.int64)
    masks[1:] = np.cumsum(np.left_shift(np.int64(1), perm))
    return perm, lambdas, masks


def mixture_probs(lambdas, mu):
    lambdas = np.asarray(lambdas, dtype=np.float64)
    return (1.0 - mu) * lambdas + mu / lambdas.shape[0]


def draw_index(probs, u):
    """Inverse-CDF draw; zero-probability outcomes are never returned."""
    cdf = np.cumsum(probs)
    i = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    if i >= cdf.shape[0]:
        i = int(np.flatnonzero(np.asarray(probs) > 0)[-1])
    return i


def one_point_estimate(perm, probs, i_star, value):
    n = perm.shape[0]
    fhat = np.zeros(n + 1)
    fhat[i_star] = value / probs[i_star]
    g = np.empty(n)
    g[perm] = fhat[1:] - fhat[:-1]
    return g


def chain_gradient(perm, chain_values):
    chain_values = np.asarray(chain_values, dtype=np.float64)
    g = np.empty(perm.shape[0])
    g[perm] = chain_values[1:] - chain_values[:-1]
    return g


def project_step(x, direction, eta):
    return np.clip(x - eta * direction, 0.0, 1.0)


def subset_gain_table(gram, rhs, tol=1e-10):
    """Evaluate ``0.5 * b_S^T M_SS^{-1} b_S`` for every subset S and round.

    ``gram`` has shape (T, n, n) and ``rhs`` shape (T, n). Subsets are
    visited depth-first in increasing element order and each Cholesky factor
    is extended by one row from its parent, vectorized across rounds.
    Entries whose Schur complement falls below ``tol`` times the diagonal are
    flagged in ``deficient`` (together with their depth-first descendants)
    and left as NaN.
    """
    gram = np.ascontiguousarray(gram, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    T, n = rhs.shape
    values = np.zeros((T, 1 << n))
    deficient = np.zeros((T, 1 << n), dtype=bool)
    chol = np.zeros((T, n, n))
    z = np.zeros((T, n))
    elems = [0] * n

    def visit(depth, last, mask, parent_val, parent_dead):
        for j in range(last + 1, n):
            row = np.empty((T, depth))
            for r in range(depth):
                acc = gram[:, elems[r], j].copy()
                for c in range(r):
                    acc -= chol[:, r, c] * row[:, c]
                row[:, r] = acc / chol[:, r, r]
            schur = gram[:, j, j].copy()
            for c in range(depth):
                schur -= row[:, c] * row[:, c]
            dead = parent_dead | (schur <= tol * gram[:, j, j])
            diag = np.sqrt(np.where(dead, 1.0, schur))
            acc = rhs[:, j].copy()
            for c in range(depth):
                acc -= row[:, c] * z[:, c]
            znew = acc / diag
            child = mask | (1 << j)
            val = parent_val + 0.5 * znew * znew
            values[:, child] = np.where(dead, np.nan, val)
            deficient[:, child] = dead
            chol[:, depth, :depth] = row
            chol[:, depth, depth] = diag
            z[:, depth] = znew
            elems[depth] = j
            visit(depth + 1, j, child, val, dead)

    visit(0, -1, 0, np.zeros(T), np.zeros(T, dtype=bool))
    return values, deficient
