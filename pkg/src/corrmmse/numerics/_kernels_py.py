"""NumPy kernels (pure-Python backend).

Same contracts as the compiled extension `_kernels`; `_backend` selects
whichever is available.  Failures are signalled with NaN rather than
exceptions so batched callers can skip individual trials.
"""

from __future__ import annotations

import numpy as np

# pivots below this fraction of their column's original diagonal signal a
# numerically singular matrix; must match the compiled kernel's floor
_REL_PIVOT_FLOOR = 1e-13


def _pivot_ok(a: np.ndarray, ell: np.ndarray) -> np.ndarray:
    """Relative pivot check for (stacked) Cholesky factors."""
    orig = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    piv = np.real(np.diagonal(ell, axis1=-2, axis2=-1)) ** 2
    return np.all((orig > 0.0) & (piv > _REL_PIVOT_FLOOR * orig), axis=-1)


def _chol_logdet_one(a: np.ndarray) -> float:
    try:
        ell = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return float("nan")
    if not _pivot_ok(a, ell):
        return float("nan")
    return float(2.0 * np.log(np.real(np.diagonal(ell))).sum())


def logdet_hpd(a: np.ndarray) -> float:
    """ln det(a) of a Hermitian positive definite matrix, NaN on failure.

    Sum of log Cholesky pivots; the determinant itself is never formed.
    """
    return _chol_logdet_one(np.asarray(a, dtype=np.complex128))


def regularized_inverse(g: np.ndarray, gamma: float) -> np.ndarray:
    """Inverse of (I + gamma * g) for Hermitian PSD g and gamma >= 0."""
    g = np.asarray(g, dtype=np.complex128)
    a = np.eye(g.shape[0], dtype=np.complex128) + gamma * g
    return np.linalg.inv(a)


def _batch_chol_logdet(a: np.ndarray) -> np.ndarray:
    """Stacked ln det via Cholesky; NaN rows where factorization fails."""
    try:
        ell = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return np.array([_chol_logdet_one(m) for m in a])
    d = np.real(np.diagonal(ell, axis1=-2, axis2=-1))
    out = 2.0 * np.log(d).sum(axis=-1)
    out[~_pivot_ok(a, ell)] = np.nan
    return out


def _batch_inv_diag(a: np.ndarray) -> np.ndarray:
    """Real diagonal of inv(a) for a stack of HPD matrices, NaN rows on failure."""
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError:
        n, k = a.shape[0], a.shape[1]
        out = np.empty((n, k))
        for i in range(n):
            try:
                out[i] = np.real(np.diagonal(np.linalg.inv(a[i])))
            except np.linalg.LinAlgError:
                out[i] = np.nan
        return out
    return np.real(np.diagonal(inv, axis1=-2, axis2=-1)).copy()


def sweep_metrics(grams: np.ndarray, gammas: np.ndarray):
    """Per-trial factorization primitives over an SNR grid.

    grams: (n, k, k) complex Gram matrices, gammas: (m,) SNR points.
    Returns (logdet_gram (n,), inv_diag (n, m, k), logdet_reg (n, m)) where
    inv_diag[t, j] is the real diagonal of inv(I + gammas[j] * grams[t]) and
    logdet_reg[t, j] = ln det(I + gammas[j] * grams[t]).  logdet_gram[t] is
    NaN when grams[t] is not numerically positive definite.
    """
    grams = np.ascontiguousarray(grams, dtype=np.complex128)
    gammas = np.ascontiguousarray(gammas, dtype=np.float64)
    n, k = grams.shape[0], grams.shape[1]
    m = gammas.shape[0]

    logdet_gram = _batch_chol_logdet(grams)

    inv_diag = np.empty((n, m, k))
    logdet_reg = np.empty((n, m))
    eye = np.eye(k, dtype=np.complex128)
    for j in range(m):
        a = eye + gammas[j] * grams
        logdet_reg[:, j] = _batch_chol_logdet(a)
        inv_diag[:, j, :] = _batch_inv_diag(a)
    return logdet_gram, inv_diag, logdet_reg
