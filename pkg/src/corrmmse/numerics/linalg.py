"""Dense-matrix operations on small Hermitian systems.

Thin validation layer over the selected kernel backend.  Matrices are
plain complex128 ndarrays; K stays small (single-digit in the reference
experiments, tested up to 64), so everything is dense.
"""

from __future__ import annotations

import math

import numpy as np

from corrmmse.errors import NotPositiveDefinite

from ._backend import BACKEND, kernels


def backend_name() -> str:
    """Which kernel backend is active: 'compiled' or 'python'."""
    return BACKEND


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return a C-contiguous complex128 2-D array.

    Rejects empty and non-finite input; this is the constructor-side
    guarantee every downstream kernel relies on.
    """
    m = np.ascontiguousarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be at least 1x1, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def gram(h) -> np.ndarray:
    """H^H H of a (possibly rectangular) channel matrix."""
    m = as_complex_matrix(h, "H")
    return np.ascontiguousarray(m.conj().T @ m)


def logdet_hpd(m) -> float:
    """ln det(M) of a Hermitian positive definite matrix.

    Computed as twice the sum of log Cholesky pivots; raises
    NotPositiveDefinite when the factorization hits a pivot <= 0 or one
    that collapses below 1e-13 of its column's original diagonal
    (singular/rank-deficient input whose rank loss was eaten by
    rounding).
    """
    a = as_complex_matrix(m, "M")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"M must be square, got {a.shape}")
    out = kernels.logdet_hpd(a)
    if math.isnan(out):
        raise NotPositiveDefinite("Cholesky pivot <= 0: matrix is not HPD")
    return out


def invert_regularized(m, gamma: float) -> np.ndarray:
    """Inverse of (I + gamma*M) for Hermitian PSD M and gamma >= 0.

    Always well-posed under the preconditions; the result is explicitly
    Hermitian-symmetrized to kill rounding skew.
    """
    a = as_complex_matrix(m, "M")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"M must be square, got {a.shape}")
    gamma = float(gamma)
    if not gamma >= 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    inv = kernels.regularized_inverse(a, gamma)
    return 0.5 * (inv + inv.conj().T)


def sweep_primitives(grams: np.ndarray, gammas) -> tuple:
    """Batched per-trial primitives: (logdet_gram, inv_diag, logdet_reg).

    NaN marks trials whose Gram matrix failed factorization; callers
    decide the skip policy.  See the backend `sweep_metrics` docstring
    for exact shapes.
    """
    g = np.ascontiguousarray(grams, dtype=np.complex128)
    if g.ndim == 2:
        g = g[np.newaxis]
    gam = np.ascontiguousarray(gammas, dtype=np.float64)
    return kernels.sweep_metrics(g, gam)
