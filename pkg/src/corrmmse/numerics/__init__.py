"""Numeric foundations: dense Hermitian kernels, E1, seeded substreams."""

from .expint import EULER_GAMMA, X_SWITCH, exp_integral_e1
from .linalg import (
    as_complex_matrix,
    backend_name,
    gram,
    invert_regularized,
    logdet_hpd,
    sweep_primitives,
)
from .rng import RngStream

__all__ = [
    "EULER_GAMMA",
    "X_SWITCH",
    "RngStream",
    "as_complex_matrix",
    "backend_name",
    "exp_integral_e1",
    "gram",
    "invert_regularized",
    "logdet_hpd",
    "sweep_primitives",
]
