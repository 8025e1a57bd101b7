"""Per-instance linear-MMSE receiver metrics.

Everything is a pure function of (ChannelInstance, linear SNR gamma).
With G = H^H H and A = I + gamma*G:

    SINR_k          1/[A^{-1}]_kk - 1
    mmse exact      eps^2      = (1/K) tr(A^{-1})
    mmse approx     eps_hat^2  = 1/(1 + gamma * exp(lndet(G)/K))
    mutual info     I_e  = log2 det(A)                    [bits/s/Hz]
    Minkowski lb    I_lb = K log2(1 + gamma exp(lndet(G)/K))
    spectral eff    (1/K) sum_k log2(1 + SINR_k)
    Jensen integrand -log2(eps^2)

SNR is linear at this API; dB conversion happens only at the CLI
boundary.  Mutual informations are reported in bits; the I-MMSE residual
converts to nats internally, where the derivative identity
gamma * dI/dgamma = K (1 - eps^2) lives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelInstance
from .errors import NotPositiveDefinite, SingularChannel
from .numerics import invert_regularized, logdet_hpd

_LN2 = math.log(2.0)

# metric row order shared with the Monte Carlo sweep accumulator
METRIC_NAMES = (
    "mmse_exact",
    "mmse_approx",
    "spectral_eff",
    "jensen_lb",
    "mutual_info",
    "mutual_info_lb",
)


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma >= 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    return gamma


def _inverse_diag(instance: ChannelInstance, gamma: float) -> np.ndarray:
    return np.real(np.diagonal(invert_regularized(instance.gram, gamma)))


def _gram_logdet(instance: ChannelInstance) -> float:
    try:
        return logdet_hpd(instance.gram)
    except NotPositiveDefinite as exc:
        raise SingularChannel("Gram matrix is numerically singular") from exc


def sinr_mmse(instance: ChannelInstance, gamma: float) -> np.ndarray:
    """Per-user post-detection SINR, 1/[(I+gamma G)^{-1}]_kk - 1."""
    gamma = _check_gamma(gamma)
    d = _inverse_diag(instance, gamma)
    return np.maximum(1.0 / d - 1.0, 0.0)


def mmse_exact(instance: ChannelInstance, gamma: float) -> float:
    """Per-user MMSE (1/K) tr((I + gamma G)^{-1}), in (0, 1]."""
    gamma = _check_gamma(gamma)
    return float(_inverse_diag(instance, gamma).mean())


def mmse_approx(instance: ChannelInstance, gamma: float) -> float:
    """Geometric-mean MMSE approximation 1/(1 + gamma exp(lndet(G)/K)).

    Exact whenever all Gram eigenvalues coincide (Minkowski equality).
    Raises SingularChannel when G has no log-determinant.
    """
    gamma = _check_gamma(gamma)
    geo = math.exp(_gram_logdet(instance) / instance.k)
    return 1.0 / (1.0 + gamma * geo)


def mutual_info(instance: ChannelInstance, gamma: float) -> float:
    """I_e = log2 det(I + gamma G) in bits/s/Hz."""
    gamma = _check_gamma(gamma)
    eye = np.eye(instance.k, dtype=np.complex128)
    return logdet_hpd(eye + gamma * instance.gram) / _LN2


def mutual_info_minkowski_lb(instance: ChannelInstance, gamma: float) -> float:
    """Minkowski lower bound K log2(1 + gamma det(G)^(1/K)), bits/s/Hz."""
    gamma = _check_gamma(gamma)
    geo = math.exp(_gram_logdet(instance) / instance.k)
    return instance.k * math.log1p(gamma * geo) / _LN2


def spectral_efficiency(instance: ChannelInstance, gamma: float) -> float:
    """Per-user spectral efficiency (1/K) sum_k log2(1 + SINR_k)."""
    return float(np.log2(1.0 + sinr_mmse(instance, gamma)).mean())


def jensen_bound(instance: ChannelInstance, gamma: float) -> float:
    """Jensen integrand -log2(eps^2); spectral_efficiency dominates it."""
    return -math.log2(mmse_exact(instance, gamma))


def immse_residual(instance: ChannelInstance, gamma: float, delta: float) -> float:
    """Central-difference check of gamma * dI_e/dgamma = K (1 - eps^2).

    I_e is taken in nats here.  Returns the absolute residual; second
    order in delta, so halving delta shrinks it ~4x until rounding noise.
    """
    gamma = float(gamma)
    delta = float(delta)
    if not gamma > 0.0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if not 0.0 < delta < gamma:
        raise ValueError(f"delta must be in (0, gamma), got {delta}")
    eye = np.eye(instance.k, dtype=np.complex128)

    def info_nats(g: float) -> float:
        return logdet_hpd(eye + g * instance.gram)

    deriv = gamma * (info_nats(gamma + delta) - info_nats(gamma - delta)) / (2.0 * delta)
    return abs(deriv - instance.k * (1.0 - mmse_exact(instance, gamma)))


@dataclass
class InstanceMetrics:
    """All per-instance metrics at one SNR point."""

    gamma: float
    sinr_per_user: np.ndarray
    mmse_exact: float
    mmse_approx: float
    mutual_info: float
    mutual_info_lb: float
    spectral_eff: float
    jensen_lb: float


def compute_metrics(instance: ChannelInstance, gamma: float) -> InstanceMetrics:
    """Evaluate the full metric set, sharing the factorizations."""
    gamma = _check_gamma(gamma)
    d = _inverse_diag(instance, gamma)
    sinr = np.maximum(1.0 / d - 1.0, 0.0)
    eps2 = float(d.mean())
    geo = math.exp(_gram_logdet(instance) / instance.k)
    eye = np.eye(instance.k, dtype=np.complex128)
    return InstanceMetrics(
        gamma=gamma,
        sinr_per_user=sinr,
        mmse_exact=eps2,
        mmse_approx=1.0 / (1.0 + gamma * geo),
        mutual_info=logdet_hpd(eye + gamma * instance.gram) / _LN2,
        mutual_info_lb=instance.k * math.log1p(gamma * geo) / _LN2,
        spectral_eff=float(np.log2(1.0 + sinr).mean()),
        jensen_lb=-math.log2(eps2),
    )


def metrics_from_primitives(
    gammas: np.ndarray,
    logdet_gram: np.ndarray,
    inv_diag: np.ndarray,
    logdet_reg: np.ndarray,
    k: int,
) -> np.ndarray:
    """Vectorized metric assembly from factorization primitives.

    Shapes: gammas (m,), logdet_gram (n,), inv_diag (n, m, k),
    logdet_reg (n, m).  Returns (n, 6, m) in METRIC_NAMES order.  NaN
    primitives (skipped trials) propagate into the metric rows.

    Same formulas as the scalar functions above; the Monte Carlo engine
    uses this path so per-instance and sweep results agree exactly.
    """
    gammas = np.asarray(gammas, dtype=np.float64)
    n, m = logdet_reg.shape
    sinr = np.maximum(1.0 / inv_diag - 1.0, 0.0)
    eps2 = inv_diag.mean(axis=2)
    spec = np.log2(1.0 + sinr).mean(axis=2)
    jens = -np.log2(eps2)
    info = logdet_reg / _LN2
    with np.errstate(invalid="ignore"):
        geo = np.exp(logdet_gram / k)[:, np.newaxis]
    eps2_hat = 1.0 / (1.0 + gammas[np.newaxis, :] * geo)
    info_lb = k * np.log1p(gammas[np.newaxis, :] * geo) / _LN2
    out = np.empty((n, len(METRIC_NAMES), m))
    out[:, 0] = eps2
    out[:, 1] = eps2_hat
    out[:, 2] = spec
    out[:, 3] = jens
    out[:, 4] = info
    out[:, 5] = info_lb
    return out
