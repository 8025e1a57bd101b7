"""Analytic expected-MMSE curves for the supported fading families.

Every family reduces to

    E{eps_hat^2}(gamma) ~= 1 / (1 + gamma * exp(T)),
    T = (1/K) ln det(B^H B) + per-user fading log-moment,

because ln det(H^H H) = ln det(B^H B) + sum_i ln|f_i|^2 splits the
deterministic gain term from i.i.d. fading log-moments:

    composite   E{ln|f|^2} = mu + rician_log_moment(Kr) - ln(Kr + 1)
    rain        E{ln l}    = exp(mu + sigma^2/2)            (literal algebra)
                           = -(ln10/10) exp(mu + sigma^2/2) (db_conversion)
    unit        0

The curve is the Jensen value of eps_hat^2 at the mean log-determinant.
phi(x) = 1/(1 + e^x) has phi'' = phi(1-phi)(1-2phi): concave for x < 0 and
convex for x > 0, so the curve is an upper bound on E{eps_hat^2} where
x = T + ln(gamma) stays negative, a lower bound where it stays positive,
and only an approximation in the straddling mid-SNR region
(`jensen_direction` reports which).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import CompositeFading, FadingModel, GainMatrix, RainFading, UnitFading
from .errors import DomainError
from .numerics import exp_integral_e1

_LN10_OVER_10 = math.log(10.0) / 10.0

# Gauss-Hermite order for the Rician log-power variance (tag heuristic only)
_GH_ORDER = 96


def rician_log_moment(s_sq: float) -> float:
    """ln(s^2) + E1(s^2): expected log of a unit-scale noncentral power.

    For a unit-power Rician coefficient with linear factor Kr (= the
    noncentrality parameter of the associated chi-square), the expected
    log power is E{ln|h|^2} = rician_log_moment(Kr) - ln(Kr + 1).
    """
    s_sq = float(s_sq)
    if not s_sq > 0.0:
        raise DomainError(f"noncentrality must be > 0, got {s_sq}")
    return math.log(s_sq) + exp_integral_e1(s_sq)


def fading_log_moment(model: FadingModel) -> float:
    """Per-user E{ln|f|^2} = E{ln D_ii} for one fading coefficient."""
    if isinstance(model, UnitFading):
        return 0.0
    if isinstance(model, CompositeFading):
        kr = model.rician_factor
        return model.shadow_mean + rician_log_moment(kr) - math.log(kr + 1.0)
    if isinstance(model, RainFading):
        mu_l = math.exp(model.lognormal_mu + 0.5 * model.lognormal_sigma**2)
        return -_LN10_OVER_10 * mu_l if model.db_conversion else mu_l
    raise TypeError(f"unknown fading model {model!r}")


def expected_logdet(gain: GainMatrix, model: FadingModel) -> float:
    """(1/K) E{ln det(H^H H)}: gain term plus the fading log-moment."""
    return gain.logdet_gram / gain.k + fading_log_moment(model)


def _expected_mmse(gain: GainMatrix, model: FadingModel, gamma: float) -> float:
    gamma = float(gamma)
    if not gamma >= 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    return 1.0 / (1.0 + gamma * math.exp(expected_logdet(gain, model)))


def expected_mmse_composite(gain: GainMatrix, params: CompositeFading, gamma: float) -> float:
    """Closed-form expected MMSE approximation for composite fading."""
    return _expected_mmse(gain, params, gamma)


def expected_mmse_rain(gain: GainMatrix, params: RainFading, gamma: float) -> float:
    """Closed-form expected MMSE approximation for rain fading.

    Uses mu_l = exp(mu + sigma^2/2); with db_conversion the log-moment is
    additionally scaled by -ln10/10 to match the physical sampler (a
    documented deviation from the literal source algebra).
    """
    return _expected_mmse(gain, params, gamma)


@dataclass
class ClosedFormCurve:
    """gamma -> expected eps_hat^2 evaluator for one (B, fading) pair."""

    model: FadingModel
    gain_logdet: float
    expected_log_moment: float

    def __call__(self, gamma):
        g = np.asarray(gamma, dtype=np.float64)
        if np.any(g < 0.0):
            raise ValueError("gamma must be >= 0")
        out = 1.0 / (1.0 + g * math.exp(self.gain_logdet + self.expected_log_moment))
        return float(out) if np.isscalar(gamma) else out


def closed_form_curve(gain: GainMatrix, model: FadingModel) -> ClosedFormCurve:
    return ClosedFormCurve(
        model=model,
        gain_logdet=gain.logdet_gram / gain.k,
        expected_log_moment=fading_log_moment(model),
    )


def _rician_log_power_variance(kr: float) -> float:
    """Var{ln|h|^2} of a unit-power Rician coefficient via 2-D Gauss-Hermite.

    Accurate for moderate-to-large Kr; for very small Kr the origin log
    singularity costs a few percent, which is fine for the 3-sigma
    straddle classification this feeds.
    """
    nodes, weights = np.polynomial.hermite.hermgauss(_GH_ORDER)
    los = math.sqrt(kr / (kr + 1.0))
    comp_sigma = math.sqrt(0.5 / (kr + 1.0))  # std of each CN component
    re = los + math.sqrt(2.0) * comp_sigma * nodes[:, np.newaxis]
    im = math.sqrt(2.0) * comp_sigma * nodes[np.newaxis, :]
    f = np.log(re**2 + im**2)
    w = weights[:, np.newaxis] * weights[np.newaxis, :] / math.pi
    mean = float((w * f).sum())
    second = float((w * f * f).sum())
    return max(second - mean * mean, 0.0)


def _log_moment_variance(model: FadingModel) -> float:
    """Var{ln|f|^2} of one fading coefficient."""
    if isinstance(model, UnitFading):
        return 0.0
    if isinstance(model, CompositeFading):
        return _rician_log_power_variance(model.rician_factor) + model.shadow_sigma**2
    if isinstance(model, RainFading):
        s2 = model.lognormal_sigma**2
        var = (math.exp(s2) - 1.0) * math.exp(2.0 * model.lognormal_mu + s2)
        return var * _LN10_OVER_10**2 if model.db_conversion else var
    raise TypeError(f"unknown fading model {model!r}")


def jensen_direction(model: FadingModel, gain: GainMatrix, gamma: float) -> str:
    """Which side of E{eps_hat^2} the closed form sits on at this SNR.

    Classifies by x = (1/K) ln det(H^H H) + ln(gamma): 'upper_bound'
    when x < 0 with 3-sigma margin (concave branch of 1/(1+e^x)),
    'lower_bound' when x > 0 likewise (convex branch), 'mixed' when the
    distribution of x straddles zero.
    """
    gamma = float(gamma)
    if not gamma >= 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if gamma == 0.0:
        return "upper_bound"
    x_mean = expected_logdet(gain, model) + math.log(gamma)
    x_std = math.sqrt(_log_moment_variance(model) / gain.k)
    if x_mean + 3.0 * x_std < 0.0:
        return "upper_bound"
    if x_mean - 3.0 * x_std > 0.0:
        return "lower_bound"
    return "mixed"
