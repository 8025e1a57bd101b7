"""Channel construction: deterministic beam gains and diagonal fading.

One trial's channel is H = B * diag(f): a fixed full-rank gain matrix B
(trace-normalized so tr(B^H B) = K) column-scaled by per-user fading
amplitudes f.  Amplitudes are stored unsquared, so both D^(1/2) = diag(f)
and D = diag(|f|^2) are recoverable exactly.

Fading families
---------------
Composite   f_i = h_i * sqrt(x_i): unit-power Rician h_i (LOS fraction
            Kr/(Kr+1), random LOS phase) times lognormal shadowing x_i
            with underlying normal (mu, sigma^2) in natural-log units.
Rain        f_i = sqrt(l_i) with A_dB lognormal in dB scale.  With
            db_conversion the power gain is the physical l = 10^(-A_dB/10);
            without it, l = exp(A_dB), the literal "exponentiated
            lognormal" (log-log-normal) algebra that the closed forms in
            `closedform` assume.  Default is OFF so sampler and analytic
            curves share one convention.
Unit        f = 1 (no fading; oracle tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NotSquare, ParseError, RankDeficient
from .numerics import RngStream, as_complex_matrix, gram

SINGULAR_VALUE_FLOOR = 1e-10

# skip renormalization below this relative trace error so that an already
# normalized matrix round-trips bit-identically through save/load
_TRACE_RTOL = 1e-12

_TWO_PI = 2.0 * np.pi


@dataclass
class GainMatrix:
    """Deterministic K x K multibeam gain matrix, power-normalized.

    Build through `synth_beam_pattern`, `load_beam_pattern` or
    `gain_from_matrix`, which enforce tr(B^H B) = K and the full-rank
    floor.  `renorm_warning` records a rescaling of more than 1% applied
    by the file loader.
    """

    matrix: np.ndarray
    renorm_warning: str | None = None

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def gram_matrix(self) -> np.ndarray:
        """B^H B (equals B^2 for the usual real symmetric patterns)."""
        return gram(self.matrix)

    @cached_property
    def logdet_gram(self) -> float:
        """ln det(B^H B), i.e. the paper-normalized ln det B^2 term."""
        from .numerics import logdet_hpd

        return logdet_hpd(self.gram_matrix)


def _finalize_gain(b: np.ndarray, warning: str | None = None) -> GainMatrix:
    """Normalize trace power and enforce the rank floor."""
    b = as_complex_matrix(b, "B")
    if b.shape[0] != b.shape[1]:
        raise NotSquare(f"gain matrix must be square, got {b.shape}")
    k = b.shape[0]
    power = float(np.real(np.vdot(b, b)))  # tr(B^H B)
    if power <= 0.0:
        raise RankDeficient("gain matrix has zero power")
    if abs(power - k) > _TRACE_RTOL * k:
        b = b * np.sqrt(k / power)
    smin = np.linalg.svd(b, compute_uv=False)[-1]
    if smin <= SINGULAR_VALUE_FLOOR:
        raise RankDeficient(
            f"smallest singular value {smin:.3e} below floor {SINGULAR_VALUE_FLOOR}"
        )
    return GainMatrix(matrix=b, renorm_warning=warning)


def gain_from_matrix(b) -> GainMatrix:
    """Wrap an arbitrary square array as a normalized GainMatrix."""
    return _finalize_gain(np.asarray(b))


def synth_beam_pattern(k: int, overlap: float, rng: RngStream | None = None) -> GainMatrix:
    """Synthetic multibeam pattern: banded symmetric co-channel decay.

    Off-diagonal gain between beams i and j is overlap^|i-j|, optionally
    jittered (symmetrically, +-25%) when an rng is supplied.  Stands in
    for measured patterns; the diagonal stays dominant for overlap < 1,
    and the result is renormalized to tr(B^H B) = k.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"overlap must be in [0, 1), got {overlap}")
    idx = np.arange(k)
    lags = np.abs(np.subtract.outer(idx, idx))
    b = np.power(float(overlap), lags, dtype=np.float64)
    if rng is not None and k > 1:
        jitter = rng.uniform(-0.25, 0.25, (k, k))
        jitter = np.triu(jitter, 1)
        jitter = jitter + jitter.T  # keep the pattern symmetric
        off = ~np.eye(k, dtype=bool)
        b[off] *= 1.0 + jitter[off]
    return _finalize_gain(b)


def _parse_entry(token: str, lineno: int) -> complex:
    text = token.strip()
    if not text:
        raise ParseError(f"line {lineno}: empty field")
    try:
        return complex(float(text))
    except ValueError:
        pass
    try:
        # accept engineering notation "a+bi" alongside Python's "a+bj"
        return complex(text.replace("i", "j"))
    except ValueError:
        raise ParseError(f"line {lineno}: cannot parse {token.strip()!r}") from None


def load_beam_pattern(path) -> GainMatrix:
    """Read a K x K beam-gain CSV (UTF-8, `#` comment lines, row-major).

    The matrix is renormalized to tr(B^H B) = K; if that rescales the
    power by more than 1%, the returned GainMatrix carries a
    renorm_warning.  Raises ParseError / NotSquare / RankDeficient.
    """
    rows: list[list[complex]] = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read beam pattern {path}: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([_parse_entry(tok, lineno) for tok in line.split(",")])
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = len(rows[0])
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ParseError(f"{path}: row {i} has {len(row)} fields, expected {width}")
    if len(rows) != width:
        raise NotSquare(f"{path}: {len(rows)} rows x {width} cols")
    b = np.array(rows, dtype=np.complex128)
    if not np.all(np.isfinite(b)):
        raise ParseError(f"{path}: non-finite entry")
    k = b.shape[0]
    power = float(np.real(np.vdot(b, b)))
    warning = None
    if abs(power - k) > 0.01 * k:
        warning = f"renormalized: tr(B^H B) was {power:.6g}, expected {k}"
    return _finalize_gain(b, warning)


def save_beam_pattern(gain: GainMatrix, path) -> None:
    """Write the beam-gain CSV.  repr-precision floats, so a load of the
    written file reproduces the matrix bit-for-bit."""
    b = gain.matrix
    real_only = bool(np.all(b.imag == 0.0))
    with open(path, "w", encoding="utf-8") as fh:
        for row in b:
            if real_only:
                fh.write(",".join(repr(float(v.real)) for v in row))
            else:
                fh.write(
                    ",".join(
                        f"{float(v.real)!r}"
                        f"{'+' if v.imag >= 0 else '-'}{abs(float(v.imag))!r}i"
                        for v in row
                    )
                )
            fh.write("\n")


@dataclass(frozen=True)
class CompositeFading:
    """Rician small-scale times lognormal shadowing (mobile return link).

    rician_factor_db: Rician factor Kr in dB (LOS/diffuse power ratio).
    shadow_mean, shadow_sigma: parameters of the underlying normal of the
    shadowing lognormal, in natural-log units.
    """

    rician_factor_db: float
    shadow_mean: float
    shadow_sigma: float

    def __post_init__(self):
        if not np.isfinite(self.rician_factor_db):
            raise ValueError("rician_factor_db must be finite")
        if not self.shadow_sigma > 0.0:
            raise ValueError(f"shadow_sigma must be > 0, got {self.shadow_sigma}")

    @property
    def rician_factor(self) -> float:
        """Kr on the linear scale."""
        return 10.0 ** (self.rician_factor_db / 10.0)


@dataclass(frozen=True)
class RainFading:
    """dB-domain lognormal rain attenuation (fixed services).

    lognormal_mu, lognormal_sigma: parameters of the underlying normal of
    the dB-scale lognormal.  db_conversion=True applies the physical
    10^(-A_dB/10) power mapping; False keeps the literal exponentiated-
    lognormal algebra the analytic curves use (default).
    """

    lognormal_mu: float
    lognormal_sigma: float
    db_conversion: bool = False

    def __post_init__(self):
        if not np.isfinite(self.lognormal_mu):
            raise ValueError("lognormal_mu must be finite")
        if not self.lognormal_sigma > 0.0:
            raise ValueError(f"lognormal_sigma must be > 0, got {self.lognormal_sigma}")


@dataclass(frozen=True)
class UnitFading:
    """D = I; deterministic channel for oracle tests."""


FadingModel = CompositeFading | RainFading | UnitFading


def rician_coefficients(rician_factor_db: float, n: int, rng: RngStream) -> np.ndarray:
    """n unit-power Rician fading coefficients, E{|h|^2} = 1.

    LOS amplitude sqrt(Kr/(Kr+1)) with a uniform random phase plus a
    CN(0, 1/(Kr+1)) diffuse part.  Draw order (phases, then diffuse) is
    part of the reproducibility contract.
    """
    kr = 10.0 ** (rician_factor_db / 10.0)
    phase = rng.uniform(0.0, _TWO_PI, n)
    diffuse = rng.complex_normal(n) * np.sqrt(1.0 / (kr + 1.0))
    return np.sqrt(kr / (kr + 1.0)) * np.exp(1j * phase) + diffuse


def lognormal_coefficients(mu: float, sigma: float, n: int, rng: RngStream) -> np.ndarray:
    """n lognormal draws exp(N(mu, sigma^2))."""
    return np.exp(mu + sigma * rng.standard_normal(n))


def sample_fading(model: FadingModel, k: int, rng: RngStream) -> np.ndarray:
    """Diagonal of D^(1/2): k fading amplitudes for one channel trial."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if isinstance(model, UnitFading):
        return np.ones(k, dtype=np.complex128)
    if isinstance(model, CompositeFading):
        h = rician_coefficients(model.rician_factor_db, k, rng)
        x = lognormal_coefficients(model.shadow_mean, model.shadow_sigma, k, rng)
        return h * np.sqrt(x)
    if isinstance(model, RainFading):
        a_db = lognormal_coefficients(model.lognormal_mu, model.lognormal_sigma, k, rng)
        if model.db_conversion:
            power = np.power(10.0, -a_db / 10.0)
        else:
            power = np.exp(a_db)
        return np.sqrt(power).astype(np.complex128)
    raise TypeError(f"unknown fading model {model!r}")


@dataclass
class ChannelInstance:
    """One realization H = B * diag(f) with its cached Gram matrix.

    fading_diag is None for instances wrapped from a raw H (oracle and
    test paths); realized instances always carry it.
    """

    h: np.ndarray
    gram: np.ndarray
    fading_diag: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.gram.shape[0]

    @classmethod
    def from_h(cls, h) -> "ChannelInstance":
        m = as_complex_matrix(h, "H")
        return cls(h=m, gram=gram(m))


def realize_channel(gain: GainMatrix, model: FadingModel, rng: RngStream) -> ChannelInstance:
    """Draw one channel instance H = B * diag(f) and cache H^H H."""
    f = sample_fading(model, gain.k, rng)
    h = np.ascontiguousarray(gain.matrix * f[np.newaxis, :])
    return ChannelInstance(h=h, gram=gram(h), fading_diag=f)
