"""Monte Carlo sweep engine with deterministic parallel substreams.

Trial t always draws from RngStream(seed, t) and every SNR grid point
reuses the same channel instance (common random numbers), so results are
a pure function of (gain, model, grid, n_trials, seed) regardless of how
many worker threads execute the trial blocks.  Blocks have a fixed size,
each block is accumulated in trial order, and block partials are reduced
in block order; thread count only changes scheduling, never arithmetic.

Accumulation is shifted by trial 0's metric values, which removes the
catastrophic cancellation in the variance of low-spread metrics (and
makes the standard error exactly zero for deterministic fading).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ChannelInstance, FadingModel, GainMatrix, realize_channel
from .closedform import closed_form_curve
from .detector import METRIC_NAMES, metrics_from_primitives, mmse_approx, mmse_exact
from .errors import DegenerateInstance, ExcessiveSkippedTrials
from .numerics import RngStream, sweep_primitives

_BLOCK = 256

_N_METRICS = len(METRIC_NAMES)


@dataclass(frozen=True)
class SnrGrid:
    """Ordered transmit-SNR points, linear scale."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("grid needs at least one point")
        if np.any(pts < 0.0):
            raise ValueError("grid points must be >= 0")
        if np.any(np.diff(pts) <= 0.0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_db(cls, start_db: float, stop_db: float, n_points: int) -> "SnrGrid":
        if n_points < 1:
            raise ValueError("n_points must be >= 1")
        db = np.linspace(float(start_db), float(stop_db), int(n_points))
        return cls(points=10.0 ** (db / 10.0))

    @property
    def db(self) -> np.ndarray:
        """10 log10(gamma) view (-inf at gamma = 0)."""
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.points)

    def __len__(self) -> int:
        return self.points.size


@dataclass
class MetricSeries:
    """Per-grid-point Monte Carlo mean and standard error."""

    mean: np.ndarray
    std_error: np.ndarray


@dataclass
class SweepResult:
    """Monte Carlo estimates over an SNR grid, plus analytic companions."""

    grid: SnrGrid
    seed: int
    n_trials: int
    n_effective: int
    n_skipped: int
    mmse_exact: MetricSeries
    mmse_approx: MetricSeries
    spectral_eff: MetricSeries
    jensen_lb: MetricSeries
    mutual_info: MetricSeries
    mutual_info_lb: MetricSeries
    closed_form: np.ndarray
    deviation_db: np.ndarray
    shift_db: np.ndarray

    @property
    def series(self) -> dict[str, MetricSeries]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def _resolve_workers(workers: int | None) -> int:
    """Requested worker count capped by CORRMMSE_THREADS."""
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, int(workers))
    cap = os.environ.get("CORRMMSE_THREADS")
    if cap:
        workers = max(1, min(workers, int(cap)))
    return workers


def _trial_metrics_block(
    gain: GainMatrix,
    model: FadingModel,
    gammas: np.ndarray,
    seed: int,
    t_start: int,
    t_stop: int,
) -> np.ndarray:
    """Raw metric values (nb, n_metrics, n_gamma) for one trial block."""
    nb = t_stop - t_start
    k = gain.k
    grams = np.empty((nb, k, k), dtype=np.complex128)
    for i, t in enumerate(range(t_start, t_stop)):
        grams[i] = realize_channel(gain, model, RngStream(seed, t)).gram
    logdet_gram, inv_diag, logdet_reg = sweep_primitives(grams, gammas)
    return metrics_from_primitives(gammas, logdet_gram, inv_diag, logdet_reg, k)


def run_sweep(
    gain: GainMatrix,
    model: FadingModel,
    grid: SnrGrid,
    n_trials: int,
    seed: int,
    workers: int | None = None,
    skip_abort_fraction: float = 0.01,
) -> SweepResult:
    """Estimate all metrics over the grid from n_trials channel instances.

    Trials whose Gram matrix is numerically singular are recorded and
    skipped; the sweep aborts with ExcessiveSkippedTrials when more than
    skip_abort_fraction of them fail.  Deterministic for a fixed seed at
    any worker count.
    """
    n_trials = int(n_trials)
    if n_trials < 2:
        raise ValueError(f"n_trials must be >= 2, got {n_trials}")
    gammas = grid.points
    m = len(grid)

    # shift values for stable accumulation; zero if trial 0 is unusable
    first = _trial_metrics_block(gain, model, gammas, seed, 0, 1)[0]
    shift = np.where(np.isfinite(first), first, 0.0)

    bounds = list(range(0, n_trials, _BLOCK)) + [n_trials]

    def block_task(args) -> tuple:
        t0, t1 = args
        vals = _trial_metrics_block(gain, model, gammas, seed, t0, t1)
        ok = np.all(np.isfinite(vals.reshape(vals.shape[0], -1)), axis=1)
        dev = vals[ok] - shift[np.newaxis]
        return dev.sum(axis=0), (dev * dev).sum(axis=0), int(ok.sum())

    spans = list(zip(bounds[:-1], bounds[1:]))
    n_workers = _resolve_workers(workers)
    if n_workers == 1 or len(spans) == 1:
        partials = [block_task(s) for s in spans]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            partials = list(pool.map(block_task, spans))

    s1 = np.zeros((_N_METRICS, m))
    s2 = np.zeros((_N_METRICS, m))
    n_ok = 0
    for p1, p2, c in partials:  # fixed block order: thread-count invariant
        s1 += p1
        s2 += p2
        n_ok += c

    n_skipped = n_trials - n_ok
    if n_skipped > skip_abort_fraction * n_trials:
        raise ExcessiveSkippedTrials(
            f"{n_skipped}/{n_trials} trials skipped "
            f"(limit {skip_abort_fraction:.1%}); fading parameters produce "
            "numerically singular channels"
        )
    if n_ok < 2:
        raise ExcessiveSkippedTrials("fewer than 2 usable trials")

    mean = shift + s1 / n_ok
    var = np.maximum(s2 - s1 * s1 / n_ok, 0.0) / (n_ok - 1)
    std_error = np.sqrt(var / n_ok)

    series = {
        name: MetricSeries(mean=mean[i].copy(), std_error=std_error[i].copy())
        for i, name in enumerate(METRIC_NAMES)
    }

    closed = closed_form_curve(gain, model)(gammas)
    mean_exact = series["mmse_exact"].mean
    mean_approx = series["mmse_approx"].mean
    deviation_db = 10.0 * np.log10(mean_approx / mean_exact)
    shift_db = _horizontal_shift_db(grid, mean_exact, mean_approx)

    return SweepResult(
        grid=grid,
        seed=int(seed),
        n_trials=n_trials,
        n_effective=n_ok,
        n_skipped=n_skipped,
        closed_form=closed,
        deviation_db=deviation_db,
        shift_db=shift_db,
        **series,
    )


def _horizontal_shift_db(grid: SnrGrid, mean_exact: np.ndarray, mean_approx: np.ndarray) -> np.ndarray:
    """Secondary deviation reading: SNR offset (dB) at equal MMSE level.

    For each grid point, the shift is gamma'_db - gamma_db where the
    interpolated exact-MMSE curve crosses the approximate mean value.
    NaN where the value falls outside the sampled exact range.
    """
    gamma_db = grid.db
    # mean_exact decreases in gamma; np.interp needs ascending x
    xs = mean_exact[::-1]
    ys = gamma_db[::-1]
    out = np.full(len(grid), np.nan)
    inside = (mean_approx >= xs[0]) & (mean_approx <= xs[-1])
    out[inside] = np.interp(mean_approx[inside], xs, ys) - gamma_db[inside]
    return out


@dataclass(frozen=True)
class CrossingReport:
    """Where eps_hat^2 - eps^2 changes sign for one instance."""

    instance_id: int
    gamma_star: float | None
    bracket: tuple[float, float]
    sign_pattern: str


def find_crossing(
    instance: ChannelInstance,
    gamma_max: float,
    tol: float = 1e-6,
    instance_id: int = 0,
) -> CrossingReport:
    """Locate the SNR where the approximation crosses the exact MMSE.

    Scans log-spaced SNRs for a sign change of f = eps_hat^2 - eps^2
    (positive near 0 by AM >= GM, negative at high SNR), then bisects the
    bracket geometrically to relative width tol.  Raises
    DegenerateInstance when all Gram eigenvalues coincide (f == 0
    everywhere).  Reports gamma_star=None if no sign change shows up
    below gamma_max.
    """
    if not gamma_max > 0.0:
        raise ValueError(f"gamma_max must be > 0, got {gamma_max}")
    eig = np.linalg.eigvalsh(instance.gram)
    spread = float(eig[-1] - eig[0])
    if spread <= 1e-10 * max(1.0, float(eig[-1])):
        raise DegenerateInstance(
            f"Gram eigenvalue spread {spread:.3e} too small; "
            "approximation and exact MMSE coincide"
        )

    def f(g: float) -> float:
        return mmse_approx(instance, g) - mmse_exact(instance, g)

    scale = max(float(eig.mean()), 1e-30)
    lo = min(1e-6 / scale, gamma_max / 1e6)
    scan = np.geomspace(lo, gamma_max, 160)
    signs = [f(g) > 0.0 for g in scan]

    bracket = None
    for i in range(len(scan) - 1):
        if signs[i] != signs[i + 1]:
            bracket = (float(scan[i]), float(scan[i + 1]))
            break
    if bracket is None:
        pattern = "all-positive" if signs[0] else "all-negative"
        return CrossingReport(
            instance_id=instance_id,
            gamma_star=None,
            bracket=(float(scan[0]), float(gamma_max)),
            sign_pattern=pattern,
        )

    a, b = bracket
    fa_pos = f(a) > 0.0
    while (b - a) > tol * math.sqrt(a * b):
        mid = math.sqrt(a * b)
        if (f(mid) > 0.0) == fa_pos:
            a = mid
        else:
            b = mid
    gamma_star = math.sqrt(a * b)
    pattern = (
        "positive-below/negative-above" if fa_pos else "negative-below/positive-above"
    )
    return CrossingReport(
        instance_id=instance_id,
        gamma_star=gamma_star,
        bracket=(a, b),
        sign_pattern=pattern,
    )


@dataclass(frozen=True)
class DeviationSummary:
    """Vertical-gap deviation summary of a completed sweep."""

    max_dev_db: float
    argmax_gamma_db: float
    near_exact_gamma_db: float
    near_exact_dev_db: float


def deviation_metric(result: SweepResult) -> DeviationSummary:
    """Max |10 log10(mean eps_hat^2 / mean eps^2)| and the near-exact point."""
    dev = np.abs(result.deviation_db)
    gamma_db = result.grid.db
    i_max = int(np.argmax(dev))
    i_min = int(np.argmin(dev))
    return DeviationSummary(
        max_dev_db=float(dev[i_max]),
        argmax_gamma_db=float(gamma_db[i_max]),
        near_exact_gamma_db=float(gamma_db[i_min]),
        near_exact_dev_db=float(dev[i_min]),
    )
