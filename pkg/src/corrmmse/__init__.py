"""Linear-MMSE performance of multiuser SIMO channels with full receive
correlation, H = B * D^(1/2): per-instance metrics, Monte Carlo sweeps,
and closed-form expected-MMSE curves for composite and rain fading."""

__version__ = "0.1.0"

from .channel import (
    ChannelInstance,
    CompositeFading,
    FadingModel,
    GainMatrix,
    RainFading,
    UnitFading,
    gain_from_matrix,
    load_beam_pattern,
    realize_channel,
    sample_fading,
    save_beam_pattern,
    synth_beam_pattern,
)
from .closedform import (
    ClosedFormCurve,
    closed_form_curve,
    expected_logdet,
    expected_mmse_composite,
    expected_mmse_rain,
    jensen_direction,
    rician_log_moment,
)
from .detector import (
    InstanceMetrics,
    compute_metrics,
    immse_residual,
    jensen_bound,
    mmse_approx,
    mmse_exact,
    mutual_info,
    mutual_info_minkowski_lb,
    sinr_mmse,
    spectral_efficiency,
)
from .errors import (
    ConfigError,
    CorrMmseError,
    DegenerateInstance,
    DomainError,
    ExcessiveSkippedTrials,
    NotPositiveDefinite,
    NotSquare,
    ParseError,
    RankDeficient,
    SingularChannel,
)
from .montecarlo import (
    CrossingReport,
    DeviationSummary,
    MetricSeries,
    SnrGrid,
    SweepResult,
    deviation_metric,
    find_crossing,
    run_sweep,
)
from .numerics import (
    RngStream,
    backend_name,
    exp_integral_e1,
    gram,
    invert_regularized,
    logdet_hpd,
)
