"""Command-line front end: configuration, sweep execution, file output.

Configuration precedence is defaults < preset < config file < flags.
Files are flat `key = value` text with `#` comments; unknown keys are
rejected.  SNR is expressed in dB at every user-facing surface and
converted to linear scale exactly once, here.

Exit codes: 0 success, 1 runtime failure, 2 config error, 3 excessive
skipped trials.
"""

from __future__ import annotations

import argparse
import math
import os
import platform
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channel import (
    ChannelInstance,
    CompositeFading,
    FadingModel,
    GainMatrix,
    RainFading,
    UnitFading,
    load_beam_pattern,
    realize_channel,
    synth_beam_pattern,
)
from .detector import (
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
    ExcessiveSkippedTrials,
)
from .montecarlo import SnrGrid, SweepResult, deviation_metric, find_crossing, run_sweep
from .numerics import RngStream, backend_name

_LN10_OVER_10 = math.log(10.0) / 10.0

# Fig.-2-style composite experiment: 7 synthetic beams, Kr = 10 dB,
# shadowing (-2.63, 0.5), 1000 channel instances.
_DEFAULTS: dict[str, str] = {
    "beam": "synthetic",
    "beams": "7",
    "overlap": "0.3",
    "pattern_file": "",
    "fading": "composite",
    "rician_k_db": "10.0",
    "mu_m": "-2.63",
    "sigma": "0.5",
    "db_conversion": "off",
    "mu_units": "natural",
    "snr_db": "-10:30:25",
    "trials": "1000",
    "seed": "1729",
    "out": "corrmmse",
}

PRESETS: dict[str, dict[str, str]] = {
    "composite-fig2": {},
    "rain-fig2": {"fading": "rain"},
}

_CROSSING_SAMPLES = 50
_CROSSING_GAMMA_MAX = 1e6
_CROSSING_TOL = 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description; round-trips through text."""

    beam: str
    beams: int
    overlap: float
    pattern_file: str
    fading: str
    rician_k_db: float
    mu_m: float
    sigma: float
    db_conversion: bool
    mu_units: str
    snr_start_db: float
    snr_stop_db: float
    snr_points: int
    trials: int
    seed: int
    out: str

    def to_config_text(self) -> str:
        lines = [
            f"beam = {self.beam}",
            f"beams = {self.beams}",
            f"overlap = {self.overlap!r}",
            f"pattern_file = {self.pattern_file}",
            f"fading = {self.fading}",
            f"rician_k_db = {self.rician_k_db!r}",
            f"mu_m = {self.mu_m!r}",
            f"sigma = {self.sigma!r}",
            f"db_conversion = {'on' if self.db_conversion else 'off'}",
            f"mu_units = {self.mu_units}",
            f"snr_db = {self.snr_start_db!r}:{self.snr_stop_db!r}:{self.snr_points}",
            f"trials = {self.trials}",
            f"seed = {self.seed}",
            f"out = {self.out}",
        ]
        return "\n".join(lines) + "\n"


def _bad(key: str, value: str, want: str) -> ConfigError:
    return ConfigError(f"key '{key}': expected {want}, got {value!r}")


def _to_choice(key: str, value: str, choices: tuple[str, ...]) -> str:
    v = value.strip().lower()
    if v not in choices:
        raise _bad(key, value, "one of " + "|".join(choices))
    return v


def _to_int(key: str, value: str, minimum: int | None = None) -> int:
    try:
        v = int(value)
    except ValueError:
        raise _bad(key, value, "an integer") from None
    if minimum is not None and v < minimum:
        raise _bad(key, value, f"an integer >= {minimum}")
    return v


def _to_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise _bad(key, value, "a number") from None


def _to_bool(key: str, value: str) -> bool:
    v = value.strip().lower()
    if v in ("on", "true", "1", "yes"):
        return True
    if v in ("off", "false", "0", "no"):
        return False
    raise _bad(key, value, "on|off")


def _resolve(strings: dict[str, str]) -> ExperimentConfig:
    beam = _to_choice("beam", strings["beam"], ("synthetic", "file"))
    beams = _to_int("beams", strings["beams"], minimum=1)
    overlap = _to_float("overlap", strings["overlap"])
    if not 0.0 <= overlap < 1.0:
        raise _bad("overlap", strings["overlap"], "a number in [0, 1)")
    pattern_file = strings["pattern_file"].strip()
    if beam == "file" and not pattern_file:
        raise ConfigError("key 'pattern_file': required when beam = file")
    fading = _to_choice("fading", strings["fading"], ("composite", "rain", "unit"))
    sigma = _to_float("sigma", strings["sigma"])
    if fading != "unit" and not sigma > 0.0:
        raise _bad("sigma", strings["sigma"], "a number > 0")
    parts = strings["snr_db"].split(":")
    if len(parts) != 3:
        raise _bad("snr_db", strings["snr_db"], "start:stop:points")
    start_db = _to_float("snr_db", parts[0])
    stop_db = _to_float("snr_db", parts[1])
    points = _to_int("snr_db", parts[2], minimum=1)
    if points > 1 and not stop_db > start_db:
        raise _bad("snr_db", strings["snr_db"], "stop > start")
    return ExperimentConfig(
        beam=beam,
        beams=beams,
        overlap=overlap,
        pattern_file=pattern_file,
        fading=fading,
        rician_k_db=_to_float("rician_k_db", strings["rician_k_db"]),
        mu_m=_to_float("mu_m", strings["mu_m"]),
        sigma=sigma,
        db_conversion=_to_bool("db_conversion", strings["db_conversion"]),
        mu_units=_to_choice("mu_units", strings["mu_units"], ("natural", "db")),
        snr_start_db=start_db,
        snr_stop_db=stop_db,
        snr_points=points,
        trials=_to_int("trials", strings["trials"], minimum=2),
        seed=_to_int("seed", strings["seed"]),
        out=strings["out"].strip() or "corrmmse",
    )


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _DEFAULTS:
                raise ConfigError(f"unknown key '{key}' (line {lineno})")
            values[key] = value.strip()
    return values


def parse_config(
    path: str | None = None,
    overrides: dict[str, str] | None = None,
    preset: str | None = None,
) -> ExperimentConfig:
    """Merge defaults, preset, config file and flag overrides, then validate.

    Overrides must use config-file keys; unknown keys raise ConfigError.
    """
    strings = dict(_DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset '{preset}'; available: " + ", ".join(sorted(PRESETS))
            )
        strings.update(PRESETS[preset])
    if path is not None:
        strings.update(_read_config_file(path))
    for key, value in (overrides or {}).items():
        if key not in _DEFAULTS:
            raise ConfigError(f"unknown key '{key}'")
        strings[key] = value
    return _resolve(strings)


def build_gain(config: ExperimentConfig) -> GainMatrix:
    if config.beam == "file":
        return load_beam_pattern(config.pattern_file)
    return synth_beam_pattern(config.beams, config.overlap)


def build_fading(config: ExperimentConfig) -> FadingModel:
    """Construct the fading model, applying the mu-units convention.

    mu_units = db reads the composite shadowing parameters as dB-scale
    and converts them to the natural-log units the sampler and closed
    forms share.  Rain parameters describe the dB-domain lognormal by
    definition and are never converted; db_conversion selects the rain
    power mapping only.
    """
    if config.fading == "unit":
        return UnitFading()
    if config.fading == "composite":
        mu, sigma = config.mu_m, config.sigma
        if config.mu_units == "db":
            mu *= _LN10_OVER_10
            sigma *= _LN10_OVER_10
        return CompositeFading(
            rician_factor_db=config.rician_k_db, shadow_mean=mu, shadow_sigma=sigma
        )
    return RainFading(
        lognormal_mu=config.mu_m,
        lognormal_sigma=config.sigma,
        db_conversion=config.db_conversion,
    )


def build_grid(config: ExperimentConfig) -> SnrGrid:
    return SnrGrid.from_db(config.snr_start_db, config.snr_stop_db, config.snr_points)


def _fmt(x) -> str:
    return repr(float(x))


def write_sweep_csv(path: str, result: SweepResult) -> None:
    cols = [
        "gamma_db",
        "mmse_exact_mean",
        "mmse_exact_se",
        "mmse_approx_mean",
        "mmse_approx_se",
        "closed_form",
        "deviation_db",
        "shift_db",
        "spectral_eff_mean",
        "jensen_lb_mean",
        "mutual_info_mean",
        "mutual_info_lb_mean",
        "n_effective",
    ]
    gamma_db = result.grid.db
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(len(result.grid)):
            row = [
                _fmt(gamma_db[i]),
                _fmt(result.mmse_exact.mean[i]),
                _fmt(result.mmse_exact.std_error[i]),
                _fmt(result.mmse_approx.mean[i]),
                _fmt(result.mmse_approx.std_error[i]),
                _fmt(result.closed_form[i]),
                _fmt(result.deviation_db[i]),
                _fmt(result.shift_db[i]),
                _fmt(result.spectral_eff.mean[i]),
                _fmt(result.jensen_lb.mean[i]),
                _fmt(result.mutual_info.mean[i]),
                _fmt(result.mutual_info_lb.mean[i]),
                str(result.n_effective),
            ]
            fh.write(",".join(row) + "\n")


def write_crossings_csv(
    path: str, gain: GainMatrix, model: FadingModel, seed: int, n_instances: int
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("instance,gamma_star,gamma_star_db,bracket_lo,bracket_hi,sign_pattern\n")
        for t in range(n_instances):
            instance = realize_channel(gain, model, RngStream(seed, t))
            try:
                rep = find_crossing(
                    instance, _CROSSING_GAMMA_MAX, _CROSSING_TOL, instance_id=t
                )
            except DegenerateInstance:
                fh.write(f"{t},,,,,degenerate\n")
                continue
            if rep.gamma_star is None:
                fh.write(
                    f"{t},,,{_fmt(rep.bracket[0])},{_fmt(rep.bracket[1])},"
                    f"{rep.sign_pattern}\n"
                )
            else:
                fh.write(
                    f"{t},{_fmt(rep.gamma_star)},"
                    f"{_fmt(10.0 * math.log10(rep.gamma_star))},"
                    f"{_fmt(rep.bracket[0])},{_fmt(rep.bracket[1])},"
                    f"{rep.sign_pattern}\n"
                )


def write_plot_script(path: str, csv_name: str) -> None:
    """Gnuplot script: closed-form line under MC markers, log-y MMSE axis."""
    text = f"""# MMSE vs transmit SNR: Monte Carlo markers over the analytic curve.
# Render with: gnuplot -persist {os.path.basename(path)}
set datafile separator ","
set xlabel "transmit SNR [dB]"
set ylabel "expected per-user MMSE"
set logscale y
set grid
set key bottom left
plot "{csv_name}" skip 1 using 1:6 with lines lw 2 lc rgb "black" title "closed form", \\
     "{csv_name}" skip 1 using 1:4 with points pt 6 ps 1.4 lc rgb "red" title "MC mean, approximation", \\
     "{csv_name}" skip 1 using 1:2 with linespoints pt 2 ps 0.8 dt 2 lc rgb "blue" title "MC mean, exact"
"""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_meta(path: str, config: ExperimentConfig, result: SweepResult) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# corrmmse run metadata; the [config] block reproduces the run\n")
        fh.write(f"corrmmse_version = {__version__}\n")
        fh.write(f"numpy_version = {np.__version__}\n")
        fh.write(f"python_version = {platform.python_version()}\n")
        fh.write(f"kernel_backend = {backend_name()}\n")
        fh.write(f"effective_trials = {result.n_effective}\n")
        fh.write(f"skipped_trials = {result.n_skipped}\n")
        fh.write("\n[config]\n")
        fh.write(config.to_config_text())


def run_experiment(config: ExperimentConfig) -> int:
    """Execute the sweep and write the four output files."""
    gain = build_gain(config)
    if gain.renorm_warning:
        print(f"warning: {gain.renorm_warning}", file=sys.stderr)
    model = build_fading(config)
    grid = build_grid(config)
    result = run_sweep(gain, model, grid, config.trials, config.seed)

    prefix = config.out
    sweep_path = f"{prefix}_sweep.csv"
    write_sweep_csv(sweep_path, result)
    n_cross = min(_CROSSING_SAMPLES, config.trials)
    write_crossings_csv(f"{prefix}_crossings.csv", gain, model, config.seed, n_cross)
    write_plot_script(f"{prefix}_plot.gp", os.path.basename(sweep_path))
    write_meta(f"{prefix}_meta.txt", config, result)

    summary = deviation_metric(result)
    print(
        f"wrote {prefix}_sweep.csv ({len(grid)} points, "
        f"{result.n_effective} trials, {result.n_skipped} skipped)"
    )
    print(f"wrote {prefix}_crossings.csv ({n_cross} instances)")
    print(f"wrote {prefix}_plot.gp")
    print(f"wrote {prefix}_meta.txt")
    print(
        f"max |deviation| {summary.max_dev_db:.3f} dB at "
        f"{summary.argmax_gamma_db:.1f} dB; near-exact at "
        f"{summary.near_exact_gamma_db:.1f} dB ({summary.near_exact_dev_db:.3f} dB)"
    )
    return 0


def _verify_checks(config: ExperimentConfig):
    """Reduced-count invariant battery; yields (name, passed, detail)."""
    gain = build_gain(config)
    model = build_fading(config)
    grid = build_grid(config)
    k = gain.k

    # identity channel: approximation and exact MMSE must coincide with 1/(1+g)
    ident = ChannelInstance.from_h(np.eye(k, dtype=np.complex128))
    worst = 0.0
    for g in grid.points:
        ref = 1.0 / (1.0 + g)
        worst = max(
            worst,
            abs(mmse_exact(ident, g) - ref),
            abs(mmse_approx(ident, g) - ref),
        )
    yield "identity-exactness", worst <= 1e-12, f"max err {worst:.2e}"

    instances = [realize_channel(gain, model, RngStream(config.seed, t)) for t in range(100)]

    # SINR <-> MMSE algebraic identity
    worst = 0.0
    for inst in instances[:20]:
        for g in (0.1, 1.0, 10.0):
            lhs = mmse_exact(inst, g)
            rhs = float(np.mean(1.0 / (1.0 + sinr_mmse(inst, g))))
            worst = max(worst, abs(lhs - rhs))
    yield "sinr-mmse-identity", worst <= 1e-12, f"max err {worst:.2e}"

    # bound directions on sampled (instance, gamma) pairs
    sub = grid.points[:: max(1, len(grid) // 5)]
    total = failures = 0
    for inst in instances:
        for g in sub:
            total += 1
            if spectral_efficiency(inst, g) < jensen_bound(inst, g) - 1e-10:
                failures += 1
            elif mutual_info(inst, g) < mutual_info_minkowski_lb(inst, g) - 1e-10:
                failures += 1
    yield "bound-directions", failures == 0, f"{total - failures}/{total} pairs"

    # I-MMSE derivative identity
    worst = 0.0
    for inst in instances[:20]:
        for g in (0.1, 1.0, 10.0):
            worst = max(worst, immse_residual(inst, g, 1e-5 * g))
    yield "immse-residual", worst < 1e-5 * k, f"max residual {worst:.2e}"

    # Lemma-2 crossings
    found = degenerate = 0
    for t, inst in enumerate(instances):
        try:
            rep = find_crossing(inst, _CROSSING_GAMMA_MAX, _CROSSING_TOL, instance_id=t)
        except DegenerateInstance:
            degenerate += 1
            continue
        if rep.gamma_star is not None:
            found += 1
    nondeg = len(instances) - degenerate
    if nondeg == 0:
        yield "lemma2-crossings", True, "all instances degenerate (no fading)"
    else:
        yield (
            "lemma2-crossings",
            found >= math.ceil(0.99 * nondeg),
            f"{found}/{nondeg} non-degenerate instances",
        )


def run_verification(config: ExperimentConfig) -> int:
    """Print the pass/fail table; exit 0 only when every property holds."""
    all_ok = True
    try:
        for name, ok, detail in _verify_checks(config):
            all_ok &= ok
            print(f"{name:24s} {'PASS' if ok else 'FAIL':4s}  {detail}")
    except CorrMmseError as exc:
        print(f"{'setup':24s} FAIL  {type(exc).__name__}: {exc}")
        return 1
    return 0 if all_ok else 1


def _add_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="FILE", help="config file (key = value lines)")
    sub.add_argument("--preset", choices=sorted(PRESETS), help="named parameter bundle")
    sub.add_argument("--snr-db", metavar="START:STOP:POINTS", dest="snr_db")
    sub.add_argument("--trials", metavar="N")
    sub.add_argument("--seed", metavar="N")
    sub.add_argument("--beams", metavar="K")
    sub.add_argument("--overlap", metavar="X")
    sub.add_argument("--pattern-file", metavar="FILE", dest="pattern_file")
    sub.add_argument("--out", metavar="PREFIX")
    sub.add_argument("--db-conversion", choices=["on", "off"], dest="db_conversion")
    sub.add_argument("--mu-units", choices=["natural", "db"], dest="mu_units")


def _flag_overrides(args: argparse.Namespace) -> dict[str, str]:
    overrides = {}
    for key in (
        "snr_db",
        "trials",
        "seed",
        "beams",
        "overlap",
        "pattern_file",
        "out",
        "db_conversion",
        "mu_units",
    ):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
            if key == "pattern_file":
                overrides["beam"] = "file"
    return overrides


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="corrmmse",
        description="Linear-MMSE performance of fully receive-correlated "
        "multiuser SIMO channels: Monte Carlo sweeps vs closed forms.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_flags(subparsers.add_parser("run", help="run a sweep and write CSV/plot files"))
    _add_flags(subparsers.add_parser("verify", help="run the invariant battery"))
    args = parser.parse_args(argv)

    try:
        config = parse_config(
            path=args.config, overrides=_flag_overrides(args), preset=args.preset
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "run":
            return run_experiment(config)
        return run_verification(config)
    except ExcessiveSkippedTrials as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CorrMmseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
