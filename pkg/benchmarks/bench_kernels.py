"""Benchmark: compiled Cython kernels vs the NumPy fallback.

Times the sweep hot path (per-trial Cholesky of I + gamma*G over an SNR
grid) on both backends and cross-checks their outputs.  Run with:

    python benchmarks/bench_kernels.py [--trials 4096] [--k 7] [--points 25]
"""

import argparse
import time

import numpy as np

from corrmmse.channel import CompositeFading, realize_channel, synth_beam_pattern
from corrmmse.numerics import RngStream
from corrmmse.numerics import _kernels_py


def make_grams(n: int, k: int) -> np.ndarray:
    gain = synth_beam_pattern(k, 0.3)
    model = CompositeFading(10.0, -2.63, 0.5)
    grams = np.empty((n, k, k), dtype=np.complex128)
    for t in range(n):
        grams[t] = realize_channel(gain, model, RngStream(99, t)).gram
    return grams


def bench(fn, grams, gammas, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(grams, gammas)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=4096)
    ap.add_argument("--k", type=int, default=7)
    ap.add_argument("--points", type=int, default=25)
    args = ap.parse_args()

    try:
        from corrmmse.numerics import _kernels
    except ImportError:
        _kernels = None

    grams = make_grams(args.trials, args.k)
    gammas = np.geomspace(0.1, 1000.0, args.points)
    pairs = args.trials * args.points

    t_py = bench(_kernels_py.sweep_metrics, grams, gammas)
    print(f"numpy fallback : {t_py:8.3f} s  ({1e6 * t_py / pairs:7.2f} us per (trial, SNR) pair)")

    if _kernels is None:
        print("compiled kernel: not built (python setup.py build_ext --inplace)")
        return 0

    t_c = bench(_kernels.sweep_metrics, grams, gammas)
    print(f"compiled kernel: {t_c:8.3f} s  ({1e6 * t_c / pairs:7.2f} us per (trial, SNR) pair)")
    print(f"speedup        : {t_py / t_c:8.2f} x")

    ld_py, diag_py, reg_py = _kernels_py.sweep_metrics(grams, gammas)
    ld_c, diag_c, reg_c = _kernels.sweep_metrics(grams, gammas)
    worst = max(
        np.max(np.abs(ld_py - ld_c)),
        np.max(np.abs(diag_py - diag_c)),
        np.max(np.abs(reg_py - reg_c)),
    )
    print(f"backend agreement: max |difference| {worst:.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
