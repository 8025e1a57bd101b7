"""Deterministic per-trial random substreams.

A stream is addressed by (master seed, stream index).  Stream index t is
derived from the master seed through SeedSequence spawning on top of the
counter-based Philox generator, so trial t sees exactly the same draws no
matter how trials are scheduled over threads or processes.
"""

from __future__ import annotations

import numpy as np

_SQRT_HALF = np.sqrt(0.5)


class RngStream:
    """One substream of a master seed.

    Instances are cheap to create and must not be shared between threads;
    each Monte Carlo trial owns its own stream.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream = int(stream)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"

    def standard_normal(self, size=None):
        """Real N(0, 1) samples (scalar for size=None)."""
        return self.generator.standard_normal(size)

    def complex_normal(self, size=None):
        """Circularly-symmetric complex normals, E{|z|^2} = 1.

        Real and imaginary parts are independent N(0, 1/2), drawn in a
        fixed (real, imag) order so sequences are reproducible.
        """
        n = 1 if size is None else int(size)
        xy = self.generator.standard_normal((n, 2))
        z = (xy[:, 0] + 1j * xy[:, 1]) * _SQRT_HALF
        return complex(z[0]) if size is None else z

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)
