"""Seeded random number generation for data synthesis and restarts.

All randomness flows through a Philox counter-based bit generator, keyed
by an explicit integer seed, so any stream can be reproduced from the
seed alone. Gaussian variates are produced by the Box-Muller transform
on Philox uniforms rather than numpy's ziggurat, which keeps the mapping
from seed to sample portable across numpy versions.
"""

import numpy as np


def make_rng(seed):
    """Build a Philox-backed Generator from an integer seed."""
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.Generator(np.random.Philox(key=int(seed)))


def standard_normal(rng, shape):
    """Standard normal variates via Box-Muller on Philox uniforms."""
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    n = int(np.prod(shape)) if shape else 1
    half = (n + 1) // 2
    # 1 - U keeps u1 in (0, 1] so the log is finite
    u1 = 1.0 - rng.random(half)
    u2 = rng.random(half)
    rad = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([rad * np.cos(2.0 * np.pi * u2),
                        rad * np.sin(2.0 * np.pi * u2)])[:n]
    return z.reshape(shape)


def normal(rng, mean, std, shape):
    """Gaussian variates with the given mean and standard deviation."""
    return mean + std * standard_normal(rng, shape)
