"""Recover samples of the source antiderivative g from the micro load vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthError

__all__ = ["AntiderivativeSamples", "recover_g", "difference_g"]


@dataclass(frozen=True, eq=False)
class AntiderivativeSamples:
    """g(x_0), g at the N_h micro midpoints, and g(x_{N_h}); g(x_0) is pinned to 0."""

    g0: float
    g_mid: np.ndarray
    g_end: float


def recover_g(rhs) -> AntiderivativeSamples:
    """Prefix sums of the load vector, accumulated strictly left to right."""
    b = np.asarray(rhs, dtype=np.float64).reshape(-1)
    if b.size < 2:
        raise LengthError(f"need a load vector of length >= 2, got {b.size}")
    sums = np.cumsum(b)  # sequential, unlike np.sum
    g_mid = sums[:-1].copy()
    g_mid.flags.writeable = False
    return AntiderivativeSamples(0.0, g_mid, float(sums[-1]))


def difference_g(samples: AntiderivativeSamples) -> np.ndarray:
    """Inverse of :func:`recover_g`: b_0 = g_{1/2} - g_0, b_j = g_{j+1/2} - g_{j-1/2}, ..."""
    g = np.concatenate(([samples.g0], samples.g_mid, [samples.g_end]))
    return np.diff(g)
