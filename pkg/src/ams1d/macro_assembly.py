"""Macro-scale system built from micro matrix entries alone.

Everything here is driven by per-macro-interval sums of inverse micro
off-diagonal entries,

    S_K = sum_{j in I^K} 1 / [A^h]_{j, j-1}  (< 0),

which is the midpoint-rule value of -int_{I^K} dx / A.  The macro
off-diagonal is 1 / S_K, and the macro load follows from the recovered
antiderivative samples of the source.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInterval, LengthError
from .meshing import CoarseningMap
from .source_recovery import AntiderivativeSamples, recover_g
from .tridiag import TridiagonalSystem

__all__ = [
    "MacroSystem",
    "interval_cumsums",
    "harmonic_sums",
    "assemble_macro_stiffness",
    "assemble_macro_rhs",
    "assemble_macro",
]


def _lower_of(micro) -> np.ndarray:
    system = getattr(micro, "system", micro)
    return system.lower


def interval_cumsums(lower, coarsening: CoarseningMap, dtype=np.float64) -> list[np.ndarray]:
    """Running sums of ``1 / lower`` inside each macro interval.

    Each array starts at 0 (the left macro node) and ends at S_K; the
    additions run strictly left to right so that S_K is bit-identical
    wherever it is reused.  ``dtype`` selects the accumulation precision.
    """
    lower = np.asarray(lower, dtype=np.float64)
    if lower.size != coarsening.n_micro:
        raise LengthError(
            f"{lower.size} micro off-diagonals but the coarsening spans {coarsening.n_micro}"
        )
    inv = 1.0 / lower.astype(dtype)
    out = []
    for k in range(coarsening.n_macro):
        seg = np.empty(coarsening.counts[k] + 1, dtype=dtype)
        seg[0] = 0.0
        np.cumsum(inv[coarsening.interval_slice(k)], out=seg[1:])
        out.append(seg)
    return out


def harmonic_sums(lower, coarsening: CoarseningMap) -> np.ndarray:
    sums = np.array([seg[-1] for seg in interval_cumsums(lower, coarsening)])
    _check_sums(sums)
    return sums


def _check_sums(sums: np.ndarray) -> None:
    with np.errstate(divide="ignore", over="ignore"):
        flux = 1.0 / sums
    bad = ~(np.isfinite(sums) & np.isfinite(flux) & (flux != 0.0))
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0]) + 1
        raise DegenerateInterval(f"macro interval {k} has harmonic sum {sums[k - 1]!r}")


@dataclass(frozen=True, eq=False)
class MacroSystem:
    system: TridiagonalSystem
    harmonic_sums: np.ndarray
    coarsening: CoarseningMap


def _stiffness(sums: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # signed arithmetic as in the algebraic formulas; S_K < 0 makes diag > 0
    off = 1.0 / sums
    diag = np.empty(sums.size + 1)
    diag[0] = -off[0]
    diag[1:-1] = -off[:-1] - off[1:]
    diag[-1] = -off[-1]
    return diag, off


def assemble_macro_stiffness(micro, coarsening: CoarseningMap) -> MacroSystem:
    """Macro stiffness over nodes 0..N_H (load left at zero)."""
    sums = harmonic_sums(_lower_of(micro), coarsening)
    diag, off = _stiffness(sums)
    system = TridiagonalSystem(diag, off, np.zeros(diag.size))
    return MacroSystem(system, sums, coarsening)


def assemble_macro_rhs(micro, coarsening: CoarseningMap,
                       g: AntiderivativeSamples | None = None,
                       sums: np.ndarray | None = None) -> np.ndarray:
    """Macro load b^H from micro off-diagonals and antiderivative samples.

    For each macro interval the weighted sum ``T_K = sum g_{j-1/2} / lower_j``
    is formed; then b^H_K = T_{K+1}/S_{K+1} - T_K/S_K in the interior,
    b^H_0 = -g(x_0) + T_1/S_1 and b^H_{N_H} = g(x_{N_h}) - T_{N_H}/S_{N_H}.
    """
    lower = _lower_of(micro)
    if g is None:
        g = recover_g(getattr(micro, "system", micro).rhs)
    if g.g_mid.size != lower.size:
        raise LengthError(f"{g.g_mid.size} midpoint samples for {lower.size} micro intervals")
    if sums is None:
        sums = harmonic_sums(lower, coarsening)
    weighted = g.g_mid / lower
    t = np.empty(coarsening.n_macro)
    for k in range(coarsening.n_macro):
        t[k] = np.cumsum(weighted[coarsening.interval_slice(k)])[-1]
    ratio = t / sums

    rhs = np.empty(coarsening.n_macro + 1)
    rhs[0] = -g.g0 + ratio[0]
    rhs[1:-1] = ratio[1:] - ratio[:-1]
    rhs[-1] = g.g_end - ratio[-1]
    return rhs


def assemble_macro(micro, coarsening: CoarseningMap,
                   g: AntiderivativeSamples | None = None) -> MacroSystem:
    """Full macro system (stiffness and load) from the micro system."""
    stiff = assemble_macro_stiffness(micro, coarsening)
    rhs = assemble_macro_rhs(micro, coarsening, g, stiff.harmonic_sums)
    return MacroSystem(stiff.system.with_rhs(rhs), stiff.harmonic_sums, coarsening)
