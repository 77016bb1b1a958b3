"""Micro-scale P1 system: midpoint-rule assembly, raw materialization,
and the Dirichlet reference solve."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateCoefficient, LengthError, NonpositiveCoefficient
from .meshing import MicroMesh, random_micro_mesh, uniform_micro_mesh
from .problems import MIN_MAGNITUDE, ProblemKind, ProblemSpec, SeededRng
from .tridiag import TridiagonalSystem, thomas_solve

__all__ = [
    "MicroSystem",
    "stiffness_from_magnitudes",
    "assemble_micro",
    "materialize_raw",
    "wrap_external",
    "build_micro",
    "micro_reference_solve",
]


@dataclass(frozen=True, eq=False)
class MicroSystem:
    """Full micro system over nodes 0..N_h, boundary rows included."""

    system: TridiagonalSystem
    mesh: MicroMesh
    coefficient_mid: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.system.size != self.mesh.nodes.size:
            raise LengthError(
                f"system has {self.system.size} rows but mesh has {self.mesh.nodes.size} nodes"
            )

    @property
    def n_intervals(self) -> int:
        return self.mesh.n_intervals

    @property
    def lower(self) -> np.ndarray:
        return self.system.lower

    @property
    def magnitudes(self) -> np.ndarray:
        return -self.system.lower


def stiffness_from_magnitudes(c) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal from per-interval magnitudes c_j = A_{j-1/2}/h_j."""
    c = np.asarray(c, dtype=np.float64)
    diag = np.zeros(c.size + 1)
    diag[:-1] += c
    diag[1:] += c
    return diag, -c


def assemble_micro(spec: ProblemSpec, mesh: MicroMesh) -> MicroSystem:
    """Midpoint-rule P1 assembly of -(A u')' = g' on ``mesh``."""
    if spec.kind is not ProblemKind.ANALYTIC:
        raise TypeError(f"assemble_micro needs an analytic spec, got {spec.kind.value}")
    h = mesh.h
    xm = mesh.midpoints
    a_mid = np.asarray(spec.coefficient(xm), dtype=np.float64)
    if not np.all(a_mid > 0):
        k = int(np.flatnonzero(~(a_mid > 0))[0])
        raise NonpositiveCoefficient(f"A({xm[k]:.6g}) = {a_mid[k]!r} is not positive")
    diag, lower = stiffness_from_magnitudes(a_mid / h)

    g_mid = np.asarray(spec.antiderivative(xm), dtype=np.float64)
    g0, g1 = (float(v) for v in spec.antiderivative(np.array([0.0, 1.0])))
    rhs = np.empty(mesh.nodes.size)
    rhs[0] = g_mid[0] - g0
    rhs[1:-1] = g_mid[1:] - g_mid[:-1]
    rhs[-1] = g1 - g_mid[-1]
    return MicroSystem(TridiagonalSystem(diag, lower, rhs), mesh, a_mid)


def materialize_raw(spec: ProblemSpec, n_intervals: Optional[int] = None) -> MicroSystem:
    """Turn drawn magnitudes and loads into a system on a uniform mesh."""
    if spec.kind is not ProblemKind.RAW_ALGEBRAIC:
        raise TypeError(f"materialize_raw needs a raw algebraic spec, got {spec.kind.value}")
    c = np.asarray(spec.magnitudes, dtype=np.float64)
    if n_intervals is not None and c.size != n_intervals:
        raise LengthError(f"spec has {c.size} magnitudes, expected {n_intervals}")
    if np.any(c < MIN_MAGNITUDE):
        k = int(np.flatnonzero(c < MIN_MAGNITUDE)[0]) + 1
        raise DegenerateCoefficient(f"magnitude at micro interval {k} is {c[k - 1]!r}")
    diag, lower = stiffness_from_magnitudes(c)
    system = TridiagonalSystem(diag, lower, spec.rhs)
    return MicroSystem(system, uniform_micro_mesh(c.size))


def wrap_external(spec: ProblemSpec) -> MicroSystem:
    system = spec.system
    return MicroSystem(system, uniform_micro_mesh(system.size - 1))


def build_micro(spec: ProblemSpec, n_intervals: int, mesh_kind: str = "uniform",
                seed: int = 0) -> MicroSystem:
    """Micro system for any spec kind.

    ``mesh_kind`` only matters for analytic specs; raw and external systems
    always get the uniform mesh attached.
    """
    if spec.kind is ProblemKind.ANALYTIC:
        if mesh_kind == "uniform":
            mesh = uniform_micro_mesh(n_intervals)
        elif mesh_kind == "random":
            mesh = random_micro_mesh(n_intervals, SeededRng(seed))
        else:
            raise ValueError(f"unknown mesh kind {mesh_kind!r}")
        return assemble_micro(spec, mesh)
    if spec.kind is ProblemKind.RAW_ALGEBRAIC:
        return materialize_raw(spec, n_intervals)
    return wrap_external(spec)


def micro_reference_solve(micro: MicroSystem) -> np.ndarray:
    """Nodal micro solution with u_0 = u_N = 0."""
    u = np.zeros(micro.system.size)
    if micro.system.size > 2:
        u[1:-1] = thomas_solve(micro.system.interior())
    return u
