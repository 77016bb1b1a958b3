"""End-to-end multiscale solve: micro system in, micro nodal values out."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NoHomogenizedReference, stage
from .macro_assembly import MacroSystem, assemble_macro
from .meshing import CoarseningMap, MicroMesh
from .micro_assembly import MicroSystem, micro_reference_solve
from .ms_basis import BasisTable, reconstruct_basis
from .problems import ProblemSpec
from .source_recovery import recover_g
from .tridiag import thomas_solve

__all__ = ["MultiscaleSolution", "solve_macro", "solve_multiscale", "homogenized_curve"]


@dataclass(frozen=True, eq=False)
class MultiscaleSolution:
    eta: np.ndarray
    u_ms: np.ndarray
    u_ref: Optional[np.ndarray]
    macro: MacroSystem
    basis: BasisTable
    u_hom: Optional[np.ndarray] = None


def solve_macro(macro: MacroSystem) -> np.ndarray:
    """Macro nodal coefficients with eta^0 = eta^{N_H} = 0."""
    eta = np.zeros(macro.system.size)
    if macro.system.size > 2:
        eta[1:-1] = thomas_solve(macro.system.interior())
    return eta


def solve_multiscale(micro: MicroSystem, coarsening: CoarseningMap,
                     reference: bool = True, u_ref: Optional[np.ndarray] = None) -> MultiscaleSolution:
    """Recover g, assemble and solve the macro system, prolong to micro nodes.

    The micro reference solve is skipped when ``reference`` is false or a
    precomputed ``u_ref`` is passed in.
    """
    coarsening.check_against(micro.mesh)
    with stage("source recovery"):
        g = recover_g(micro.system.rhs)
    with stage("macro assembly"):
        macro = assemble_macro(micro, coarsening, g)
    with stage("basis reconstruction"):
        basis = reconstruct_basis(micro, coarsening)
    with stage("macro solve"):
        eta = solve_macro(macro)
    u_ms = basis.prolong(eta)
    if u_ref is None and reference:
        with stage("micro reference solve"):
            u_ref = micro_reference_solve(micro)
    return MultiscaleSolution(eta, u_ms, u_ref, macro, basis)


def homogenized_curve(spec: ProblemSpec, mesh: MicroMesh) -> np.ndarray:
    if spec.homogenized is None:
        raise NoHomogenizedReference(f"problem {spec.name} has no homogenized solution")
    return np.asarray(spec.homogenized(mesh.nodes), dtype=np.float64)
