"""Algebraic multiscale method for 1D elliptic problems.

Given only a micro-scale P1 stiffness system, build the coefficient-adapted
macro system, solve it, and reconstruct the multiscale solution at micro
nodes.
"""

from .errors import (
    AmsError,
    ConfigurationError,
    DegenerateCoefficient,
    DegenerateInterval,
    NumericalError,
    SingularSystem,
)
from .error_norms import ConvergenceReport, convergence_study, energy_norm, l2_error, l2_norm
from .macro_assembly import MacroSystem, assemble_macro, assemble_macro_rhs, assemble_macro_stiffness
from .meshing import CoarseningMap, MicroMesh, build_coarsening, random_micro_mesh, uniform_micro_mesh
from .micro_assembly import MicroSystem, assemble_micro, build_micro, materialize_raw, micro_reference_solve
from .ms_basis import BasisTable, analytic_basis, optimal_slope, reconstruct_basis
from .pipeline import MultiscaleSolution, homogenized_curve, solve_multiscale
from .problems import ProblemSpec, SeededRng, example1, example_random, load_external
from .source_recovery import AntiderivativeSamples, recover_g
from .tridiag import TridiagonalSystem, galerkin_project, thomas_solve

__version__ = "0.1.0"
