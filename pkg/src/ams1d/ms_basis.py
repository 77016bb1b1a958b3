"""Multiscale basis values at micro nodes.

Inside a macro interval the basis function rising from 0 to 1 is the
normalised running sum of inverse micro off-diagonals, i.e. the discrete
A-harmonic extension of its endpoint values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthError, NonpositiveCoefficient
from .macro_assembly import _check_sums, _lower_of, interval_cumsums
from .meshing import CoarseningMap, MicroMesh
from .problems import ProblemKind, ProblemSpec

__all__ = [
    "BasisTable",
    "reconstruct_basis",
    "analytic_basis",
    "optimal_slope",
    "discrete_energy",
]


@dataclass(frozen=True, eq=False)
class BasisTable:
    """Per macro interval, the rising (plus) and falling (minus) local basis.

    ``plus[k]`` and ``minus[k]`` hold values at the N^K + 1 micro nodes of
    macro interval k + 1.  The hat function of macro node K is ``plus`` on
    the interval to its left and ``minus`` on the interval to its right.
    """

    coarsening: CoarseningMap
    plus: tuple
    minus: tuple

    @property
    def n_micro_nodes(self) -> int:
        return self.coarsening.n_micro + 1

    def prolong(self, eta) -> np.ndarray:
        """Micro nodal values of sum_K eta^K Psi^K."""
        eta = np.asarray(eta, dtype=np.float64)
        if eta.size != self.coarsening.n_macro + 1:
            raise LengthError(f"need {self.coarsening.n_macro + 1} macro coefficients, got {eta.size}")
        u = np.empty(self.n_micro_nodes)
        for k in range(self.coarsening.n_macro):
            u[self.coarsening.node_slice(k)] = eta[k] * self.minus[k] + eta[k + 1] * self.plus[k]
        return u

    def hat(self, node: int) -> np.ndarray:
        """Values of Psi^node at every micro node."""
        n_macro = self.coarsening.n_macro
        if not 0 <= node <= n_macro:
            raise IndexError(f"macro node {node} outside 0..{n_macro}")
        u = np.zeros(self.n_micro_nodes)
        if node > 0:
            u[self.coarsening.node_slice(node - 1)] = self.plus[node - 1]
        if node < n_macro:
            u[self.coarsening.node_slice(node)] = self.minus[node]
        return u

    def dense_prolongation(self) -> np.ndarray:
        """(N_h + 1) x (N_H + 1) matrix; meant for oracles on small meshes."""
        p = np.zeros((self.n_micro_nodes, self.coarsening.n_macro + 1), dtype=self.plus[0].dtype)
        for k in range(self.coarsening.n_macro):
            rows = self.coarsening.node_slice(k)
            p[rows, k] = self.minus[k]
            p[rows, k + 1] = self.plus[k]
        return p


def _table_from_lower(lower, coarsening: CoarseningMap, dtype=np.float64) -> BasisTable:
    cums = interval_cumsums(lower, coarsening, dtype)
    _check_sums(np.array([c[-1] for c in cums], dtype=np.float64))
    plus, minus = [], []
    for c in cums:
        p = c / c[-1]
        # complement over the same denominator keeps plus + minus == 1
        m = 1.0 - p
        p.flags.writeable = False
        m.flags.writeable = False
        plus.append(p)
        minus.append(m)
    return BasisTable(coarsening, tuple(plus), tuple(minus))


def reconstruct_basis(micro, coarsening: CoarseningMap, dtype=np.float64) -> BasisTable:
    """Basis table from the micro off-diagonal entries only.

    ``dtype=np.longdouble`` gives an extended-precision table, useful when
    the table feeds a dense triple-product check.
    """
    return _table_from_lower(_lower_of(micro), coarsening, dtype)


def _midpoint_coefficient(spec: ProblemSpec, mesh: MicroMesh) -> np.ndarray:
    if spec.kind is not ProblemKind.ANALYTIC:
        raise TypeError(f"need an analytic spec, got {spec.kind.value}")
    a_mid = np.asarray(spec.coefficient(mesh.midpoints), dtype=np.float64)
    if not np.all(a_mid > 0):
        k = int(np.flatnonzero(~(a_mid > 0))[0])
        raise NonpositiveCoefficient(f"A({mesh.midpoints[k]:.6g}) = {a_mid[k]!r} is not positive")
    return a_mid


def analytic_basis(spec: ProblemSpec, coarsening: CoarseningMap, mesh: MicroMesh) -> BasisTable:
    """Basis from the closed form int_{X^{K-1}}^x ds/A / int_{I^K} ds/A.

    Both integrals use the midpoint rule in the form sum_j 1/(A_{j-1/2}/h_j).
    """
    coarsening.check_against(mesh)
    return _table_from_lower(-(_midpoint_coefficient(spec, mesh) / mesh.h), coarsening)


def optimal_slope(spec: ProblemSpec, coarsening: CoarseningMap, mesh: MicroMesh,
                  interval: int, sub: int) -> float:
    """Energy-minimising slope on micro sub-interval ``sub`` of macro interval ``interval``.

    Both indices are 1-based.  The slope is beta * h_j / int A over the
    sub-interval, with beta = 1 / int_{I^K} ds/A; all integrals by midpoint rule.
    """
    coarsening.check_against(mesh)
    if not 1 <= interval <= coarsening.n_macro:
        raise IndexError(f"macro interval {interval} outside 1..{coarsening.n_macro}")
    n_sub = int(coarsening.counts[interval - 1])
    if not 1 <= sub <= n_sub:
        raise IndexError(f"sub-interval {sub} outside 1..{n_sub}")
    a_mid = _midpoint_coefficient(spec, mesh)
    h = mesh.h
    seg = coarsening.interval_slice(interval - 1)
    beta = 1.0 / np.cumsum(1.0 / (a_mid[seg] / h[seg]))[-1]
    j = seg.start + sub - 1
    return float(beta * h[j] / (a_mid[j] * h[j]))


def discrete_energy(values, magnitudes) -> float:
    """sum_j c_j (v_j - v_{j-1})^2 for nodal values over a run of micro intervals."""
    dv = np.diff(np.asarray(values, dtype=np.float64))
    return float(np.sum(np.asarray(magnitudes) * dv * dv))
