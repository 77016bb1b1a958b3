"""Energy and L2 error measures, reduction orders, and convergence studies."""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidCount, LengthError, TooCoarse, ZeroReference, stage
from .meshing import MicroMesh, build_coarsening
from .micro_assembly import MicroSystem, build_micro, micro_reference_solve
from .pipeline import solve_multiscale
from .problems import ProblemSpec, resolve_problem

__all__ = [
    "energy_norm",
    "l2_norm",
    "l2_error",
    "reduction_orders",
    "ConvergenceRow",
    "ConvergenceReport",
    "convergence_study",
    "CSV_HEADER",
]

CSV_HEADER = "N_H,e_energy,order_energy,e_L2,order_L2"


def energy_norm(u, micro: MicroSystem) -> float:
    """sqrt(sum_j |[A^h]_{j,j-1}| (u_j - u_{j-1})^2).

    The magnitude of the (negative) off-diagonal is used so the sum is a
    proper nonnegative quadratic form.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.size != micro.system.size:
        raise LengthError(f"{u.size} nodal values for {micro.system.size} micro nodes")
    du = np.diff(u)
    return float(np.sqrt(np.sum(np.abs(micro.system.lower) * du * du)))


def l2_norm(w, mesh: MicroMesh) -> float:
    """Exact L2 norm of the piecewise-linear interpolant of nodal values ``w``."""
    w = np.asarray(w, dtype=np.float64)
    if w.size != mesh.nodes.size:
        raise LengthError(f"{w.size} nodal values for {mesh.nodes.size} mesh nodes")
    a, b = w[:-1], w[1:]
    return float(np.sqrt(np.sum(mesh.h / 3.0 * (a * a + a * b + b * b))))


def l2_error(u, v, mesh: MicroMesh) -> float:
    """||u - v|| / ||v|| in L2 for piecewise-linear nodal data."""
    denom = l2_norm(v, mesh)
    if denom == 0.0:
        raise ZeroReference("reference function has zero L2 norm")
    return l2_norm(np.asarray(u) - np.asarray(v), mesh) / denom


def reduction_orders(coarse_counts: Sequence[int], errors: Sequence[float]) -> list[Optional[float]]:
    """log(e_prev / e_cur) / log(N_cur / N_prev), reported on the finer row."""
    orders: list[Optional[float]] = [None]
    for i in range(1, len(errors)):
        e0, e1 = errors[i - 1], errors[i]
        if e0 > 0 and e1 > 0:
            orders.append(math.log(e0 / e1) / math.log(coarse_counts[i] / coarse_counts[i - 1]))
        else:
            orders.append(None)
    return orders


@dataclass
class ConvergenceRow:
    n_macro: int
    e_energy: float
    order_energy: Optional[float]
    e_l2: float
    order_l2: Optional[float]


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow]
    metadata: dict = field(default_factory=dict)

    @property
    def energy_errors(self) -> np.ndarray:
        return np.array([r.e_energy for r in self.rows])

    @property
    def l2_errors(self) -> np.ndarray:
        return np.array([r.e_l2 for r in self.rows])

    @property
    def energy_orders(self) -> list[Optional[float]]:
        return [r.order_energy for r in self.rows]

    @property
    def l2_orders(self) -> list[Optional[float]]:
        return [r.order_l2 for r in self.rows]

    def to_csv(self) -> str:
        def order(v):
            return "" if v is None else f"{v:.2f}"

        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(
                f"{r.n_macro},{r.e_energy:.2E},{order(r.order_energy)},"
                f"{r.e_l2:.2E},{order(r.order_l2)}\n"
            )
        return buf.getvalue()

    def to_json(self, timestamp: Optional[str] = None) -> str:
        meta = dict(self.metadata)
        if timestamp is not None:
            meta["timestamp"] = timestamp
        payload = {"metadata": meta, "rows": [asdict(r) for r in self.rows]}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def format_table(self) -> str:
        lines = [f"{'N_H':>6} {'e_energy':>10} {'order':>6} {'e_L2':>10} {'order':>6}"]
        for r in self.rows:
            oe = "" if r.order_energy is None else f"{r.order_energy:.2f}"
            ol = "" if r.order_l2 is None else f"{r.order_l2:.2f}"
            lines.append(f"{r.n_macro:>6} {r.e_energy:>10.2E} {oe:>6} {r.e_l2:>10.2E} {ol:>6}")
        return "\n".join(lines)


def convergence_study(problem, n_intervals: int, coarse_counts: Sequence[int],
                      seed: int = 0, mesh_kind: str = "uniform") -> ConvergenceReport:
    """Relative errors of the multiscale solution against the micro solution.

    One micro system is built (from ``problem``, a name or a ProblemSpec)
    and reused for every entry of ``coarse_counts``.  The energy error is
    relative to the micro solution; the L2 error is relative to the
    multiscale solution.
    """
    counts = [int(n) for n in coarse_counts]
    if not counts:
        raise InvalidCount("need at least one macro interval count")
    if any(n < 1 for n in counts):
        raise InvalidCount(f"macro interval counts must be positive: {counts}")
    with stage("problem setup"):
        spec = problem if isinstance(problem, ProblemSpec) else resolve_problem(problem, n_intervals, seed)
    with stage("micro assembly"):
        micro = build_micro(spec, n_intervals, mesh_kind, seed)
    if any(n > micro.n_intervals for n in counts):
        raise TooCoarse(f"macro counts {counts} exceed {micro.n_intervals} micro intervals")

    with stage("micro reference solve"):
        u_ref = micro_reference_solve(micro)
    e_ref = energy_norm(u_ref, micro)
    energy, l2 = [], []
    for n in counts:
        with stage(f"coarsening (N_H={n})"):
            coarsening = build_coarsening(micro.mesh, n)
        sol = solve_multiscale(micro, coarsening, u_ref=u_ref)
        diff = sol.u_ms - u_ref
        energy.append(energy_norm(diff, micro) / e_ref if e_ref > 0 else 0.0)
        try:
            l2.append(l2_error(u_ref, sol.u_ms, micro.mesh))
        except ZeroReference:
            l2.append(0.0 if not np.any(diff) else math.inf)

    oe = reduction_orders(counts, energy)
    ol = reduction_orders(counts, l2)
    rows = [ConvergenceRow(n, e, a, l, b) for n, e, a, l, b in zip(counts, energy, oe, l2, ol)]
    metadata = {
        "problem": spec.name,
        "n_micro": micro.n_intervals,
        "mesh": mesh_kind if spec.kind.value == "analytic" else "uniform (attached)",
        "seed": seed,
        "energy_reference": "u_ref",
        "l2_reference": "u_ms",
    }
    return ConvergenceReport(rows, metadata)
