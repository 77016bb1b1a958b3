"""Micro meshes on [0, 1] and the macro/micro coarsening map."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidCount, LengthError, TooCoarse

__all__ = [
    "MicroMesh",
    "CoarseningMap",
    "uniform_micro_mesh",
    "random_micro_mesh",
    "mesh_from_increments",
    "build_coarsening",
    "identity_coarsening",
]

# distances closer than this count as a tie when picking macro nodes
_TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MicroMesh:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=np.float64).reshape(-1)
        if nodes.size < 2:
            raise LengthError("a mesh needs at least two nodes")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise ValueError("mesh must start at 0 and end at 1")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("mesh nodes must be strictly increasing")
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_intervals(self) -> int:
        return self.nodes.size - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    def to_json(self) -> str:
        return json.dumps(self.nodes.tolist())

    @classmethod
    def from_json(cls, text: str) -> "MicroMesh":
        return cls(json.loads(text))


def uniform_micro_mesh(n_intervals: int) -> MicroMesh:
    if n_intervals < 1:
        raise InvalidCount(f"need at least one micro interval, got {n_intervals}")
    return MicroMesh(np.arange(n_intervals + 1) / n_intervals)


def mesh_from_increments(draws) -> MicroMesh:
    """Mesh from the recurrence ``y[j+1] = y[j] + 2 u[j] / N``, scaled to end at 1."""
    u = np.asarray(draws, dtype=np.float64)
    n = u.size
    if n < 1:
        raise InvalidCount("need at least one draw")
    if np.any(u <= 0):
        raise ValueError("increments must be positive")
    y = np.concatenate(([0.0], np.cumsum(2.0 * u / n)))
    x = y / y[-1]
    x[-1] = 1.0
    return MicroMesh(x)


def random_micro_mesh(n_intervals: int, rng) -> MicroMesh:
    """Randomly perturbed mesh; ``rng`` needs a ``uniform(size)`` method."""
    if n_intervals < 1:
        raise InvalidCount(f"need at least one micro interval, got {n_intervals}")
    return mesh_from_increments(rng.uniform(n_intervals))


@dataclass(frozen=True, eq=False)
class CoarseningMap:
    """Macro nodes X^0..X^N_H as indices into the micro node array."""

    macro_node_indices: np.ndarray

    def __post_init__(self):
        idx = np.array(self.macro_node_indices, dtype=np.int64).reshape(-1)
        if idx.size < 2:
            raise TooCoarse("need at least one macro interval")
        if idx[0] != 0:
            raise ValueError("first macro node must be micro node 0")
        if not np.all(np.diff(idx) >= 1):
            raise ValueError("macro node indices must be strictly increasing")
        idx.flags.writeable = False
        object.__setattr__(self, "macro_node_indices", idx)

    @property
    def n_macro(self) -> int:
        """Number of macro intervals N_H."""
        return self.macro_node_indices.size - 1

    @property
    def n_micro(self) -> int:
        return int(self.macro_node_indices[-1])

    @property
    def counts(self) -> np.ndarray:
        """Micro intervals inside each macro interval (N^K)."""
        return np.diff(self.macro_node_indices)

    def interval_slice(self, k: int) -> slice:
        """Micro interval positions (0-based, interval j at position j-1) of I^{k+1}."""
        idx = self.macro_node_indices
        return slice(int(idx[k]), int(idx[k + 1]))

    def node_slice(self, k: int) -> slice:
        """Micro node indices of the closed macro interval I^{k+1}."""
        idx = self.macro_node_indices
        return slice(int(idx[k]), int(idx[k + 1]) + 1)

    def check_against(self, mesh: MicroMesh) -> None:
        if self.n_micro != mesh.n_intervals:
            raise LengthError(
                f"coarsening ends at node {self.n_micro}, mesh has {mesh.n_intervals} intervals"
            )

    def is_refined_by(self, other: "CoarseningMap") -> bool:
        return bool(np.all(np.isin(self.macro_node_indices, other.macro_node_indices)))


def identity_coarsening(n_intervals: int) -> CoarseningMap:
    return CoarseningMap(np.arange(n_intervals + 1))


def build_coarsening(mesh: MicroMesh, n_macro: int) -> CoarseningMap:
    """Pick macro nodes as the micro nodes nearest to ``K / n_macro``.

    Ties go to the lower index.  Picks are then pushed apart so that every
    macro interval holds at least one micro interval.
    """
    n_micro = mesh.n_intervals
    if n_macro < 1:
        raise InvalidCount(f"need at least one macro interval, got {n_macro}")
    if n_macro > n_micro:
        raise TooCoarse(f"cannot place {n_macro} macro intervals on {n_micro} micro intervals")

    x = mesh.nodes
    targets = np.arange(n_macro + 1) / n_macro
    right = np.clip(np.searchsorted(x, targets, side="left"), 1, n_micro)
    left = right - 1
    d_left = targets - x[left]
    d_right = x[right] - targets
    idx = np.where(d_right < d_left - _TIE_TOL, right, left)
    idx[0], idx[-1] = 0, n_micro

    k = np.arange(n_macro + 1)
    idx = np.clip(idx, k, n_micro - n_macro + k)
    for i in range(1, n_macro + 1):
        if idx[i] <= idx[i - 1]:
            idx[i] = idx[i - 1] + 1
    return CoarseningMap(idx)
