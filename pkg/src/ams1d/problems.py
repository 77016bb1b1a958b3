"""Problem catalog: the analytic example, four random-coefficient systems,
and externally supplied micro systems."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateCoefficient, InvalidCount, ParseError, SignStructureError
from .tridiag import TridiagonalSystem

__all__ = [
    "ProblemKind",
    "ProblemSpec",
    "SeededRng",
    "MIN_MAGNITUDE",
    "example1",
    "example_random",
    "load_external",
    "resolve_problem",
    "PROBLEM_NAMES",
]

MIN_MAGNITUDE = 1e-12
EPSILON = 0.1
PROBLEM_NAMES = ("ex1", "ex2", "ex3", "ex4", "ex5")


class SeededRng:
    """Deterministic uniform draws on the open interval (0, 1).

    Backed by numpy's counter-based Philox bit generator, so a seed fixes
    the whole stream independently of platform.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.Philox(self.seed))

    def uniform(self, size: int) -> np.ndarray:
        out = self._gen.random(size)
        # random() is [0, 1); redraw the (rare) exact zeros
        zeros = np.flatnonzero(out == 0.0)
        while zeros.size:
            out[zeros] = self._gen.random(zeros.size)
            zeros = zeros[out[zeros] == 0.0]
        return out


class ProblemKind(enum.Enum):
    ANALYTIC = "analytic"
    RAW_ALGEBRAIC = "raw"
    EXTERNAL = "external"


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Where a micro system comes from.

    Analytic specs carry the coefficient ``A(x)``, an antiderivative ``g``
    of the source and optionally the homogenized solution.  Raw algebraic
    specs carry the drawn off-diagonal magnitudes and load entries.
    External specs wrap a system read from disk.
    """

    name: str
    kind: ProblemKind
    coefficient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    antiderivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    homogenized: Optional[Callable[[np.ndarray], np.ndarray]] = None
    magnitudes: Optional[np.ndarray] = None
    rhs: Optional[np.ndarray] = None
    system: Optional[TridiagonalSystem] = None
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict)


def _ex1_coefficient(x):
    x = np.asarray(x, dtype=np.float64)
    return (2.0 / 3.0) * (1.0 + x) * (1.0 + np.cos(2.0 * np.pi * x / EPSILON) ** 2)


def _ex1_antiderivative(x):
    # f = -1, normalised so that g(0) = 0
    return -np.asarray(x, dtype=np.float64)


def _ex1_homogenized(x):
    x = np.asarray(x, dtype=np.float64)
    return 3.0 / (2.0 * np.sqrt(2.0)) * (x - np.log1p(x) / np.log(2.0))


def example1() -> ProblemSpec:
    """Oscillating coefficient (2/3)(1+x)(1+cos^2(2 pi x / eps)), f = -1."""
    return ProblemSpec(
        name="ex1",
        kind=ProblemKind.ANALYTIC,
        coefficient=_ex1_coefficient,
        antiderivative=_ex1_antiderivative,
        homogenized=_ex1_homogenized,
        meta={"epsilon": EPSILON},
    )


def _variant_magnitudes(variant: int, u: np.ndarray, j: np.ndarray) -> np.ndarray:
    if variant == 2:
        return 2.0 - 0.5 * np.cos(u * 17.7 * j * np.pi)
    if variant == 3:
        return j * (2.0 - 0.5 * np.cos(u * 17.7 * j * np.pi))
    if variant == 4:
        return u.copy()
    if variant == 5:
        return j * u
    raise ValueError(f"unknown random variant {variant}; expected 2, 3, 4 or 5")


def example_random(variant: int, n_intervals: int, rng: SeededRng) -> ProblemSpec:
    """Random-coefficient micro system for variants 2..5.

    Draw order is fixed: one draw per micro interval for the magnitudes
    (plus one redraw for each magnitude below ``MIN_MAGNITUDE``), then one
    draw per micro node for the load vector.
    """
    if variant not in (2, 3, 4, 5):
        raise ValueError(f"unknown random variant {variant}; expected 2, 3, 4 or 5")
    if n_intervals < 1:
        raise InvalidCount(f"need at least one micro interval, got {n_intervals}")
    j = np.arange(1, n_intervals + 1, dtype=np.float64)
    u = rng.uniform(n_intervals)
    c = _variant_magnitudes(variant, u, j)
    small = np.flatnonzero(c < MIN_MAGNITUDE)
    if small.size:
        u[small] = rng.uniform(small.size)
        c[small] = _variant_magnitudes(variant, u[small], j[small])
        if np.any(c < MIN_MAGNITUDE):
            bad = int(np.flatnonzero(c < MIN_MAGNITUDE)[0]) + 1
            raise DegenerateCoefficient(
                f"magnitude at micro interval {bad} below {MIN_MAGNITUDE:g} after redraw"
            )
    b = rng.uniform(n_intervals + 1)
    return ProblemSpec(
        name=f"ex{variant}",
        kind=ProblemKind.RAW_ALGEBRAIC,
        magnitudes=c,
        rhs=b,
        seed=getattr(rng, "seed", None),
        meta={"variant": variant},
    )


def validate_sign_structure(system: TridiagonalSystem, row_sum_tol: float = 1e-10) -> None:
    """Raise on wrong signs; warn when interior row sums go negative."""
    if np.any(system.lower >= 0):
        k = int(np.flatnonzero(system.lower >= 0)[0])
        raise SignStructureError(f"off-diagonal entry {k} is {system.lower[k]!r}; must be negative")
    if np.any(system.diag <= 0):
        k = int(np.flatnonzero(system.diag <= 0)[0])
        raise SignStructureError(f"diagonal entry {k} is {system.diag[k]!r}; must be positive")
    if system.size >= 3:
        sums = system.diag[1:-1] + system.lower[:-1] + system.lower[1:]
        scale = system.diag[1:-1]
        if np.any(sums < -row_sum_tol * scale):
            k = int(np.flatnonzero(sums < -row_sum_tol * scale)[0]) + 1
            warnings.warn(
                f"interior row {k} has negative row sum {sums[k - 1]:.3e}",
                RuntimeWarning,
                stacklevel=2,
            )


def load_external(path) -> ProblemSpec:
    """Wrap a micro system read from a tridiag JSON file."""
    system = TridiagonalSystem.load(path)
    if system.size < 2:
        raise ParseError("an external system needs at least two rows")
    validate_sign_structure(system)
    return ProblemSpec(
        name=f"external:{path}",
        kind=ProblemKind.EXTERNAL,
        system=system,
        meta={"path": str(path)},
    )


def resolve_problem(name: str, n_intervals: int, seed: int) -> ProblemSpec:
    """Look up ``ex1``..``ex5`` or ``external:<path>``."""
    if name == "ex1":
        return example1()
    if name in PROBLEM_NAMES:
        return example_random(int(name[2:]), n_intervals, SeededRng(seed))
    if name.startswith("external:"):
        return load_external(name[len("external:"):])
    raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)} or external:<path>")
