"""Symmetric tridiagonal systems: storage, direct solve, Galerkin projection."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NotTridiagonal, ParseError, ShapeMismatch, SingularSystem

__all__ = [
    "TridiagonalSystem",
    "thomas_solve",
    "galerkin_project",
    "PIVOT_TOL",
]

PIVOT_TOL = 1e-14


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """Symmetric tridiagonal matrix plus load vector.

    ``lower[k]`` is the entry coupling rows ``k`` and ``k + 1`` on both
    sides of the diagonal, so ``len(lower) == len(diag) - 1``.
    """

    diag: np.ndarray
    lower: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        diag, lower, rhs = _frozen(self.diag), _frozen(self.lower), _frozen(self.rhs)
        if diag.size == 0:
            raise ShapeMismatch("empty system")
        if lower.size != diag.size - 1 or rhs.size != diag.size:
            raise ShapeMismatch(
                f"inconsistent lengths: diag={diag.size}, lower={lower.size}, rhs={rhs.size}"
            )
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "rhs", rhs)

    @property
    def size(self) -> int:
        return self.diag.size

    def to_dense(self, dtype=np.float64) -> np.ndarray:
        a = np.diag(self.diag.astype(dtype))
        if self.size > 1:
            off = self.lower.astype(dtype)
            a += np.diag(off, -1) + np.diag(off, 1)
        return a

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = self.diag * x
        y[1:] += self.lower * x[:-1]
        y[:-1] += self.lower * x[1:]
        return y

    def interior(self) -> "TridiagonalSystem":
        """Drop the first and last rows and columns (homogeneous Dirichlet)."""
        if self.size < 3:
            raise ShapeMismatch("need at least 3 rows to take an interior block")
        return TridiagonalSystem(self.diag[1:-1], self.lower[1:-1], self.rhs[1:-1])

    def with_rhs(self, rhs) -> "TridiagonalSystem":
        return TridiagonalSystem(self.diag, self.lower, rhs)

    def equals(self, other: "TridiagonalSystem") -> bool:
        return (
            np.array_equal(self.diag, other.diag)
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.rhs, other.rhs)
        )

    # JSON interchange: {"diag": [...], "lower": [...], "rhs": [...]}

    def to_dict(self) -> dict:
        return {
            "diag": self.diag.tolist(),
            "lower": self.lower.tolist(),
            "rhs": self.rhs.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data) -> "TridiagonalSystem":
        if not isinstance(data, dict):
            raise ParseError("expected a JSON object with diag, lower and rhs")
        missing = [k for k in ("diag", "lower", "rhs") if k not in data]
        if missing:
            raise ParseError(f"missing keys: {', '.join(missing)}")
        try:
            arrays = [np.asarray(data[k], dtype=np.float64) for k in ("diag", "lower", "rhs")]
        except (TypeError, ValueError) as exc:
            raise ParseError(f"non-numeric entries: {exc}") from exc
        if any(a.ndim != 1 for a in arrays):
            raise ParseError("diag, lower and rhs must be flat arrays")
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ParseError("entries must be finite")
        try:
            return cls(*arrays)
        except ShapeMismatch as exc:
            raise ParseError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "TridiagonalSystem":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TridiagonalSystem":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from exc
        return cls.from_json(text)


def thomas_solve(sys: TridiagonalSystem) -> np.ndarray:
    """Solve ``sys`` by forward elimination and back substitution.

    Raises SingularSystem when a pivot falls below ``PIVOT_TOL`` times the
    largest initial diagonal magnitude.
    """
    n = sys.size
    diag = sys.diag.tolist()
    lower = sys.lower.tolist()
    rhs = sys.rhs.tolist()
    scale = max(abs(d) for d in diag)
    threshold = PIVOT_TOL * scale

    cp = [0.0] * max(n - 1, 0)
    dp = [0.0] * n
    pivot = diag[0]
    for i in range(n):
        if i > 0:
            cp[i - 1] = lower[i - 1] / pivot
            pivot = diag[i] - lower[i - 1] * cp[i - 1]
        # `not >=` also traps NaN pivots
        if not abs(pivot) >= threshold or threshold == 0.0:
            raise SingularSystem(f"pivot {pivot!r} at row {i} below threshold {threshold:.3e}")
        prev = lower[i - 1] * dp[i - 1] if i > 0 else 0.0
        dp[i] = (rhs[i] - prev) / pivot

    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)


def _as_prolongation(prolongation) -> np.ndarray:
    if hasattr(prolongation, "dense_prolongation"):
        return prolongation.dense_prolongation()
    p = np.asarray(prolongation)
    if p.dtype != np.longdouble:
        p = p.astype(np.float64)
    if p.ndim != 2:
        raise ShapeMismatch("prolongation must be a 2-D matrix")
    return p


def galerkin_project(fine: TridiagonalSystem, prolongation, tol: float = 1e-12,
                     zero_row_sums: bool = False) -> TridiagonalSystem:
    """Coarse system ``(P^T A P, P^T b)`` from a dense prolongation.

    ``prolongation`` is either a matrix with one row per fine node or a
    BasisTable.  The band of the product is accumulated in extended
    precision (a long double prolongation is used as given); the full
    float64 product is used only to confirm that nothing survives outside
    the band.

    With ``zero_row_sums`` the fine diagonal is replaced by the negated sum
    of the neighbouring off-diagonals, formed in extended precision.  For
    operators defined through their off-diagonals this is the exact
    diagonal that the stored float64 one rounds.
    """
    p = _as_prolongation(prolongation)
    if p.shape[0] != fine.size:
        raise ShapeMismatch(f"prolongation has {p.shape[0]} rows, fine system has {fine.size}")
    m = p.shape[1]
    if m == 0:
        raise ShapeMismatch("prolongation has no columns")

    p64 = p.astype(np.float64)
    full = p64.T @ (fine.to_dense() @ p64)
    far = np.abs(np.triu(full, 2))
    far = np.maximum(far, np.abs(np.tril(full, -2)))
    if far.size and far.max() > tol:
        k, l = np.unravel_index(np.argmax(far), far.shape)
        raise NotTridiagonal(f"coarse entry ({k}, {l}) = {full[k, l]:.3e} outside the band")

    # A @ P through the three fine diagonals, in long double
    ld = np.longdouble
    pl = p.astype(ld)
    off = fine.lower.astype(ld)[:, None]
    if zero_row_sums:
        d = np.zeros(fine.size, dtype=ld)
        d[:-1] -= off[:, 0]
        d[1:] -= off[:, 0]
    else:
        d = fine.diag.astype(ld)
    ap = d[:, None] * pl
    ap[1:] += off * pl[:-1]
    ap[:-1] += off * pl[1:]

    diag = np.sum(pl * ap, axis=0)
    lower = np.sum(pl[:, 1:] * ap[:, :-1], axis=0)
    rhs = pl.T @ fine.rhs.astype(ld)
    return TridiagonalSystem(diag.astype(np.float64), lower.astype(np.float64), rhs.astype(np.float64))
