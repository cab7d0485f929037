"""Dense linear algebra with explicit rank decisions and kernel bases.

Everything is SVD-backed: rank counts singular values above a relative
cutoff, the pseudoinverse uses the same cutoff, and null-space bases come
from the right singular vectors past the rank, which keeps them orthonormal
and deterministically ordered.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DomainError

DEFAULT_RANK_TOL = 1e-10
DEFAULT_ALIAS_TOL = 1e-9


def _as_matrix(a) -> np.ndarray:
    entries = np.asarray(a, dtype=np.float64)
    if entries.ndim != 2 or entries.size == 0:
        raise DomainError(f"expected a nonempty 2-D matrix, got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise DomainError("matrix entries must be finite")
    return entries


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """A dense real matrix plus the relative tolerance used for rank decisions."""

    entries: np.ndarray
    rank_tol: float = DEFAULT_RANK_TOL

    def __post_init__(self):
        object.__setattr__(self, "entries", _as_matrix(self.entries))
        if self.rank_tol <= 0:
            raise DomainError(f"rank_tol must be positive, got {self.rank_tol}")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def apply(self, x) -> np.ndarray:
        return self.entries @ np.asarray(x, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class NullSpaceBasis:
    """Orthonormal kernel vectors, one per row of ``basis``."""

    basis: np.ndarray
    dim: int

    def vectors(self) -> list[np.ndarray]:
        return [self.basis[i] for i in range(self.dim)]


def _coerce(a) -> LinearOperator:
    return a if isinstance(a, LinearOperator) else LinearOperator(a)


def pseudoinverse(a) -> LinearOperator:
    """Moore-Penrose inverse, singular values below the rank cutoff dropped."""
    op = _coerce(a)
    return LinearOperator(np.linalg.pinv(op.entries, rcond=op.rank_tol), op.rank_tol)


def rank(a) -> int:
    op = _coerce(a)
    s = np.linalg.svd(op.entries, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > op.rank_tol * s[0]))


def null_space_basis(a) -> NullSpaceBasis:
    """Orthonormal basis of the kernel; dim equals cols minus rank."""
    op = _coerce(a)
    _, s, vh = np.linalg.svd(op.entries)
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.sum(s > op.rank_tol * s[0]))
    kernel = vh[r:]
    return NullSpaceBasis(kernel, kernel.shape[0])


def find_alias_pair(
    a,
    domain: Sequence[np.ndarray],
    *,
    tol: float = DEFAULT_ALIAS_TOL,
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """First pair of distinct domain vectors with equal images, scan in order."""
    op = _coerce(a)
    vectors = [np.asarray(v, dtype=np.float64) for v in domain]
    for v in vectors:
        if v.shape != (op.cols,):
            raise DomainError(
                f"domain vector of shape {v.shape} does not match cols {op.cols}"
            )
    images = [op.apply(v) for v in vectors]
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            if np.array_equal(vectors[i], vectors[j]):
                continue
            if float(np.linalg.norm(images[i] - images[j])) <= tol:
                return vectors[i], vectors[j]
    return None


def save_matrix_csv(a, path) -> None:
    op = _coerce(a)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in op.entries:
            writer.writerow([repr(float(v)) for v in row])


def load_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for record in csv.reader(fh):
            if record:
                rows.append([float(v) for v in record])
    if not rows:
        raise ConfigError(f"{path}: empty matrix file")
    return _as_matrix(rows)


def matrix_to_json_obj(a) -> dict:
    op = _coerce(a)
    return {
        "rows": op.rows,
        "cols": op.cols,
        "data": [[float(v) for v in row] for row in op.entries],
    }


def matrix_from_json_obj(obj) -> np.ndarray:
    if not isinstance(obj, dict) or set(obj) != {"rows", "cols", "data"}:
        raise ConfigError("matrix record must have exactly keys rows, cols, data")
    entries = _as_matrix(obj["data"])
    if entries.shape != (obj["rows"], obj["cols"]):
        raise ConfigError(
            f"matrix record claims shape {(obj['rows'], obj['cols'])}, "
            f"data has {entries.shape}"
        )
    return entries


def save_matrix_json(a, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_json_obj(a), fh, indent=2)
        fh.write("\n")


def load_matrix_json(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return matrix_from_json_obj(obj)
