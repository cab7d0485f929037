"""Least-squares approximation of deep predicates by shallow basis families.

Truth values embed as reals {0, 1}; a target predicate is fit by the
minimum-norm least-squares combination of the basis truth columns, with an
optional intercept column capturing the "generally true / generally false"
part.  The sum of squared errors over the whole input space is the amount
of logical content the basis cannot carry, and its root mean square is
reported as the hallucination score of the approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .predicates import Predicate, PredicateFamily

# below this sum of squared errors a target counts as exactly in span
SSE_SNAP_TOL = 1e-12
PROJECTION_TOL = 1e-9

APPROX_CSV_FIELDS = (
    "target",
    "basis_size",
    "residual_sse",
    "rms_score",
    "in_span",
    "depth_target",
    "depth_basis_max",
)


@dataclass(frozen=True)
class ApproxReport:
    target_id: str
    basis_ids: tuple[str, ...]
    alpha: tuple[float, ...]
    intercept: Optional[float]
    residual_sse: float
    rms_score: float
    in_span: bool
    depth_target: int
    depth_basis_max: int

    def __post_init__(self):
        if (self.residual_sse == 0.0) != self.in_span:
            raise DomainError("residual_sse must be zero exactly when in_span")
        if len(self.alpha) != len(self.basis_ids):
            raise DomainError("alpha length must equal basis size")

    def to_csv_row(self) -> list[str]:
        return [
            self.target_id,
            str(len(self.basis_ids)),
            repr(self.residual_sse),
            repr(self.rms_score),
            str(self.in_span).lower(),
            str(self.depth_target),
            str(self.depth_basis_max),
        ]

    def to_json_obj(self) -> dict:
        return {
            "target": self.target_id,
            "basis_ids": list(self.basis_ids),
            "alpha": list(self.alpha),
            "intercept": self.intercept,
            "residual_sse": self.residual_sse,
            "rms_score": self.rms_score,
            "in_span": self.in_span,
            "depth_target": self.depth_target,
            "depth_basis_max": self.depth_basis_max,
        }


def _design_matrix(basis: PredicateFamily, affine: bool) -> np.ndarray:
    cols = [m.to_array() for m in basis]
    if affine:
        cols.append(np.ones(basis.universe.size))
    return np.column_stack(cols)


def approximate_vector(
    target: Sequence[float], basis: PredicateFamily, affine: bool
) -> tuple[np.ndarray, Optional[float], np.ndarray, float]:
    """Minimum-norm least-squares fit of a real-valued target.

    Returns (alpha, intercept, fitted, residual_sse); tiny residuals snap to
    exactly zero.
    """
    if len(basis) == 0:
        raise DomainError("basis must be nonempty")
    y = np.asarray(target, dtype=np.float64)
    if y.shape != (basis.universe.size,):
        raise DomainError(
            f"target length {y.shape} does not match universe size {basis.universe.size}"
        )
    a = _design_matrix(basis, affine)
    solution, _, _, _ = np.linalg.lstsq(a, y, rcond=None)
    fitted = a @ solution
    sse = float(np.sum((fitted - y) ** 2))
    if sse <= SSE_SNAP_TOL:
        sse = 0.0
    n_members = len(basis)
    alpha = solution[:n_members]
    intercept = float(solution[n_members]) if affine else None
    return alpha, intercept, fitted, sse


def approximate(p: Predicate, basis: PredicateFamily, affine: bool = True) -> ApproxReport:
    """Fit p over the basis truth columns; the residual is exact over all inputs."""
    if len(basis) == 0:
        raise DomainError("basis must be nonempty")
    if basis.universe != p.universe:
        raise DomainError("target and basis must share one universe")
    alpha, intercept, _, sse = approximate_vector(p.to_array(), basis, affine)
    rms = math.sqrt(sse / p.universe.size)
    return ApproxReport(
        target_id=p.name,
        basis_ids=basis.member_names(),
        alpha=tuple(float(v) for v in alpha),
        intercept=intercept,
        residual_sse=sse,
        rms_score=rms,
        in_span=(sse == 0.0),
        depth_target=p.depth,
        depth_basis_max=max(m.depth for m in basis),
    )


def hallucination_score(p: Predicate, basis: PredicateFamily, affine: bool = True) -> float:
    """Root-mean-square residual of the best fit; 0 iff the target is in span."""
    return approximate(p, basis, affine).rms_score


def alias_classes(
    basis: PredicateFamily,
    candidates: PredicateFamily,
    affine: bool = True,
    *,
    tol: float = PROJECTION_TOL,
) -> list[list[str]]:
    """Group candidates whose projections onto the basis span coincide.

    Classes are ordered by first appearance; each candidate joins the first
    class whose representative projection is within tol.
    """
    if len(basis) == 0 or len(candidates) == 0:
        raise DomainError("basis and candidates must be nonempty")
    if basis.universe != candidates.universe:
        raise DomainError("basis and candidates must share one universe")
    classes: list[list[str]] = []
    representatives: list[np.ndarray] = []
    for candidate in candidates:
        _, _, fitted, _ = approximate_vector(candidate.to_array(), basis, affine)
        for idx, rep in enumerate(representatives):
            if float(np.linalg.norm(fitted - rep)) <= tol:
                classes[idx].append(candidate.name)
                break
        else:
            classes.append([candidate.name])
            representatives.append(fitted)
    return classes
