"""Width-bounded representability of predicates by linear threshold units.

A single threshold unit over a feature set decides a predicate when some
affine combination of the feature truth values reproduces it with a strict
margin on every input.  The decision runs on the deduplicated feature-space
image of the input space: two inputs with the same feature vector but
opposite target values rule separation out immediately, everything else goes
to an exact rational feasibility solve (small systems) or an LP margin
maximization (large ones).  Width-w representability then quantifies over
feature subsets of size at most w in a fixed deterministic order.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BudgetExceededError, DomainError
from .exact_lp import solve_strict_separation
from .netcompile import PredicateCircuit
from .predicates import MAX_ATOMS, Predicate, PredicateFamily, at_least_k_true, atoms_family

DEFAULT_MARGIN = 1e-6
DEFAULT_SUBSET_BUDGET = 10**6

# Beyond this many distinct feature rows the exact rational solve gives way
# to a floating-point LP (covers every universe of <= 8 atoms exactly).
_EXACT_ROW_LIMIT = 256

CAPACITY_CSV_FIELDS = (
    "w",
    "n",
    "subsets_tested",
    "representable",
    "witness_weights",
    "witness_bias",
    "elapsed_s",
)


@dataclass(frozen=True)
class SeparabilityWitness:
    """An affine separator over named features, valid with a strict margin."""

    feature_ids: tuple[str, ...]
    weights: tuple[float, ...]
    bias: float


@dataclass(frozen=True)
class CapacityReport:
    w: int
    n: int
    subsets_tested: int
    representable: bool
    witness: Optional[SeparabilityWitness]
    elapsed: float

    def __post_init__(self):
        if self.representable != (self.witness is not None):
            raise DomainError("representable must match witness presence")

    def to_csv_row(self) -> list[str]:
        if self.witness is None:
            weights, bias = "", ""
        else:
            weights = ";".join(repr(v) for v in self.witness.weights)
            bias = repr(self.witness.bias)
        return [
            str(self.w),
            str(self.n),
            str(self.subsets_tested),
            str(self.representable).lower(),
            weights,
            bias,
            repr(self.elapsed),
        ]

    def to_json_obj(self) -> dict:
        obj = {
            "w": self.w,
            "n": self.n,
            "subsets_tested": self.subsets_tested,
            "representable": self.representable,
            "witness_weights": list(self.witness.weights) if self.witness else None,
            "witness_bias": self.witness.bias if self.witness else None,
            "elapsed_s": self.elapsed,
        }
        if self.witness is not None:
            obj["witness_feature_ids"] = list(self.witness.feature_ids)
        return obj


def witness_margin(p: Predicate, features: PredicateFamily, witness: SeparabilityWitness) -> float:
    """Smallest signed margin of the witness over all inputs; >0 means correct."""
    by_name = {m.name: m for m in features}
    cols = [by_name[fid].to_array() for fid in witness.feature_ids]
    values = np.zeros(p.universe.size)
    for wgt, col in zip(witness.weights, cols):
        values += wgt * col
    values += witness.bias
    signs = np.where(p.to_array() > 0.5, 1.0, -1.0)
    return float(np.min(signs * values))


def is_linearly_separable(
    p: Predicate,
    features: PredicateFamily,
    *,
    margin: float = DEFAULT_MARGIN,
) -> tuple[bool, Optional[SeparabilityWitness]]:
    """Decide whether a threshold over the given features reproduces p exactly.

    Returns (feasible, witness); any returned witness re-verifies on every
    input with at least the requested margin.
    """
    if len(features) == 0:
        raise DomainError("feature family must be nonempty")
    if features.universe != p.universe:
        raise DomainError("target and features must share one universe")

    cols = np.column_stack([m.to_array() for m in features])
    target = p.to_array() > 0.5

    # collapse inputs with identical feature vectors; a label conflict means
    # no function of these features can reproduce the target
    seen: dict[bytes, bool] = {}
    points: list[tuple[int, ...]] = []
    labels: list[bool] = []
    for x in range(p.universe.size):
        key = cols[x].astype(np.uint8).tobytes()
        label = bool(target[x])
        if key in seen:
            if seen[key] != label:
                return False, None
            continue
        seen[key] = label
        points.append(tuple(int(v) for v in cols[x]))
        labels.append(label)

    names = features.member_names()
    if all(labels) or not any(labels):
        bias = 1.0 if labels[0] else -1.0
        witness = SeparabilityWitness(names, (0.0,) * len(names), bias)
        _check_witness(p, features, witness, margin)
        return True, witness

    if len(points) <= _EXACT_ROW_LIMIT:
        feasible, solution = solve_strict_separation(points, labels)
        if not feasible:
            return False, None
        weights, bias = solution
        witness = SeparabilityWitness(
            names, tuple(float(v) for v in weights), float(bias)
        )
    else:
        solution = _lp_margin_solve(points, labels, margin)
        if solution is None:
            return False, None
        witness = SeparabilityWitness(names, solution[0], solution[1])

    _check_witness(p, features, witness, margin)
    return True, witness


def _check_witness(p, features, witness, margin):
    got = witness_margin(p, features, witness)
    if got < margin:
        raise AssertionError(
            f"witness re-verification failed: margin {got} < {margin}"
        )


def _lp_margin_solve(points, labels, margin):
    """Maximize the separation margin with box-bounded weights via HiGHS."""
    from scipy.optimize import linprog

    m = len(points[0])
    a_ub = []
    for feat, label in zip(points, labels):
        s = 1.0 if label else -1.0
        a_ub.append([-s * v for v in feat] + [-s, 1.0])
    c = [0.0] * (m + 1) + [-1.0]
    bounds = [(-1.0, 1.0)] * m + [(-(m + 2.0), m + 2.0), (None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=[0.0] * len(a_ub), bounds=bounds, method="highs")
    if res.status != 0 or -res.fun < margin:
        return None
    sol = res.x
    return tuple(float(v) for v in sol[:m]), float(sol[m])


def representable_by_single_layer(
    p: Predicate,
    w: int,
    basis: PredicateFamily,
    *,
    subset_budget: int = DEFAULT_SUBSET_BUDGET,
    margin: float = DEFAULT_MARGIN,
) -> CapacityReport:
    """Search all feature subsets of size <= w for a separating threshold.

    Subsets are tried in lexicographic order of member names, smaller sizes
    first, stopping at the first witness.  Exceeding the subset budget raises
    BudgetExceededError with the remaining count.
    """
    if w < 1:
        raise DomainError(f"width must be >= 1, got {w}")
    if len(basis) == 0:
        raise DomainError("basis must be nonempty")
    if basis.universe != p.universe:
        raise DomainError("target and basis must share one universe")

    start = time.perf_counter()
    ordered = sorted(basis, key=lambda member: member.name)
    max_size = min(w, len(ordered))
    total = sum(math.comb(len(ordered), k) for k in range(1, max_size + 1))

    tested = 0
    for k in range(1, max_size + 1):
        for subset in itertools.combinations(ordered, k):
            if tested >= subset_budget:
                raise BudgetExceededError(
                    f"subset budget {subset_budget} exhausted with "
                    f"{total - tested} subsets remaining",
                    examined=tested,
                    remaining=total - tested,
                )
            tested += 1
            sub_family = PredicateFamily(subset, label=basis.label)
            feasible, witness = is_linearly_separable(p, sub_family, margin=margin)
            if feasible:
                return CapacityReport(
                    w=w,
                    n=p.universe.n_atoms,
                    subsets_tested=tested,
                    representable=True,
                    witness=witness,
                    elapsed=time.perf_counter() - start,
                )
    return CapacityReport(
        w=w,
        n=p.universe.n_atoms,
        subsets_tested=tested,
        representable=False,
        witness=None,
        elapsed=time.perf_counter() - start,
    )


def exhaust_capacity(
    w: int,
    n: int,
    *,
    subset_budget: int = DEFAULT_SUBSET_BUDGET,
) -> CapacityReport:
    """Ask a width-w layer to count to w+1 over n atoms; n > w forces failure."""
    if w < 1:
        raise DomainError(f"width must be >= 1, got {w}")
    if n < w + 1:
        raise DomainError(f"need n >= w + 1, got w={w}, n={n}")
    if n > MAX_ATOMS:
        raise DomainError(f"universe size {n} exceeds cap {MAX_ATOMS}")
    from .predicates import Universe

    u = Universe(n)
    target = at_least_k_true(w + 1, u)
    return representable_by_single_layer(
        target, w, atoms_family(u), subset_budget=subset_budget
    )


def find_indistinguishable_pair(circuit: PredicateCircuit) -> Optional[tuple[int, int]]:
    """First pair of distinct inputs whose node-bit traces coincide.

    Inputs are scanned in index order, so the earliest colliding pair is
    returned; None means the trace map is injective.
    """
    trace_matrix = circuit.trace_matrix()
    seen: dict[bytes, int] = {}
    for x in range(trace_matrix.shape[0]):
        key = trace_matrix[x].tobytes()
        if key in seen:
            return seen[key], x
        seen[key] = x
    return None
