"""Exact strict-separation feasibility in rational arithmetic.

A finite labeled point set admits a strict linear separator iff the system

    s_x (w . f_x + b) >= 1      (s_x = +1 for positive points, -1 otherwise)

has a solution: any strict separator can be rescaled to margin 1.  That
system is decided here by a Phase-I primal simplex over ``Fraction`` with
Bland's pivoting rule, so the verdict is exact and the iteration always
terminates.  Feasible instances yield a rational witness whose margin is
at least 1 by construction.

Free variables are split into nonnegative pairs, each inequality gets a
surplus variable, and one artificial variable per row seeds the basis.
Artificial columns may leave the basis but never re-enter.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

_MAX_PIVOTS = 200_000


def solve_strict_separation(
    points: Sequence[Sequence[int | Fraction]],
    positive: Sequence[bool],
) -> tuple[bool, tuple[list[Fraction], Fraction] | None]:
    """Decide strict separability of labeled points; return (feasible, witness).

    The witness is ``(weights, bias)`` with margin >= 1 on every point.
    """
    npts = len(points)
    if npts == 0:
        return True, ([], Fraction(1))
    m = len(points[0])

    # column layout: w+ (m) | w- (m) | b+ | b- | surplus (npts) | artificial (npts)
    n_struct = 2 * m + 2
    n_cols = n_struct + 2 * npts
    art0 = n_struct + npts

    rows: list[list[Fraction]] = []
    for i, (feat, pos) in enumerate(zip(points, positive)):
        s = 1 if pos else -1
        row = [Fraction(0)] * (n_cols + 1)
        for j, f in enumerate(feat):
            c = Fraction(s) * Fraction(f)
            row[j] = c
            row[m + j] = -c
        row[2 * m] = Fraction(s)
        row[2 * m + 1] = Fraction(-s)
        row[n_struct + i] = Fraction(-1)   # surplus
        row[art0 + i] = Fraction(1)        # artificial
        row[n_cols] = Fraction(1)          # rhs
        rows.append(row)

    basis = [art0 + i for i in range(npts)]

    # Phase-I objective: minimize the artificial sum.  Reduced costs start as
    # c - sum of basic rows (every basic artificial has cost 1).
    obj = [Fraction(0)] * (n_cols + 1)
    for j in range(art0, n_cols):
        obj[j] = Fraction(1)
    for row in rows:
        for j in range(n_cols + 1):
            if row[j]:
                obj[j] -= row[j]

    for _ in range(_MAX_PIVOTS):
        # Bland: entering = lowest-index non-artificial column with negative
        # reduced cost.
        enter = -1
        for j in range(art0):
            if obj[j] < 0:
                enter = j
                break
        if enter < 0:
            break

        leave = -1
        best_ratio = None
        for r in range(npts):
            a = rows[r][enter]
            if a > 0:
                ratio = rows[r][n_cols] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = r
        if leave < 0:
            raise AssertionError("Phase-I objective cannot be unbounded")

        _pivot(rows, obj, basis, leave, enter, n_cols)
    else:
        raise AssertionError("simplex pivot budget exhausted")

    if -obj[n_cols] != 0:  # leftover artificial mass: system infeasible
        return False, None

    value = [Fraction(0)] * n_cols
    for r, col in enumerate(basis):
        value[col] = rows[r][n_cols]
    weights = [value[j] - value[m + j] for j in range(m)]
    bias = value[2 * m] - value[2 * m + 1]
    return True, (weights, bias)


def _pivot(rows, obj, basis, leave, enter, rhs_col):
    pivot_row = rows[leave]
    inv = 1 / pivot_row[enter]
    for j in range(rhs_col + 1):
        if pivot_row[j]:
            pivot_row[j] *= inv
    for row in rows:
        if row is pivot_row:
            continue
        factor = row[enter]
        if factor:
            for j in range(rhs_col + 1):
                if pivot_row[j]:
                    row[j] -= factor * pivot_row[j]
    factor = obj[enter]
    if factor:
        for j in range(rhs_col + 1):
            if pivot_row[j]:
                obj[j] -= factor * pivot_row[j]
    basis[leave] = enter
