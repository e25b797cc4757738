"""Exact rectangular assignment with replicable (unlimited-capacity) columns.

Replicable columns model virtual source/sink nodes: they may absorb any
number of rows.  They are realized by duplicating the column once per
row before handing the matrix to the underlying optimal solver.
Inadmissible cells carry a guard cost strictly larger than the sum of
all finite admissible costs, and a solution using a guard cell is
rejected as infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InfeasibleProblemError, InputError


@dataclass
class AssignmentProblem:
    rows: list
    cols: list
    cost: dict                      # (row, col) -> cost, admissible cells only
    replicable_cols: set = field(default_factory=set)

    def __post_init__(self):
        col_set = set(self.cols)
        for (r, c) in self.cost:
            if r not in set(self.rows) or c not in col_set:
                raise InputError(f"cost entry ({r!r}, {c!r}) outside rows/cols")
        for c in self.replicable_cols:
            if c not in col_set:
                raise InputError(f"replicable column {c!r} not in cols")


def solve_assignment(problem: AssignmentProblem):
    """Minimize total cost; every row assigned, ordinary columns used at
    most once, replicable columns any number of times.

    Returns (assignment: row -> col, total_cost).
    """
    rows = list(problem.rows)
    if not rows:
        return {}, 0.0
    ordinary_cols = [c for c in problem.cols if c not in problem.replicable_cols]
    # One copy of each replicable column per row gives unlimited capacity.
    expanded = ordinary_cols + [c for c in problem.replicable_cols for _ in rows]
    if len(expanded) < len(rows):
        raise InfeasibleProblemError("fewer admissible columns than rows")

    guard = sum(abs(v) for v in problem.cost.values()) + 1.0
    matrix = np.full((len(rows), len(expanded)), guard)
    has_admissible = [False] * len(rows)
    for i, r in enumerate(rows):
        for j, c in enumerate(expanded):
            if (r, c) in problem.cost:
                matrix[i, j] = problem.cost[(r, c)]
                has_admissible[i] = True
    for i, ok in enumerate(has_admissible):
        if not ok:
            raise InfeasibleProblemError(f"row {rows[i]!r} has no admissible cell")

    row_ind, col_ind = linear_sum_assignment(matrix)
    assignment = {}
    total = 0.0
    for i, j in zip(row_ind, col_ind):
        if matrix[i, j] >= guard:
            raise InfeasibleProblemError(
                f"row {rows[i]!r} can only be matched to an inadmissible column")
        assignment[rows[i]] = expanded[j]
        total += matrix[i, j]
    return assignment, float(total)
