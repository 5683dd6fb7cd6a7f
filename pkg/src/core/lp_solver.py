"""
Dense two-phase tableau simplex with Bland's anti-cycling rule.

The LPs this engine builds are tiny (a handful of variables and rows), so the
solver favours a simple, deterministic pivoting scheme over speed.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from ..models.game_models import ConstraintSense, LinearProgram, LPResult, LPStatus

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-9
FEASIBILITY_TOLERANCE = 1e-8
DEFAULT_MAX_ITERATIONS = 10_000

_max_iterations = DEFAULT_MAX_ITERATIONS


def configure_solver(max_iterations: int) -> None:
    """Set the pivot budget used when lp_solve is called without an explicit one"""
    global _max_iterations
    if max_iterations < 1:
        raise ValueError(f"max_iterations must be positive, got {max_iterations}")
    _max_iterations = int(max_iterations)
    logger.debug(f"LP pivot budget set to {_max_iterations}")


def lp_solve(lp: LinearProgram, max_iterations: Optional[int] = None) -> LPResult:
    """Solve lp and return an LPResult carrying the status verdict"""
    if max_iterations is None:
        max_iterations = _max_iterations
    shift, transform, extra_rows, extra_bounds = _standardize_variables(lp)

    # substitute x = shift + transform @ y, y >= 0
    matrix = lp.constraint_matrix @ transform
    bounds = lp.constraint_bounds - lp.constraint_matrix @ shift
    senses: List[ConstraintSense] = list(lp.senses)
    if extra_rows:
        matrix = np.vstack([matrix, np.array(extra_rows)])
        bounds = np.concatenate([bounds, np.array(extra_bounds)])
        senses.extend([ConstraintSense.LE] * len(extra_rows))

    sign = 1.0 if lp.maximize else -1.0
    costs = sign * (transform.T @ lp.objective)

    equality_matrix, rhs, num_structural = _add_slacks(matrix, bounds, senses)
    status, y, iterations = _two_phase(equality_matrix, rhs, costs, num_structural, max_iterations)

    if status != LPStatus.OPTIMAL:
        logger.debug(f"LP terminated with status {status.value} after {iterations} iterations")
        return LPResult(status=status, iterations=iterations)

    x = shift + transform @ y[:transform.shape[1]]
    return LPResult(
        status=LPStatus.OPTIMAL,
        x=x,
        objective_value=float(lp.objective @ x),
        iterations=iterations,
    )


def _standardize_variables(lp: LinearProgram) -> Tuple[np.ndarray, np.ndarray, list, list]:
    """Map every original variable onto nonnegative ones; upper bounds become extra rows"""
    n = lp.num_variables
    shift = np.zeros(n)
    columns: List[np.ndarray] = []
    upper_rows: List[Tuple[int, float]] = []

    for j in range(n):
        low, high = lp.lower_bounds[j], lp.upper_bounds[j]
        unit = np.zeros(n)
        unit[j] = 1.0
        if np.isfinite(low):
            shift[j] = low
            columns.append(unit)
            if np.isfinite(high):
                upper_rows.append((len(columns) - 1, high - low))
        elif np.isfinite(high):
            shift[j] = high
            columns.append(-unit)
        else:
            columns.append(unit)
            columns.append(-unit)

    transform = np.column_stack(columns) if columns else np.zeros((n, 0))
    extra_rows, extra_bounds = [], []
    for column, bound in upper_rows:
        row = np.zeros(transform.shape[1])
        row[column] = 1.0
        extra_rows.append(row)
        extra_bounds.append(bound)
    return shift, transform, extra_rows, extra_bounds


def _add_slacks(matrix: np.ndarray, bounds: np.ndarray,
                senses: List[ConstraintSense]) -> Tuple[np.ndarray, np.ndarray, int]:
    """Equality form A y = b with b >= 0"""
    rows, cols = matrix.shape
    inequality_rows = [i for i, sense in enumerate(senses) if sense != ConstraintSense.EQ]
    slack = np.zeros((rows, len(inequality_rows)))
    for k, i in enumerate(inequality_rows):
        slack[i, k] = 1.0 if senses[i] == ConstraintSense.LE else -1.0
    equality_matrix = np.hstack([matrix, slack])
    rhs = bounds.astype(float).copy()
    negative = rhs < 0
    equality_matrix[negative] *= -1.0
    rhs[negative] *= -1.0
    return equality_matrix, rhs, cols


def _pivot(tableau: np.ndarray, basis: List[int], row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    basis[row] = col


def _run_simplex(tableau: np.ndarray, basis: List[int], allowed: int,
                 max_iterations: int) -> Tuple[LPStatus, int]:
    """Maximize with the reduced-cost row stored last; only columns < allowed may enter"""
    rows = tableau.shape[0] - 1
    for iteration in range(max_iterations):
        reduced = tableau[-1, :allowed]
        candidates = np.flatnonzero(reduced < -PIVOT_TOLERANCE)
        if candidates.size == 0:
            return LPStatus.OPTIMAL, iteration
        col = int(candidates[0])

        column = tableau[:rows, col]
        positive = np.flatnonzero(column > PIVOT_TOLERANCE)
        if positive.size == 0:
            return LPStatus.UNBOUNDED, iteration
        ratios = tableau[positive, -1] / column[positive]
        best = ratios.min()
        tied = positive[ratios <= best + PIVOT_TOLERANCE * max(1.0, abs(best))]
        row = int(min(tied, key=lambda r: basis[r]))
        _pivot(tableau, basis, row, col)
    return LPStatus.ITERATION_LIMIT, max_iterations


def _two_phase(equality_matrix: np.ndarray, rhs: np.ndarray, costs: np.ndarray,
               num_structural: int, max_iterations: int) -> Tuple[LPStatus, np.ndarray, int]:
    rows, cols = equality_matrix.shape
    full_costs = np.concatenate([costs, np.zeros(cols - num_structural)])

    if rows == 0:
        if np.any(full_costs > PIVOT_TOLERANCE):
            return LPStatus.UNBOUNDED, np.zeros(cols), 0
        return LPStatus.OPTIMAL, np.zeros(cols), 0

    # phase 1: artificial basis, maximize -sum(artificials)
    tableau = np.zeros((rows + 1, cols + rows + 1))
    tableau[:rows, :cols] = equality_matrix
    tableau[:rows, cols:cols + rows] = np.eye(rows)
    tableau[:rows, -1] = rhs
    tableau[-1, cols:cols + rows] = 1.0
    tableau[-1] -= tableau[:rows].sum(axis=0)
    tableau[-1, cols:cols + rows] = 0.0
    basis = list(range(cols, cols + rows))

    status, phase1_iterations = _run_simplex(tableau, basis, cols, max_iterations)
    if status == LPStatus.ITERATION_LIMIT:
        return status, np.zeros(cols), phase1_iterations
    infeasibility = -tableau[-1, -1]
    if infeasibility > FEASIBILITY_TOLERANCE * max(1.0, float(rhs.max(initial=0.0))):
        return LPStatus.INFEASIBLE, np.zeros(cols), phase1_iterations

    # drive artificials out of the basis; rows that cannot be pivoted are redundant
    keep_rows = []
    for row in range(rows):
        if basis[row] >= cols:
            candidates = np.flatnonzero(np.abs(tableau[row, :cols]) > PIVOT_TOLERANCE)
            if candidates.size == 0:
                continue
            _pivot(tableau, basis, row, int(candidates[0]))
        keep_rows.append(row)

    phase2 = np.zeros((len(keep_rows) + 1, cols + 1))
    phase2[:-1, :cols] = tableau[keep_rows, :cols]
    phase2[:-1, -1] = tableau[keep_rows, -1]
    basis = [basis[row] for row in keep_rows]
    phase2[-1, :cols] = -full_costs
    for row, var in enumerate(basis):
        phase2[-1] -= phase2[-1, var] * phase2[row]

    status, phase2_iterations = _run_simplex(phase2, basis, cols, max_iterations - phase1_iterations)
    iterations = phase1_iterations + phase2_iterations
    y = np.zeros(cols)
    for row, var in enumerate(basis):
        y[var] = phase2[row, -1]
    return status, np.clip(y, 0.0, None), iterations
