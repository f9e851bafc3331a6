"""Dense-tableau primal simplex for the tiny LPs behind the convex adversary.

Problems have the form  max c.v  subject to  A v <= b, v >= 0  with b >= 0,
so the all-slack basis is feasible from the start and no phase-1 is needed.
Bland's rule keeps the pivot sequence finite (no cycling) and reproducible.
Instances here are a few dozen rows at most; a dense tableau is the simplest
thing that is exactly reproducible and has no external dependencies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FEASIBILITY_TOL", "LPError", "LinearProgram", "LPSolution", "solve"]

FEASIBILITY_TOL = 1e-9


class LPError(RuntimeError):
    """Solver failure; carries the offending program for diagnostics."""

    def __init__(self, message: str, program: "LinearProgram | None" = None):
        super().__init__(message)
        self.program = program


@dataclass(frozen=True)
class LinearProgram:
    """max objective . v  s.t.  constraints @ v <= rhs,  v >= 0."""

    objective: np.ndarray
    constraints: np.ndarray
    rhs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float)
        a = np.atleast_2d(np.asarray(self.constraints, dtype=float))
        b = np.asarray(self.rhs, dtype=float)
        if a.shape != (b.size, c.size):
            raise LPError(
                f"inconsistent shapes: A{a.shape}, b({b.size},), c({c.size},)", None
            )
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraints", a)
        object.__setattr__(self, "rhs", b)

    @property
    def num_variables(self) -> int:
        return self.objective.size

    @property
    def num_constraints(self) -> int:
        return self.rhs.size


@dataclass(frozen=True)
class LPSolution:
    """Optimal value, primal/dual solutions, and the optimal basis.

    ``basis_inverse`` is the inverse of the optimal basis matrix (read off
    the slack columns of the final tableau).  Together with ``duals`` it
    determines the optimum for any right-hand side that keeps this basis
    feasible, which the convex adversary exploits to batch its evaluations.
    """

    value: float
    solution: np.ndarray
    duals: np.ndarray
    basis: tuple[int, ...]
    basis_inverse: np.ndarray
    iterations: int


def solve(
    program: LinearProgram,
    tol: float = FEASIBILITY_TOL,
    max_iterations: int = 10_000,
) -> LPSolution:
    """Run Bland-rule simplex from the slack basis.

    Raises :class:`LPError` for negative right-hand sides (outside this
    solver's scope), unbounded problems, or iteration blowup.
    """
    n = program.num_variables
    m = program.num_constraints
    b = program.rhs.copy()
    if b.size and b.min() < -tol:
        raise LPError("negative right-hand side; slack basis infeasible", program)
    b = np.maximum(b, 0.0)

    # Tableau rows 0..m-1 are constraints, row m carries reduced costs.
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = program.constraints
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[m, :n] = -program.objective
    basis = list(range(n, n + m))

    iterations = 0
    while True:
        reduced = tableau[m, : n + m]
        negative = np.flatnonzero(reduced < -tol)
        if negative.size == 0:
            break
        entering = int(negative[0])  # Bland: lowest eligible index
        column = tableau[:m, entering]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            raise LPError("objective unbounded above", program)
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12]
        leaving = int(min(ties, key=lambda r: basis[r]))  # Bland on ties

        pivot = tableau[leaving, entering]
        tableau[leaving, :] /= pivot
        others = np.arange(m + 1) != leaving
        tableau[others, :] -= np.outer(tableau[others, entering], tableau[leaving, :])
        basis[leaving] = entering

        iterations += 1
        if iterations > max_iterations:
            raise LPError(f"no optimum after {max_iterations} pivots", program)

    solution = np.zeros(n)
    for row, col in enumerate(basis):
        if col < n:
            solution[col] = tableau[row, -1]
    return LPSolution(
        value=float(tableau[m, -1]),
        solution=solution,
        duals=tableau[m, n : n + m].copy(),
        basis=tuple(basis),
        basis_inverse=tableau[:m, n : n + m].copy(),
        iterations=iterations,
    )
