"""Dense primal simplex for small LPs with a feasible origin.

Solves  max c.x  subject to  A x <= b,  x >= 0,  with b >= 0, which is
exactly the shape of the bounded-Lipschitz dual over a finite support
(after shifting the function values into [0, 2]).  Because b >= 0 the
slack basis is feasible and no phase-1 is needed.

The tableau is kept in condensed (dictionary) form, one row per
constraint and one column per nonbasic variable, so memory stays at
O(rows * support) even though the pair constraints contribute O(m^2)
rows.  Pivoting uses Bland's smallest-index rule throughout: the LPs
here are heavily degenerate (many redundant pair constraints), and
Bland's rule rules out cycling at an acceptable cost at this scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

FEASIBILITY_TOL = 1e-9
_MAX_PIVOTS = 200_000


class UnboundedError(RuntimeError):
    """The LP has unbounded objective (cannot happen for well-formed inputs)."""


@dataclass(frozen=True)
class SimplexSolution:
    x: np.ndarray
    value: float
    iterations: int


def solve_max(c: np.ndarray, a: np.ndarray, b: np.ndarray,
              tol: float = FEASIBILITY_TOL) -> SimplexSolution:
    """Maximise c.x over {A x <= b, x >= 0}; requires b >= 0.

    Returns an optimal basic solution.  Raises ``UnboundedError`` if a
    column proves the objective unbounded and ``DomainError`` if the
    origin is infeasible (b has a negative entry beyond tolerance).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = a.shape
    if b.shape != (m,) or c.shape != (n,):
        raise DomainError("inconsistent LP dimensions")
    if np.any(b < -tol):
        raise DomainError("solver requires a feasible origin (b >= 0)")

    # T[:m, :n] constraint coefficients, T[:m, n] rhs,
    # T[m, :n] = -reduced costs, T[m, n] = objective value
    t = np.zeros((m + 1, n + 1))
    t[:m, :n] = a
    t[:m, n] = np.maximum(b, 0.0)
    t[m, :n] = -c

    basic = np.arange(n, n + m)     # variable index ruling each row
    nonbasic = np.arange(n)         # variable index heading each column

    iterations = 0
    while True:
        improving = np.where(t[m, :n] < -tol)[0]
        if improving.size == 0:
            break
        # Bland: smallest variable index among improving columns
        j = improving[np.argmin(nonbasic[improving])]

        col = t[:m, j]
        eligible = col > tol
        if not np.any(eligible):
            raise UnboundedError("improving direction never blocked")
        ratios = np.full(m, np.inf)
        ratios[eligible] = t[:m, n][eligible] / col[eligible]
        rmin = ratios.min()
        ties = np.where(ratios <= rmin + 1e-12 * max(1.0, abs(rmin)))[0]
        i = ties[np.argmin(basic[ties])]

        pivot = t[i, j]
        column = t[:, j].copy()
        t[i, :] /= pivot
        rows = np.arange(m + 1) != i
        t[rows, :] -= np.outer(column[rows], t[i, :])
        t[rows, j] = -column[rows] / pivot
        t[i, j] = 1.0 / pivot

        basic[i], nonbasic[j] = nonbasic[j], basic[i]
        iterations += 1
        if iterations > _MAX_PIVOTS:
            raise RuntimeError("simplex failed to terminate (pivot cap reached)")

    x = np.zeros(n)
    structural = basic < n
    x[basic[structural]] = t[:m, n][structural]
    return SimplexSolution(x=x, value=float(t[m, n]), iterations=iterations)
