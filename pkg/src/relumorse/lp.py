"""Dense tableau simplex with Bland's anti-cycling rule.

Solves  max c.x  subject to  A_eq x = b_eq,  A_ge x >= b_ge  over free x.
The instances here are tiny (a handful of variables, a dozen constraints),
so a plain two-phase tableau with Bland's rule is the right trade-off:
guaranteed termination and no dependence on solver generations elsewhere.

Free variables are split x = u - w with u, w >= 0; each >= row gets a
surplus variable; phase 1 minimizes the sum of artificials.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalInstabilityError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
_HARD_TOL = 1e-12
_MAX_ITER = 20000


@dataclass(frozen=True)
class LpProblem:
    """max objective.x  s.t.  a_eq x = b_eq,  a_ge x >= b_ge, x free."""

    objective: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    a_ge: np.ndarray
    b_ge: np.ndarray

    @classmethod
    def build(cls, objective, a_eq=None, b_eq=None, a_ge=None, b_ge=None) -> "LpProblem":
        c = np.atleast_1d(np.asarray(objective, dtype=float))
        n = c.shape[0]

        def norm(a, b):
            if a is None:
                return np.zeros((0, n)), np.zeros(0)
            a = np.asarray(a, dtype=float).reshape(-1, n)
            b = np.asarray(b, dtype=float).reshape(-1)
            if a.shape[0] != b.shape[0]:
                raise ValueError("constraint matrix/rhs row mismatch")
            return a, b

        a_eq, b_eq = norm(a_eq, b_eq)
        a_ge, b_ge = norm(a_ge, b_ge)
        return cls(c, a_eq, b_eq, a_ge, b_ge)


@dataclass(frozen=True)
class LpResult:
    """status is one of "optimal", "unbounded", "infeasible".

    For optimal results ``x`` is an argmax vertex of the standard-form
    program and ``tight`` lists the indices of >= rows active at x.
    """

    status: str
    value: float | None = None
    x: np.ndarray | None = None
    tight: tuple = field(default=())

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _bland_min(tableau, basis, ncols, pivot_tol, max_iter):
    """Run Bland-rule simplex on a minimization tableau in place.

    tableau has shape (m+1, ncols+1); last row holds reduced costs, last
    column the rhs.  Returns "optimal" or "unbounded" (entering column
    with no positive entry).
    """
    m = tableau.shape[0] - 1
    for _ in range(max_iter):
        costs = tableau[-1, :ncols]
        entering = -1
        for j in range(ncols):
            if costs[j] < -pivot_tol:
                entering = j
                break
        if entering < 0:
            return "optimal"
        col = tableau[:m, entering]
        rows = np.nonzero(col > pivot_tol)[0]
        if rows.size == 0:
            if np.any(col > _HARD_TOL):
                raise NumericalInstabilityError(
                    "only degenerate pivots available in ratio test"
                )
            return "unbounded"
        ratios = tableau[rows, -1] / col[rows]
        best = ratios.min()
        # Bland: among minimal ratios, leave the row whose basic variable
        # has the smallest index.
        candidates = rows[ratios <= best + _HARD_TOL]
        leaving = min(candidates, key=lambda r: basis[r])
        piv = tableau[leaving, entering]
        if abs(piv) < _HARD_TOL:
            raise NumericalInstabilityError("pivot magnitude below hard threshold")
        tableau[leaving, :] /= piv
        for r in range(m + 1):
            if r != leaving and abs(tableau[r, entering]) > 0.0:
                tableau[r, :] -= tableau[r, entering] * tableau[leaving, :]
        basis[leaving] = entering
    raise NumericalInstabilityError("simplex iteration limit exceeded")


def lp_solve(
    problem: LpProblem,
    pivot_tol: float = PIVOT_TOL,
    feas_tol: float = FEAS_TOL,
    max_iter: int = _MAX_ITER,
) -> LpResult:
    """Two-phase dense simplex; see the module docstring for conventions."""
    c = problem.objective
    n = c.shape[0]
    n_eq = problem.a_eq.shape[0]
    n_ge = problem.a_ge.shape[0]
    m = n_eq + n_ge

    if m == 0:
        # Unconstrained: optimal only for a zero objective.
        if np.all(np.abs(c) <= pivot_tol):
            return LpResult("optimal", 0.0, np.zeros(n), ())
        return LpResult("unbounded")

    # Standard-form columns: u (n), w (n), surplus (n_ge).
    ncols = 2 * n + n_ge
    A = np.zeros((m, ncols))
    b = np.zeros(m)
    A[:n_eq, :n] = problem.a_eq
    A[:n_eq, n : 2 * n] = -problem.a_eq
    b[:n_eq] = problem.b_eq
    A[n_eq:, :n] = problem.a_ge
    A[n_eq:, n : 2 * n] = -problem.a_ge
    for i in range(n_ge):
        A[n_eq + i, 2 * n + i] = -1.0
    b[n_eq:] = problem.b_ge

    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Phase 1: artificial basis.
    tableau = np.zeros((m + 1, ncols + m + 1))
    tableau[:m, :ncols] = A
    tableau[:m, ncols : ncols + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[-1, ncols : ncols + m] = 1.0
    tableau[-1, :] -= tableau[:m, :].sum(axis=0)
    basis = [ncols + i for i in range(m)]

    _bland_min(tableau, basis, ncols + m, pivot_tol, max_iter)
    if -tableau[-1, -1] > feas_tol:
        return LpResult("infeasible")

    # Drive leftover artificials out of the basis; drop redundant rows.
    keep = []
    for r in range(m):
        if basis[r] < ncols:
            keep.append(r)
            continue
        row = tableau[r, :ncols]
        pivots = np.nonzero(np.abs(row) > pivot_tol)[0]
        if pivots.size == 0:
            continue  # redundant constraint
        j = int(pivots[0])
        tableau[r, :] /= tableau[r, j]
        for rr in range(m + 1):
            if rr != r and abs(tableau[rr, j]) > 0.0:
                tableau[rr, :] -= tableau[rr, j] * tableau[r, :]
        basis[r] = j
        keep.append(r)

    rows = keep
    work = np.zeros((len(rows) + 1, ncols + 1))
    work[: len(rows), :ncols] = tableau[rows, :ncols]
    work[: len(rows), -1] = tableau[rows, -1]
    basis = [basis[r] for r in rows]

    # Phase 2 costs: minimize -(c.u - c.w).
    cost = np.zeros(ncols)
    cost[:n] = -c
    cost[n : 2 * n] = c
    work[-1, :ncols] = cost
    for r, j in enumerate(basis):
        if abs(cost[j]) > 0.0:
            work[-1, :] -= cost[j] * work[r, :]

    status = _bland_min(work, basis, ncols, pivot_tol, max_iter)
    if status == "unbounded":
        return LpResult("unbounded")

    y = np.zeros(ncols)
    for r, j in enumerate(basis):
        y[j] = work[r, -1]
    x = y[:n] - y[n : 2 * n]
    value = float(c @ x)
    tight = ()
    if n_ge:
        resid = problem.a_ge @ x - problem.b_ge
        tight = tuple(int(i) for i in np.nonzero(resid <= feas_tol)[0])
    return LpResult("optimal", value, x, tight)


def interior_witness(
    a_eq: np.ndarray,
    b_eq: np.ndarray,
    a_ge: np.ndarray,
    b_ge: np.ndarray,
    feas_tol: float = FEAS_TOL,
    cap: float = 1.0,
):
    """Strict-feasibility certificate for a system of equalities and strict
    inequalities (rows should be normalized so slack is geometric distance).

    Maximizes the worst inequality slack (capped) and returns
    ``(witness, clearance)`` when the optimum exceeds ``feas_tol``, else None.
    """
    n = a_eq.shape[1] if a_eq.size else a_ge.shape[1]
    n_ge = a_ge.shape[0]
    obj = np.zeros(n + 1)
    obj[-1] = 1.0
    eq = np.hstack([a_eq, np.zeros((a_eq.shape[0], 1))]) if a_eq.size else np.zeros((0, n + 1))
    ge_rows = [np.hstack([a_ge, -np.ones((n_ge, 1))])] if n_ge else []
    ge_rhs = [b_ge] if n_ge else []
    cap_row = np.zeros((1, n + 1))
    cap_row[0, -1] = -1.0
    ge_rows.append(cap_row)
    ge_rhs.append(np.array([-cap]))
    problem = LpProblem.build(
        obj,
        a_eq=eq,
        b_eq=b_eq if a_eq.size else np.zeros(0),
        a_ge=np.vstack(ge_rows),
        b_ge=np.concatenate(ge_rhs),
    )
    res = lp_solve(problem, feas_tol=feas_tol)
    if not res.optimal or res.value is None or res.value <= feas_tol:
        return None
    return res.x[:n].copy(), float(res.value)
