"""Dense two-phase primal simplex with Bland's rule.

Written in-house because downstream code needs a genuine basic feasible
solution (the returned basis certifies support bounds) and bit-reproducible
tie-breaking, which off-the-shelf interior-point or presolving solvers do
not guarantee. Scale target is desk-sized problems: hundreds of columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class LPResult:
    """Outcome of a solve.

    status: "optimal", "infeasible", or "unbounded".
    x: primal values for the structural variables (optimal only).
    objective: c . x for the returned x.
    basis: column indices (structural then slack) of the final basis.
    dual_objective: y . b recomputed from the final basis by an independent
        linear solve; matches ``objective`` up to numerical error when the
        solve is sound.
    """

    status: str
    x: np.ndarray | None
    objective: float | None
    basis: tuple[int, ...] | None
    dual_objective: float | None


def lp_solve(c, a_eq=None, b_eq=None, a_ub=None, b_ub=None) -> LPResult:
    """Minimize c.x subject to a_eq x = b_eq, a_ub x <= b_ub, x >= 0."""
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    rhs = []
    if a_eq is not None and len(a_eq):
        a_eq = np.asarray(a_eq, dtype=float)
        rhs.extend(np.asarray(b_eq, dtype=float))
        n_eq = a_eq.shape[0]
    else:
        n_eq = 0
    n_ub = 0
    if a_ub is not None and len(a_ub):
        a_ub = np.asarray(a_ub, dtype=float)
        n_ub = a_ub.shape[0]
        rhs.extend(np.asarray(b_ub, dtype=float))
    m = n_eq + n_ub
    if m == 0:
        raise ValueError("LP needs at least one row")
    # standard form: [A_eq 0; A_ub I] with slack columns for the <= rows
    a = np.zeros((m, n + n_ub))
    if n_eq:
        a[:n_eq, :n] = a_eq
    if n_ub:
        a[n_eq:, :n] = a_ub
        a[n_eq:, n : n + n_ub] = np.eye(n_ub)
    b = np.asarray(rhs, dtype=float)
    neg = b < 0
    a[neg] *= -1.0
    b = np.abs(b)

    total = n + n_ub
    tableau = np.zeros((m + 1, total + m + 1))
    tableau[:m, :total] = a
    tableau[:m, total : total + m] = np.eye(m)
    tableau[:m, -1] = b
    basis = list(range(total, total + m))
    # phase 1: price out artificials
    tableau[m, :] = 0.0
    for i in range(m):
        tableau[m, : total + m] -= tableau[i, : total + m]
        tableau[m, -1] -= tableau[i, -1]
    status = _pivot_loop(tableau, basis, allowed=total)
    if status != "optimal":
        return LPResult("infeasible", None, None, None, None)
    if -tableau[m, -1] > 1e-8:
        return LPResult("infeasible", None, None, None, None)
    _drive_out_artificials(tableau, basis, total)

    # phase 2 over structural + slack columns
    tableau[m, :] = 0.0
    tableau[m, :n] = c
    for i, bi in enumerate(basis):
        if bi < total and tableau[m, bi] != 0.0:
            tableau[m, :] -= tableau[m, bi] * tableau[i, :]
    status = _pivot_loop(tableau, basis, allowed=total)
    if status == "unbounded":
        return LPResult("unbounded", None, None, None, None)

    x_full = np.zeros(total)
    for i, bi in enumerate(basis):
        if bi < total:
            x_full[bi] = tableau[i, -1]
    x = x_full[:n]
    objective = float(c @ x)
    dual = _dual_objective(c, a, b, basis, total)
    return LPResult("optimal", x, objective, tuple(sorted(basis)), dual)


def _pivot_loop(tableau, basis, allowed: int) -> str:
    m = tableau.shape[0] - 1
    for _ in range(50000):
        row = tableau[m, :allowed]
        entering = -1
        for j in range(allowed):  # Bland: smallest eligible index
            if row[j] < -PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return "optimal"
        best_ratio = None
        leaving = -1
        for i in range(m):
            coef = tableau[i, entering]
            if coef > PIVOT_TOL:
                ratio = tableau[i, -1] / coef
                if (
                    best_ratio is None
                    or ratio < best_ratio - 1e-12
                    or (abs(ratio - best_ratio) <= 1e-12 and basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            return "unbounded"
        _pivot(tableau, leaving, entering)
        basis[leaving] = entering
    raise RuntimeError("simplex failed to terminate")


def _pivot(tableau, row: int, col: int):
    tableau[row, :] /= tableau[row, col]
    for i in range(tableau.shape[0]):
        if i != row and tableau[i, col] != 0.0:
            tableau[i, :] -= tableau[i, col] * tableau[row, :]


def _drive_out_artificials(tableau, basis, total: int):
    m = tableau.shape[0] - 1
    for i in range(m):
        if basis[i] < total:
            continue
        pivot_col = -1
        for j in range(total):
            if abs(tableau[i, j]) > PIVOT_TOL:
                pivot_col = j
                break
        if pivot_col >= 0:
            _pivot(tableau, i, pivot_col)
            basis[i] = pivot_col
        else:
            # redundant row: keep the zero-level artificial basic; it never
            # re-enters because phase 2 prices only real columns
            tableau[i, -1] = 0.0


def _dual_objective(c_struct, a, b, basis, total: int) -> float | None:
    m = a.shape[0]
    cost = np.zeros(total)
    cost[: c_struct.shape[0]] = c_struct
    cols = []
    cb = []
    for bi in basis:
        if bi < total:
            cols.append(a[:, bi])
            cb.append(cost[bi])
        else:
            cols.append(np.zeros(m))  # zero-level artificial on a redundant row
            cb.append(0.0)
    bmat = np.column_stack(cols)
    try:
        y = np.linalg.lstsq(bmat.T, np.asarray(cb), rcond=None)[0]
    except np.linalg.LinAlgError:
        return None
    return float(y @ b)
