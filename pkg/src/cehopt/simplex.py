"""Self-contained dense LP solver (two-phase primal simplex).

Used by the enumeration oracle so that reference dispatch values never pass
through the production MILP backend. Intended for the oracle's tiny
subproblems (tens of rows); no factorization, the full tableau is updated
each pivot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure

TOL = 1e-9


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None


def solve_lp(c, a_rows, relations, rhs, lower, upper) -> LpResult:
    """Minimize c.x subject to rows (A x rel b) and column bounds.

    Bounds may be infinite on either side; rows use relations '<=', '>=', '='.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a_rows, dtype=float).reshape(len(relations), len(c)) \
        if len(relations) else np.zeros((0, len(c)))
    b = np.asarray(rhs, dtype=float)
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    n = len(c)
    if np.any(lo > hi + TOL):
        return LpResult("infeasible", None, None)

    # substitute bounded variables to y >= 0; free variables split in two
    col_map = []          # per original var: ("shift", y, l) | ("flip", y, u) | ("split", y+, y-)
    std_cols = 0
    for j in range(n):
        if lo[j] > -math.inf:
            col_map.append(("shift", std_cols, lo[j]))
            std_cols += 1
        elif hi[j] < math.inf:
            col_map.append(("flip", std_cols, hi[j]))
            std_cols += 1
        else:
            col_map.append(("split", std_cols, std_cols + 1))
            std_cols += 2

    rows = []
    rels = []
    rvec = []

    def std_row(orig_row, orig_rhs):
        row = np.zeros(std_cols)
        shift = 0.0
        for j in range(n):
            coef = orig_row[j]
            if coef == 0.0:
                continue
            tag = col_map[j]
            if tag[0] == "shift":
                row[tag[1]] = coef
                shift += coef * tag[2]
            elif tag[0] == "flip":
                row[tag[1]] = -coef
                shift += coef * tag[2]
            else:
                row[tag[1]] = coef
                row[tag[2]] = -coef
        return row, orig_rhs - shift

    for i in range(len(relations)):
        row, r = std_row(a[i], b[i])
        rows.append(row)
        rels.append(relations[i])
        rvec.append(r)
    # finite upper bounds of shifted vars become rows y <= u - l
    for j in range(n):
        tag = col_map[j]
        if tag[0] == "shift" and hi[j] < math.inf:
            row = np.zeros(std_cols)
            row[tag[1]] = 1.0
            rows.append(row)
            rels.append("<=")
            rvec.append(hi[j] - lo[j])
        elif tag[0] == "flip" and lo[j] > -math.inf:  # unreachable; flip implies lo = -inf
            raise AssertionError

    c_std = np.zeros(std_cols)
    obj_shift = 0.0
    for j in range(n):
        tag = col_map[j]
        if tag[0] == "shift":
            c_std[tag[1]] += c[j]
            obj_shift += c[j] * tag[2]
        elif tag[0] == "flip":
            c_std[tag[1]] -= c[j]
            obj_shift += c[j] * tag[2]
        else:
            c_std[tag[1]] += c[j]
            c_std[tag[2]] -= c[j]

    status, y = _simplex_standard(c_std, rows, rels, rvec)
    if status != "optimal":
        return LpResult(status, None, None)

    x = np.empty(n)
    for j in range(n):
        tag = col_map[j]
        if tag[0] == "shift":
            x[j] = tag[2] + y[tag[1]]
        elif tag[0] == "flip":
            x[j] = tag[2] - y[tag[1]]
        else:
            x[j] = y[tag[1]] - y[tag[2]]
    return LpResult("optimal", x, float(c @ x))


def _simplex_standard(c, rows, rels, rhs):
    """min c.y, rows (rel) rhs, y >= 0. Returns (status, y)."""
    m = len(rows)
    n = len(c)
    if m == 0:
        # bounded iff all costs >= 0 at y = 0
        if np.any(c < -TOL):
            return "unbounded", None
        return "optimal", np.zeros(n)

    a = np.array(rows, dtype=float)
    b = np.array(rhs, dtype=float)
    rels = list(rels)

    # slacks for inequalities, then normalize rhs >= 0
    n_slack = sum(1 for r in rels if r != "=")
    A = np.zeros((m, n + n_slack))
    A[:, :n] = a
    k = n
    slack_col = [-1] * m
    for i, r in enumerate(rels):
        if r == "<=":
            A[i, k] = 1.0
            slack_col[i] = k
            k += 1
        elif r == ">=":
            A[i, k] = -1.0
            slack_col[i] = k
            k += 1
    for i in range(m):
        if b[i] < 0.0:
            A[i] = -A[i]
            b[i] = -b[i]

    total = n + n_slack
    # phase 1: artificial basis
    T = np.zeros((m, total + m + 1))
    T[:, :total] = A
    T[:, total:total + m] = np.eye(m)
    T[:, -1] = b
    basis = list(range(total, total + m))

    cost1 = np.zeros(total + m)
    cost1[total:total + m] = 1.0
    if not _run_simplex(T, basis, cost1, allow_cols=total + m):
        raise NumericalFailure("phase-1 simplex did not terminate")
    phase1 = sum(cost1[j] * T[i, -1] for i, j in enumerate(basis))
    if phase1 > 1e-7:
        return "infeasible", None

    # pivot remaining artificials out, or drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= total:
            piv = next((j for j in range(total) if abs(T[i, j]) > 1e-9), None)
            if piv is None:
                continue  # redundant row
            _pivot(T, basis, i, piv)
        keep.append(i)
    if len(keep) != m:
        T = T[keep]
        basis = [basis[i] for i in keep]
        m = len(keep)

    cost2 = np.zeros(total + m)
    cost2[:n] = c
    if not _run_simplex(T, basis, cost2, allow_cols=total):
        return "unbounded", None

    y = np.zeros(n)
    for i, j in enumerate(basis):
        if j < n:
            y[j] = T[i, -1]
    return "optimal", y


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    for i in range(len(T)):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    basis[row] = col


def _run_simplex(T, basis, cost, allow_cols) -> bool:
    """Minimize over columns [0, allow_cols). False when unbounded."""
    m = len(T)
    max_iter = 2000 * (m + allow_cols) + 200
    bland_after = 20 * (m + allow_cols) + 50
    for it in range(max_iter):
        # reduced costs: c_j - c_B . B^-1 A_j over the maintained tableau
        cb = cost[basis]
        red = cost[:allow_cols] - cb @ T[:, :allow_cols]
        if it < bland_after:
            enter = int(np.argmin(red))
            if red[enter] >= -TOL:
                return True
        else:  # Bland's rule to break cycles
            negs = np.nonzero(red < -TOL)[0]
            if negs.size == 0:
                return True
            enter = int(negs[0])

        col = T[:, enter]
        pos = col > TOL
        if not np.any(pos):
            return False
        ratios = np.full(m, np.inf)
        ratios[pos] = T[pos, -1] / col[pos]
        leave = int(np.argmin(ratios))
        if it >= bland_after:
            # smallest basis index among ties, per Bland
            best = ratios[leave]
            ties = [i for i in range(m) if ratios[i] <= best + TOL]
            leave = min(ties, key=lambda i: basis[i])
        _pivot(T, basis, leave, enter)
    raise NumericalFailure("simplex iteration limit reached")
