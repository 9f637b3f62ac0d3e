"""Dense two-phase revised simplex, plus an exact rational variant.

This is the only LP machinery in the package: everything that needs an LP
(concurrent flow, 2-hop flow and its dual, capacity fitting) goes through
`solve_lp` (float, numpy) or `solve_lp_exact` (Fraction, for small exact
feasibility problems).

Conventions
-----------
Problems are given as

    min / max   c . x
    s.t.        A[i] . x  (<= | >= | ==)  b[i]      for every row i
                x >= 0

Returned duals `y` satisfy value == y . b at optimality, with the sign
convention that for a minimisation problem rows with sense ">=" have y >= 0
and rows with "<=" have y <= 0 (the reverse under maximisation); equality
rows are unrestricted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

LE, GE, EQ = "<=", ">=", "=="

_REFACTOR_EVERY = 100
_STALL_LIMIT = 60


class LPError(Exception):
    pass


class LPInfeasible(LPError):
    pass


class LPUnbounded(LPError):
    pass


class LPIterationLimit(LPError):
    pass


@dataclass
class LPSolution:
    x: np.ndarray          # values of the original variables
    value: float           # objective in the caller's orientation
    duals: np.ndarray      # one multiplier per input row
    iterations: int


def solve_lp(c, A, b, senses, *, maximize=False, tol=1e-9, max_iter=None) -> LPSolution:
    """Solve the LP; raises LPInfeasible / LPUnbounded / LPIterationLimit."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    if A.ndim != 2:
        A = A.reshape((len(b), -1))
    m, n = A.shape
    if len(senses) != m or len(b) != m or len(c) != n:
        raise ValueError("inconsistent LP dimensions")

    obj = -c if maximize else c.copy()

    # Standard form: flip rows until b >= 0, then append slack/surplus columns.
    A = A.copy()
    senses = list(senses)
    flipped = np.zeros(m, dtype=bool)
    for i in range(m):
        if b[i] < 0:
            A[i] = -A[i]
            b[i] = -b[i]
            flipped[i] = True
            if senses[i] == LE:
                senses[i] = GE
            elif senses[i] == GE:
                senses[i] = LE

    slack_cols = []
    slack_of_row = {}
    for i, s in enumerate(senses):
        if s == LE:
            col = np.zeros(m)
            col[i] = 1.0
            slack_of_row[i] = n + len(slack_cols)
            slack_cols.append(col)
        elif s == GE:
            col = np.zeros(m)
            col[i] = -1.0
            slack_cols.append(col)
        elif s != EQ:
            raise ValueError(f"bad sense {s!r}")
    full = np.hstack([A, np.column_stack(slack_cols)]) if slack_cols else A
    n_real = full.shape[1]
    cost = np.concatenate([obj, np.zeros(n_real - n)])

    if max_iter is None:
        max_iter = 200 * (m + n_real) + 2000

    basis = np.empty(m, dtype=int)
    art_rows = [i for i in range(m) if i not in slack_of_row]
    for i in range(m):
        if i in slack_of_row:
            basis[i] = slack_of_row[i]
    iters = 0

    if art_rows:
        art = np.zeros((m, len(art_rows)))
        for j, i in enumerate(art_rows):
            art[i, j] = 1.0
            basis[i] = n_real + j
        tab1 = np.hstack([full, art])
        phase1_cost = np.zeros(tab1.shape[1])
        phase1_cost[n_real:] = 1.0
        basis, Binv, it = _simplex_core(phase1_cost, tab1, b, basis, tol,
                                        max_iter, forbidden_from=n_real)
        iters += it
        xB = Binv @ b
        if float(phase1_cost[basis] @ xB) > 1e-7:
            raise LPInfeasible("phase-1 optimum is positive")
        full, b, basis, keep_rows = _drive_out_artificials(tab1, b, basis, Binv,
                                                           n_real, tol)
    else:
        keep_rows = list(range(m))

    basis, Binv, it = _simplex_core(cost, full, b, basis, tol,
                                    max_iter - iters, forbidden_from=n_real)
    iters += it

    xB = Binv @ b
    x_full = np.zeros(n_real)
    x_full[basis] = xB
    x = x_full[:n]
    y_kept = cost[basis] @ Binv

    duals = np.zeros(m)
    for pos, row in enumerate(keep_rows):
        duals[row] = y_kept[pos]
    duals[flipped] = -duals[flipped]
    value = float(obj @ x)
    if maximize:
        value = -value
        duals = -duals
    return LPSolution(x=x, value=value, duals=duals, iterations=iters)


def _simplex_core(cost, A, b, basis, tol, max_iter, forbidden_from, Binv=None):
    """Revised simplex with Dantzig pricing; Bland's rule kicks in on stalls.

    Columns with index >= forbidden_from (artificials) never enter the basis.
    Returns (basis, Binv, iterations).
    """
    m = A.shape[0]
    basis = basis.copy()
    if Binv is None:
        Binv = _factorize(A, basis)
    bland = False
    stall = 0
    last_obj = np.inf
    it = 0
    since_refactor = 0
    while True:
        if it >= max_iter:
            raise LPIterationLimit(f"no convergence in {it} pivots")
        cB = cost[basis]
        y = cB @ Binv
        z = cost - y @ A
        z[basis] = 0.0
        if forbidden_from < A.shape[1]:
            z[forbidden_from:] = np.inf
        if bland:
            cand = np.flatnonzero(z < -tol)
            if cand.size == 0:
                return basis, Binv, it
            j = int(cand[0])
        else:
            j = int(np.argmin(z))
            if z[j] >= -tol:
                return basis, Binv, it
        d = Binv @ A[:, j]
        xB = Binv @ b
        pos = d > tol
        if not pos.any():
            raise LPUnbounded("improving direction is unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = np.maximum(xB[pos], 0.0) / d[pos]
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + tol)
        l = int(ties[np.argmin(basis[ties])])

        piv = d[l]
        binv_l = Binv[l].copy()
        Binv -= np.outer(d / piv, binv_l)
        Binv[l] = binv_l / piv
        basis[l] = j

        it += 1
        since_refactor += 1
        if since_refactor >= _REFACTOR_EVERY:
            Binv = _factorize(A, basis)
            since_refactor = 0
        obj_now = float(cost[basis] @ (Binv @ b))
        if obj_now >= last_obj - tol:
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True
        else:
            stall = 0
        last_obj = obj_now


def _factorize(A, basis):
    try:
        return np.linalg.inv(A[:, basis])
    except np.linalg.LinAlgError as exc:
        raise LPError(f"singular basis: {exc}") from exc


def _drive_out_artificials(tab, b, basis, Binv, n_real, tol):
    """Pivot artificials out of the basis; drop rows that turn out redundant.

    Returns (A_without_artificials, b, basis, keep_rows).
    """
    m = tab.shape[0]
    drop = []
    for i in range(m):
        if basis[i] < n_real:
            continue
        row = Binv[i] @ tab[:, :n_real]
        cand = [j for j in np.flatnonzero(np.abs(row) > 1e-8) if j not in set(basis)]
        if cand:
            basis[i] = int(cand[0])
            Binv = _factorize(tab, basis)
        else:
            drop.append(i)
    keep_rows = [i for i in range(m) if i not in drop]
    A2 = tab[np.ix_(keep_rows, range(n_real))]
    b2 = b[keep_rows]
    basis2 = np.array([basis[i] for i in keep_rows], dtype=int)
    return A2, b2, basis2, keep_rows


def simplex_min(cost, A, b, basis, *, Binv=None, tol=1e-9, max_iter=None):
    """Continue the simplex on min cost.x s.t. Ax = b, x >= 0 from a feasible basis.

    Intended for column generation: rows are fixed, columns may have been
    appended since the last call, and `basis`/`Binv` from that call remain
    valid.  Returns (x, value, y, basis, Binv, iterations).
    """
    cost = np.asarray(cost, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m = A.shape[0]
    if max_iter is None:
        max_iter = 200 * (m + A.shape[1]) + 2000
    basis = np.asarray(basis, dtype=int)
    basis, Binv, it = _simplex_core(cost, A, b, basis, tol, max_iter,
                                    forbidden_from=A.shape[1], Binv=Binv)
    xB = Binv @ b
    x = np.zeros(A.shape[1])
    x[basis] = xB
    y = cost[basis] @ Binv
    return x, float(cost @ x), y, basis, Binv, it


# ---------------------------------------------------------------------------
# Exact rational simplex (full tableau, Bland's rule).  Intended for small
# feasibility/fitting problems where float drift is unacceptable.
# ---------------------------------------------------------------------------

def solve_lp_exact(c, A, b, senses, *, maximize=False, max_iter=20000):
    """Exact simplex over Fractions.  Returns (x, value); raises LPError family."""
    m = len(b)
    n = len(c)
    c = [Fraction(v) for v in c]
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    senses = list(senses)
    if maximize:
        c = [-v for v in c]

    for i in range(m):
        if b[i] < 0:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]
            if senses[i] == LE:
                senses[i] = GE
            elif senses[i] == GE:
                senses[i] = LE

    # Columns: original | slacks | artificials.
    cols = [row[:] for row in A]
    n_slack = 0
    slack_of_row = {}
    for i, s in enumerate(senses):
        if s in (LE, GE):
            for r in range(m):
                cols[r].append(Fraction(1 if (r == i and s == LE) else
                                        (-1 if (r == i and s == GE) else 0)))
            if s == LE:
                slack_of_row[i] = n + n_slack
            n_slack += 1
    n_real = n + n_slack
    basis = [-1] * m
    art_of_row = {}
    for i in range(m):
        if i in slack_of_row:
            basis[i] = slack_of_row[i]
        else:
            for r in range(m):
                cols[r].append(Fraction(1 if r == i else 0))
            art_of_row[i] = n_real + len(art_of_row)
            basis[i] = art_of_row[i]
    n_total = n_real + len(art_of_row)

    T = [cols[i] + [b[i]] for i in range(m)]

    def pivot(pi, pj):
        piv = T[pi][pj]
        T[pi] = [v / piv for v in T[pi]]
        for r in range(m):
            if r != pi and T[r][pj] != 0:
                f = T[r][pj]
                T[r] = [T[r][k] - f * T[pi][k] for k in range(n_total + 1)]
        basis[pi] = pj

    def run(cost, allowed, limit):
        it = 0
        while True:
            if it > limit:
                raise LPIterationLimit("exact simplex pivot limit")
            cB = [cost[basis[r]] for r in range(m)]
            entering = -1
            for j in range(allowed):
                if j in basis:
                    continue
                zj = cost[j] - sum(cB[r] * T[r][j] for r in range(m))
                if zj < 0:
                    entering = j
                    break
            if entering < 0:
                return
            best = None
            for r in range(m):
                if T[r][entering] > 0:
                    ratio = T[r][n_total] / T[r][entering]
                    key = (ratio, basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                raise LPUnbounded("exact simplex: unbounded")
            pivot(best[1], entering)
            it += 1

    if art_of_row:
        p1 = [Fraction(0)] * n_real + [Fraction(1)] * len(art_of_row)
        run(p1, n_total, max_iter)
        if sum(p1[basis[r]] * T[r][n_total] for r in range(m)) > 0:
            raise LPInfeasible("exact phase-1 optimum positive")
        for i in range(m):
            if basis[i] >= n_real:
                for j in range(n_real):
                    if j not in basis and T[i][j] != 0:
                        pivot(i, j)
                        break
    p2 = c + [Fraction(0)] * (n_total - n)
    for i in range(m):
        if basis[i] >= n_real:
            p2[basis[i]] = Fraction(0)
    run(p2, n_real, max_iter)

    x = [Fraction(0)] * n
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = T[r][n_total]
    value = sum(c[j] * x[j] for j in range(n))
    if maximize:
        value = -value
    return x, value
