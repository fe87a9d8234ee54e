"""Bounded-variable primal simplex with a two-phase start.

Dense revised simplex maintaining an explicit basis inverse with
product-form updates and periodic refactorization.  Pricing is Dantzig
(most violating reduced cost) and switches to Bland's rule after
10 * (rows + cols) iterations, which guarantees termination on
degenerate problems.  Variables may carry infinite bounds (slacks do);
the models built in this package keep structural variables boxed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
REFACTOR_EVERY = 64

AT_LO, AT_HI, BASIC, FREE = 0, 1, 2, 3


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | iter_limit | numerical
    x: np.ndarray = None
    objective: float = None
    iterations: int = 0


def _start_values(lo, hi):
    """Nonbasic starting point: each variable at its nearest finite bound."""
    n = len(lo)
    x = np.zeros(n)
    status = np.full(n, FREE, dtype=np.int8)
    for j in range(n):
        l, h = lo[j], hi[j]
        if np.isfinite(l) and (not np.isfinite(h) or abs(l) <= abs(h)):
            x[j], status[j] = l, AT_LO
        elif np.isfinite(h):
            x[j], status[j] = h, AT_HI
    return x, status


def _recompute_basics(A, b, B_inv, x, status, basis):
    x_nb = np.where(status == BASIC, 0.0, x)
    x[basis] = B_inv @ (b - A @ x_nb)


def _core(A, b, cost, lo, hi, x, status, basis, max_iters, bland_after):
    """Optimize the current (feasible) basis in place."""
    m = A.shape[0]
    try:
        B_inv = np.linalg.inv(A[:, basis])
    except np.linalg.LinAlgError:
        return "numerical", 0
    _recompute_basics(A, b, B_inv, x, status, basis)
    it = 0
    since_refactor = 0
    nonbasic_mask = status != BASIC
    while it < max_iters:
        it += 1
        y = cost[basis] @ B_inv
        d = cost - y @ A
        bland = it > bland_after
        enter, sigma, best = -1, 0.0, PIVOT_TOL
        for j in np.flatnonzero(nonbasic_mask):
            s, dj = status[j], d[j]
            if (s == AT_LO or s == FREE) and dj < -PIVOT_TOL:
                score, sg = -dj, 1.0
            elif (s == AT_HI or s == FREE) and dj > PIVOT_TOL:
                score, sg = dj, -1.0
            else:
                continue
            if bland:
                enter, sigma = j, sg
                break
            if score > best:
                best, enter, sigma = score, j, sg
        if enter < 0:
            return "optimal", it
        w = B_inv @ A[:, enter]
        t_ratio = np.inf
        leave_pos, leave_to = -1, AT_LO
        for p in range(m):
            wp = sigma * w[p]
            bi = basis[p]
            if wp > PIVOT_TOL:
                if not np.isfinite(lo[bi]):
                    continue
                tp = max((x[bi] - lo[bi]) / wp, 0.0)
                to = AT_LO
            elif wp < -PIVOT_TOL:
                if not np.isfinite(hi[bi]):
                    continue
                tp = max((hi[bi] - x[bi]) / (-wp), 0.0)
                to = AT_HI
            else:
                continue
            if tp < t_ratio - PIVOT_TOL:
                t_ratio, leave_pos, leave_to = tp, p, to
            elif tp <= t_ratio + PIVOT_TOL and leave_pos >= 0:
                better = (basis[p] < basis[leave_pos]) if bland else (
                    abs(w[p]) > abs(w[leave_pos])
                )
                if better:
                    t_ratio, leave_pos, leave_to = min(tp, t_ratio), p, to
        span = hi[enter] - lo[enter]
        if span <= t_ratio:
            if not np.isfinite(span):
                return "unbounded", it
            # bound flip: the entering variable crosses to its other bound
            x[basis] -= span * sigma * w
            x[enter] = hi[enter] if sigma > 0 else lo[enter]
            status[enter] = AT_HI if sigma > 0 else AT_LO
            continue
        if leave_pos < 0:
            return "unbounded", it
        x[enter] += sigma * t_ratio
        x[basis] -= t_ratio * sigma * w
        out = basis[leave_pos]
        status[out] = leave_to
        x[out] = lo[out] if leave_to == AT_LO else hi[out]
        nonbasic_mask[out] = True
        basis[leave_pos] = enter
        status[enter] = BASIC
        nonbasic_mask[enter] = False
        since_refactor += 1
        wp = w[leave_pos]
        if abs(wp) < PIVOT_TOL or since_refactor >= REFACTOR_EVERY:
            try:
                B_inv = np.linalg.inv(A[:, basis])
            except np.linalg.LinAlgError:
                return "numerical", it
            _recompute_basics(A, b, B_inv, x, status, basis)
            since_refactor = 0
        else:
            row_p = B_inv[leave_pos].copy()
            B_inv -= np.outer(w / wp, row_p)
            B_inv[leave_pos] = row_p / wp
    return "iter_limit", it


def solve_lp(c, A, senses, b, lo, hi, max_iters=None):
    """Minimize c@x subject to A x (sense) b and lo <= x <= hi.

    The returned x covers the structural variables only.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(b), len(c))
    b = np.asarray(b, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m, n = A.shape
    if m == 0:
        x = np.where(c > 0, lo, np.where(c < 0, hi, np.where(np.isfinite(lo), lo, 0.0)))
        if not np.all(np.isfinite(x[c != 0])):
            return LpResult("unbounded")
        return LpResult("optimal", x=x, objective=float(c @ x))

    slack_cols = []
    for r, sense in enumerate(senses):
        if sense == "=":
            continue
        col = np.zeros(m)
        col[r] = 1.0 if sense == "<" else -1.0
        slack_cols.append(col)
    n_slack = len(slack_cols)
    A_ns = np.hstack([A] + [col[:, None] for col in slack_cols]) if n_slack else A
    lo_ns = np.concatenate([lo, np.zeros(n_slack)])
    hi_ns = np.concatenate([hi, np.full(n_slack, np.inf)])

    x_ns, status_ns = _start_values(lo_ns, hi_ns)
    resid = b - A_ns @ x_ns
    art = np.diag(np.where(resid >= 0, 1.0, -1.0))
    A_full = np.hstack([A_ns, art])
    lo_all = np.concatenate([lo_ns, np.zeros(m)])
    hi_all = np.concatenate([hi_ns, np.full(m, np.inf)])
    x = np.concatenate([x_ns, np.abs(resid)])
    status = np.concatenate([status_ns, np.full(m, BASIC, dtype=np.int8)])
    n_struct = A_ns.shape[1]
    basis = list(range(n_struct, n_struct + m))
    total = A_full.shape[1]
    if max_iters is None:
        max_iters = 500 * (m + total)
    bland_after = 10 * (m + total)

    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    phase1 = np.zeros(total)
    phase1[n_struct:] = 1.0
    st, it1 = _core(A_full, b, phase1, lo_all, hi_all, x, status, basis,
                    max_iters, bland_after)
    if st in ("iter_limit", "numerical"):
        return LpResult(st, iterations=it1)
    if float(x[n_struct:].sum()) > FEAS_TOL * scale:
        return LpResult("infeasible", iterations=it1)
    hi_all[n_struct:] = 0.0
    np.clip(x[n_struct:], 0.0, 0.0, out=x[n_struct:])

    cost2 = np.zeros(total)
    cost2[:n] = c
    st, it2 = _core(A_full, b, cost2, lo_all, hi_all, x, status, basis,
                    max_iters, bland_after)
    iters = it1 + it2
    if st != "optimal":
        return LpResult(st, iterations=iters)
    if float(np.abs(A_full @ x - b).max(initial=0.0)) > FEAS_TOL * scale:
        return LpResult("numerical", iterations=iters)
    xs = x[:n].copy()
    return LpResult("optimal", x=xs, objective=float(c @ xs), iterations=iters)
