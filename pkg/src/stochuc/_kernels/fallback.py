"""Pure-numpy backward-induction stage sweep.

This is the reference implementation of the hot kernel; the compiled
extension in _core.pyx computes exactly the same recursion with plain C
loops.  Grid layout shared by both:

  * status axis y: indices 0..min_up-1 are the on states (alpha = idx+1),
    indices min_up..min_up+min_down-1 the off states (beta = idx-min_up+1);
  * previous-output axis q: slot 0 means q = 0 (off, or the period right
    after turn-on), slot 1+k means q = b[k];
  * atom axis a: jointly reachable (demand, summary) pairs of the stage.

Action encoding in the argmin outputs: z slot -1 is "off, z = 0", slot
k in 0..K is "z = b[k]"; infeasible cells carry +inf value, z slot -9
and u = -1.

Tie-breaking is lexicographic on (value, z, u), so the lowest production
level wins and staying off wins among equal-z candidates.
"""

import numpy as np

RAMP_TOL = 1e-9

BACKEND = "python"


def _window_min(W, k_lo, k_hi):
    """First-argmin of W[k, :] over per-query index windows.

    W has shape (K+1, A); k_lo/k_hi are int arrays of shape (Q,).  Returns
    (vals, idxs) of shape (Q, A) with +inf/-9 for empty windows.  Uses a
    sparse table so all Q queries vectorize; ties resolve to the smallest
    k, matching a left-to-right scan.
    """
    nk, na = W.shape
    nq = len(k_lo)
    levels_v = [W]
    levels_i = [np.broadcast_to(np.arange(nk, dtype=np.int64)[:, None], W.shape)]
    span = 1
    while 2 * span <= nk:
        pv, pi = levels_v[-1], levels_i[-1]
        lv, rv = pv[: nk - 2 * span + 1], pv[span: nk - span + 1]
        li, ri = pi[: nk - 2 * span + 1], pi[span: nk - span + 1]
        take_left = lv <= rv
        levels_v.append(np.where(take_left, lv, rv))
        levels_i.append(np.where(take_left, li, ri))
        span *= 2
    vals = np.full((nq, na), np.inf)
    idxs = np.full((nq, na), -9, dtype=np.int64)
    length = k_hi - k_lo + 1
    ok = length >= 1
    if not np.any(ok):
        return vals, idxs
    j = np.zeros(nq, dtype=np.int64)
    j[ok] = np.frexp(length[ok].astype(float))[1] - 1
    for jv in np.unique(j[ok]):
        rows = np.flatnonzero(ok & (j == jv))
        lv = levels_v[jv][k_lo[rows]]
        li = levels_i[jv][k_lo[rows]]
        start2 = k_hi[rows] - (1 << jv) + 1
        rv = levels_v[jv][start2]
        ri = levels_i[jv][start2]
        left_wins = (lv < rv) | ((lv == rv) & (li <= ri))
        vals[rows] = np.where(left_wins, lv, rv)
        idxs[rows] = np.where(left_wins, li, ri)
    return vals, idxs


def stage_sweep(L_next, trans, prows, lam, b, c, q_val,
                y_next, y_startup, u_floor, headroom,
                no_load, ramp_up, ramp_down, terminal, relax,
                L_out, z_out, u_out):
    """One backward-induction stage over the full (y, q, atom) grid."""
    Y, Q, _ = L_next.shape
    K = len(b) - 1
    A = len(lam)
    # expected next value per (next status, next q slot, current atom)
    M = np.einsum("yqar,ar->yqa", L_next[:, :, trans], prows)

    cap = ramp_down + b[0]
    cap_k = int(np.searchsorted(b, cap + RAMP_TOL, side="right")) - 1

    L_out[:] = np.inf
    z_out[:] = -9
    u_out[:] = -1

    best_v = np.empty((Q, A))
    best_k = np.empty((Q, A), dtype=np.int64)
    best_u = np.empty((Q, A), dtype=np.int8)

    for y in range(Y):
        best_v[:] = np.inf
        best_k[:] = 2 * K + 9  # any feasible k compares smaller
        best_u[:] = 2
        if u_floor[y] == 0:
            # off: z = 0 forced; feasibility of the first off period
            if relax:
                q_ok = np.ones(Q, dtype=bool)
            else:
                q_ok = q_val <= cap + RAMP_TOL
            for u in (0, 1):
                y2 = y_next[y, u]
                if y2 < 0:
                    continue
                val = M[y2, 0, :].copy()
                if not terminal:
                    val += y_startup[y, u] + no_load * u
                cand = np.where(q_ok[:, None], val[None, :], np.inf)
                upd = (cand < best_v) | ((cand == best_v) & (u < best_u))
                best_v = np.where(upd, cand, best_v)
                best_u = np.where(upd, np.int8(u), best_u)
            feasible = np.isfinite(best_v)
            L_out[y] = best_v
            z_out[y] = np.where(feasible, -1, -9)
            u_out[y] = np.where(feasible, best_u, -1)
            continue
        # committed: z ranges over a ramp window of breakpoints
        lo = q_val - ramp_down
        hi = q_val + ramp_up + (b[0] if headroom[y] else 0.0)
        if relax:
            k_lo = np.maximum(0, np.searchsorted(b, lo + RAMP_TOL, side="right") - 1)
            k_hi = np.minimum(K, np.searchsorted(b, hi - RAMP_TOL, side="left"))
        else:
            k_lo = np.searchsorted(b, lo - RAMP_TOL, side="left")
            k_hi = np.searchsorted(b, hi + RAMP_TOL, side="right") - 1
        for u in (0, 1):
            y2 = y_next[y, u]
            if y2 < 0:
                continue
            W = np.outer(b, lam) + c[:, None]
            if not terminal:
                W += no_load * u
            if u == 1:
                W += M[y2, 1:, :]
            else:
                W += M[y2, 0, :][None, :]
            kh = k_hi
            if u == 0 and not relax:
                kh = np.minimum(k_hi, cap_k)
            vals, idxs = _window_min(W, k_lo, kh)
            upd = (vals < best_v) | (
                (vals == best_v)
                & ((idxs < best_k) | ((idxs == best_k) & (u < best_u)))
            )
            best_v = np.where(upd, vals, best_v)
            best_k = np.where(upd, idxs, best_k)
            best_u = np.where(upd, np.int8(u), best_u)
        feasible = np.isfinite(best_v)
        L_out[y] = best_v
        z_out[y] = np.where(feasible, best_k, -9).astype(np.int16)
        u_out[y] = np.where(feasible, best_u, -1)
