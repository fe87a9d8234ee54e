"""Best-first branch and bound over binary variables.

Node relaxations are solved by the built-in bounded-variable simplex.
Branching picks the most fractional binary (ties to the lowest variable
index) and children LPs are solved at creation, so the heap always holds
true node bounds.  When a relaxation comes back integral the binaries
are fixed at their rounded values and the continuous part is re-solved,
which keeps incumbent objectives exact.
"""

from __future__ import annotations

import heapq
import time

import numpy as np

from .model import INT_TOL, MipSolution
from .simplex import solve_lp


def solve_bb(model, gap_tol=1e-6, node_limit=None, time_limit=None):
    c, A, senses, b, lo, hi = model.dense()
    bins = np.array(model.binary_indices(), dtype=np.int64)
    t0 = time.perf_counter()
    stats = {"nodes": 0, "lp_iterations": 0, "node_log": []}

    def lp(lo_n, hi_n):
        res = solve_lp(c, A, senses, b, lo_n, hi_n)
        stats["lp_iterations"] += res.iterations
        return res

    root = lp(lo, hi)
    if root.status == "infeasible":
        return MipSolution("infeasible", stats=stats)
    if root.status not in ("optimal",):
        return MipSolution("numerical", stats=stats)

    inc_x, inc_obj = None, np.inf
    counter = 0
    heap = [(root.objective, counter, lo, hi, root.x)]
    global_bound = root.objective
    status = None

    def tol(val):
        return gap_tol * max(1.0, abs(val))

    def try_incumbent(x, bound):
        nonlocal inc_x, inc_obj
        lo_f, hi_f = lo.copy(), hi.copy()
        rounded = np.round(x[bins])
        lo_f[bins] = rounded
        hi_f[bins] = rounded
        res = lp(lo_f, hi_f)
        if res.status == "optimal":
            cand_obj, cand_x = res.objective, res.x
        else:  # fall back to the integral relaxation point itself
            cand_obj, cand_x = bound, x
        if cand_obj < inc_obj - 1e-12:
            inc_obj, inc_x = cand_obj, cand_x

    while heap:
        if node_limit is not None and stats["nodes"] >= node_limit:
            status = "iter_limit"
            break
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            status = "gap_limit"
            break
        bound, _, lo_n, hi_n, x = heapq.heappop(heap)
        global_bound = bound
        if bound >= inc_obj - 1e-12:
            global_bound = min(inc_obj, global_bound)
            status = "optimal"
            break
        if inc_x is not None and inc_obj - bound <= tol(inc_obj):
            status = "optimal"
            break
        stats["nodes"] += 1
        stats["node_log"].append((bound, inc_obj))
        if len(bins):
            xb = x[bins]
            frac = np.minimum(np.abs(xb), np.abs(1.0 - xb))
            frac[(hi_n[bins] - lo_n[bins]) < 0.5] = 0.0
        else:
            frac = np.zeros(0)
        if frac.size == 0 or frac.max(initial=0.0) <= INT_TOL:
            try_incumbent(x, bound)
            continue
        j = bins[int(np.argmax(frac))]
        for fix in (0.0, 1.0):
            lo_c, hi_c = lo_n.copy(), hi_n.copy()
            lo_c[j] = fix
            hi_c[j] = fix
            res = lp(lo_c, hi_c)
            if res.status == "infeasible":
                continue
            if res.status != "optimal":
                return MipSolution("numerical", bound=global_bound, stats=stats)
            if res.objective < inc_obj - 1e-12:
                counter += 1
                heapq.heappush(heap, (res.objective, counter, lo_c, hi_c, res.x))

    if status is None:
        status = "optimal" if inc_x is not None else "infeasible"
        if heap:
            global_bound = min(global_bound, heap[0][0])
        else:
            global_bound = inc_obj if inc_x is not None else np.inf
    elif heap:
        global_bound = min(global_bound, heap[0][0])
    if inc_x is None and status == "optimal":
        status = "infeasible"
    stats["wall_time"] = time.perf_counter() - t0
    shift = model.objective_constant
    return MipSolution(status,
                       objective=None if inc_x is None else float(inc_obj + shift),
                       x=None if inc_x is None else inc_x,
                       bound=float(min(global_bound, inc_obj) + shift),
                       stats=stats)
