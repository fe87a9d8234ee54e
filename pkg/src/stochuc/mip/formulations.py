"""The two unit-commitment MIP formulations.

Perfect information: given one demand path, the full-horizon problem
with turn-on variables (they strengthen the relaxation), windowed
turn-on/turn-off inequalities for min up/down times, ramp rows with
b_min allowances at turn-on and shutdown, and the convex-combination
rows for the piecewise-linear cost.

Lookahead: the single-stage problem whose objective adds the expected
next-stage relaxed value as a piecewise-linear function of production,
split over the two commitment branches so the future term stays linear.
Ramp bounds here are the true ones, which is what makes the rolled-out
policy feasible.

Variable/row naming keeps every name within eight characters so the
fixed-format MPS export stays aligned.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..model import applied_commitment, commitment_bounds, ramp_window, shutdown_cap
from .model import MipModel

TERMINAL_CONVENTIONS = ("paper", "mdp")


def build_perfect_info(instance, path_indices, terminal_cost_convention="paper"):
    """Full-horizon MIP for one demand path.

    path_indices holds the demand index of every stage (index 0 is the
    zero-demand first stage).  With the "mdp" convention the commitment
    and startup costs of the final stage are dropped, matching the
    stagewise cost the dynamic programs charge; "paper" keeps them (the
    optimizer then zeroes u_T and w_T, so optima agree).
    """
    if terminal_cost_convention not in TERMINAL_CONVENTIONS:
        raise DomainError(f"unknown terminal cost convention {terminal_cost_convention!r}")
    process = instance.demand
    T = instance.horizon
    demand = [float(process.stage_support(t)[path_indices[t - 1]]) for t in range(1, T + 1)]
    m = MipModel("pinfo")
    n = instance.num_generators
    u = {}
    w = {}
    z = {}
    e = {}
    gam = {}
    for i, g in enumerate(instance.generators):
        cmax = max(0.0, max(g.c))
        cmin = min(0.0, min(g.c))
        for t in range(T + 1):
            fixed0 = dict(lo=0.0, hi=0.0) if t == 0 else {}
            u[i, t] = m.add_var(f"u{i:02d}{t:03d}", kind="binary",
                                tag=("u", g.id, t), **fixed0)
            w[i, t] = m.add_var(f"w{i:02d}{t:03d}", kind="binary",
                                tag=("w", g.id, t))
        for t in range(1, T + 1):
            z[i, t] = m.add_var(f"z{i:02d}{t:03d}", lo=0.0, hi=g.b_max,
                                tag=("z", g.id, t))
            e[i, t] = m.add_var(f"e{i:02d}{t:03d}", lo=cmin, hi=cmax,
                                tag=("e", g.id, t))
            for k in range(len(g.b)):
                gam[i, t, k] = m.add_var(f"q{i:02d}{t:03d}{k:02d}", lo=0.0, hi=1.0,
                                         tag=("gamma", g.id, t, k))
    for t in range(1, T + 1):
        m.add_constraint({z[i, t]: 1.0 for i in range(n)}, "=", demand[t - 1],
                         name=f"d{t:03d}")
    for i, g in enumerate(instance.generators):
        up, down = g.min_up, g.min_down
        m.add_constraint({w[i, 0]: 1.0, u[i, 0]: -1.0}, "=", 0.0, name=f"w0{i:02d}")
        for t in range(1, T + 1):
            m.add_constraint({w[i, t]: 1.0, u[i, t]: -1.0, u[i, t - 1]: 1.0}, ">",
                             0.0, name=f"v{i:02d}{t:03d}")
        for tp in range(T):
            coeffs = {w[i, r]: 1.0 for r in range(max(0, tp - up + 1), tp + 1)}
            coeffs[u[i, tp]] = coeffs.get(u[i, tp], 0.0) - 1.0
            m.add_constraint(coeffs, "<", 0.0, name=f"a{i:02d}{tp:03d}")
        for tp in range(down, T):
            coeffs = {w[i, r]: 1.0 for r in range(tp - down + 1, tp + 1)}
            coeffs[u[i, tp - down]] = coeffs.get(u[i, tp - down], 0.0) + 1.0
            m.add_constraint(coeffs, "<", 1.0, name=f"f{i:02d}{tp:03d}")
        for t in range(1, T + 1):
            rd = {z[i, t]: -1.0, u[i, t - 1]: g.b_min}
            ru = {z[i, t]: 1.0, w[i, t - 1]: -g.b_min}
            if t > 1:
                rd[z[i, t - 1]] = 1.0
                ru[z[i, t - 1]] = -1.0
            m.add_constraint(rd, "<", g.ramp_down + g.b_min, name=f"rd{i:02d}{t:03d}")
            m.add_constraint(ru, "<", g.ramp_up, name=f"ru{i:02d}{t:03d}")
            K1 = len(g.b)
            m.add_constraint(
                {**{gam[i, t, k]: 1.0 for k in range(K1)}, u[i, t - 1]: -1.0},
                "=", 0.0, name=f"pc{i:02d}{t:03d}")
            m.add_constraint(
                {**{gam[i, t, k]: -g.b[k] for k in range(K1)}, z[i, t]: 1.0},
                "=", 0.0, name=f"pz{i:02d}{t:03d}")
            m.add_constraint(
                {**{gam[i, t, k]: -g.c[k] for k in range(K1)}, e[i, t]: 1.0},
                "=", 0.0, name=f"pe{i:02d}{t:03d}")
        last_commit = T if terminal_cost_convention == "paper" else T - 1
        for t in range(1, T + 1):
            m.add_objective(e[i, t], 1.0)
        for t in range(1, last_commit + 1):
            m.add_objective(u[i, t], g.no_load)
            m.add_objective(w[i, t], g.startup)
    return m


def perfect_info_counts(instance):
    """Closed-form row/column counts of build_perfect_info (documented in
    docs/mip-formulations.md and pinned by a test)."""
    T = instance.horizon
    cols = sum(2 * (T + 1) + 2 * T + T * len(g.b) for g in instance.generators)
    rows = T + sum(1 + T + T + max(0, T - g.min_down) + 2 * T + 3 * T
                   for g in instance.generators)
    return rows, cols


class LookaheadProblem:
    """Stage MIP plus the bookkeeping to read actions back out."""

    def __init__(self, model, z_idx, u_idx, u_fixed):
        self.model = model
        self.z_idx = z_idx
        self.u_idx = u_idx
        self.u_fixed = u_fixed

    def actions(self, x):
        out = []
        for zi, ui, uf in zip(self.z_idx, self.u_idx, self.u_fixed):
            zval = 0.0 if zi is None else float(x[zi])
            uval = uf if ui is None else int(round(x[ui]))
            out.append((zval, uval))
        return out


def build_lookahead(instance, t, states, v_index, tables):
    """One-step lookahead stage problem at a realized joint state.

    states are the generators' current states (sharing one demand index);
    tables are their relaxed value tables solved with true ramp windows,
    queried at stage t+1 as the future-value source.  The two commitment
    branches get separate convex-combination weights so each carries its
    own expected future value; weights for outputs above the shutdown cap
    are pinned to zero on the turn-off branch.
    """
    chain = tables[0].chain
    process = chain.process
    T = process.horizon
    d_index = states[0].d_index
    atom = chain.atom_index(t, d_index, v_index)
    s = t - chain.start_stage
    terminal = t == T
    demand_value = float(process.stage_support(t)[d_index])
    m = MipModel("lookahead")
    z_idx, u_idx, u_fixed = [], [], []
    link = {}
    for i, (g, x, tab) in enumerate(zip(instance.generators, states, tables)):
        grid = tab.grid
        y_i = grid.y_index(x.y)
        committed = applied_commitment(x.y) == 1
        u_lo, u_hi = commitment_bounds(x.y, g.min_up, g.min_down)
        if terminal:
            u_lo = u_hi = u_lo  # commitment is costless and inert: pin it
        prow = None if terminal else chain.prows[s][atom]
        nxt = None if terminal else chain.trans[s][atom]

        def expected_future(y2, slot):
            if terminal:
                return 0.0
            vals = tab.L[s + 1][y2, slot, nxt]
            return float(np.dot(prow, vals))

        if not committed:
            # off: z pinned to zero, only the commitment choice matters
            ui = None
            if u_lo < u_hi:
                ui = m.add_var(f"u{i:02d}", kind="binary", tag=("u", g.id))
            fut_off = expected_future(int(grid.y_next[y_i, 0]), 0)
            if u_hi == 1:
                fut_on = expected_future(int(grid.y_next[y_i, 1]), 0)
                turn_cost = 0.0 if terminal else g.startup + g.no_load
                if ui is None:  # forced on
                    m.objective_constant += turn_cost + fut_on
                else:
                    m.add_objective(ui, turn_cost + fut_on - fut_off)
                    m.objective_constant += fut_off
            else:
                m.objective_constant += fut_off
            zi = m.add_var(f"z{i:02d}", lo=0.0, hi=0.0, tag=("z", g.id))
            link[zi] = 1.0
            z_idx.append(zi)
            u_idx.append(ui)
            u_fixed.append(u_lo if ui is None else None)
            continue
        lo, hi = ramp_window(x, g)
        lo = max(lo, g.b_min)
        hi = min(hi, g.b_max)
        if hi < lo - 1e-9:
            raise DomainError(
                f"generator {g.id} has an empty production window at stage {t}"
            )
        zi = m.add_var(f"z{i:02d}", lo=lo, hi=hi, tag=("z", g.id))
        link[zi] = 1.0
        ui = None
        if u_lo < u_hi and not terminal:
            ui = m.add_var(f"u{i:02d}", kind="binary", tag=("u", g.id))
        u_eff = u_lo if ui is None else None
        y_on = int(grid.y_next[y_i, 1])
        y_off = int(grid.y_next[y_i, 0]) if grid.y_next[y_i, 0] >= 0 else -1
        cap = shutdown_cap(g)
        K1 = len(g.b)
        g1 = [m.add_var(f"a{i:02d}{k:02d}", lo=0.0, hi=1.0, tag=("g1", g.id, k))
              for k in range(K1)]
        need_off = (ui is not None) or (u_eff == 0)
        g0 = []
        if need_off:
            g0 = [m.add_var(f"b{i:02d}{k:02d}", lo=0.0,
                            hi=1.0 if g.b[k] <= cap + 1e-9 else 0.0,
                            tag=("g0", g.id, k))
                  for k in range(K1)]
        # convexity rows split by the commitment branch
        row_on = {gk: 1.0 for gk in g1}
        row_off = {gk: 1.0 for gk in g0}
        if ui is not None:
            row_on[ui] = -1.0
            m.add_constraint(row_on, "=", 0.0, name=f"s1{i:02d}")
            row_off[ui] = 1.0
            m.add_constraint(row_off, "=", 1.0, name=f"s0{i:02d}")
        elif u_eff == 1:
            m.add_constraint(row_on, "=", 1.0, name=f"s1{i:02d}")
        else:
            m.add_constraint(row_off, "=", 1.0, name=f"s0{i:02d}")
            m.add_constraint(row_on, "=", 0.0, name=f"s1{i:02d}")
        zdef = {zi: 1.0}
        for k in range(K1):
            zdef[g1[k]] = -g.b[k]
            if need_off:
                zdef[g0[k]] = zdef.get(g0[k], 0.0) - g.b[k]
        m.add_constraint(zdef, "=", 0.0, name=f"zd{i:02d}")
        for k in range(K1):
            fut1 = expected_future(y_on, 1 + k) if u_eff != 0 else 0.0
            m.add_objective(g1[k], g.c[k] + fut1)
            if need_off:
                fut0 = expected_future(y_off, 0) if y_off >= 0 else 0.0
                m.add_objective(g0[k], g.c[k] + fut0)
        if not terminal:
            if ui is not None:
                m.add_objective(ui, g.no_load)
            elif u_eff == 1:
                m.objective_constant += g.no_load
        z_idx.append(zi)
        u_idx.append(ui)
        u_fixed.append(u_eff)
    m.add_constraint(link, "=", demand_value, name="dem")
    return LookaheadProblem(m, z_idx, u_idx, u_fixed)
