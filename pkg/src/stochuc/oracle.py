"""Exact brute-force joint dynamic programs for desk-scale instances.

These enumerate the full product of per-generator grids, so they are the
ground truth that the decomposed solver, the dual bounds, and the MIP
formulations are tested against.  Production levels live on the same
breakpoint grid as the decomposed solver; the linked recursion enforces
the demand equality exactly over grid sums, so oracle test instances are
built with demands that are achievable grid sums.

Everything here is deliberately single-threaded and vectorized only as
far as numpy broadcasting over the joint state space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .demand import marginal_v_distribution
from .errors import InfeasibleDemand, SizeCapExceeded
from .model import _grid_window, shutdown_cap
from .subproblem import StateGrid

LINK_TOL = 1e-9

STATE_ACTION_CAP = 10_000_000


@dataclass(frozen=True)
class JointState:
    """Product state: per-generator (status, previous output) plus the
    shared demand index (and summary index where one is in play)."""

    parts: tuple
    d_index: int
    v_index: int = 0


class _GenTable:
    """Per-generator grid states and grid actions for the joint sweeps."""

    def __init__(self, spec, relax):
        grid = StateGrid(spec)
        self.spec = spec
        self.grid = grid
        states = []
        for y in range(grid.num_status):
            if grid.u_floor[y]:
                if y == 0:
                    states.append((y, 0))
                    if spec.min_up == 1:
                        states.extend((y, 1 + k) for k in range(len(grid.b)))
                else:
                    states.extend((y, 1 + k) for k in range(len(grid.b)))
            else:
                states.append((y, 0))
        self.states = states
        self.index = {s: i for i, s in enumerate(states)}
        self.initial = self.index[(grid.num_status - 1, 0)]
        cap = shutdown_cap(spec)
        acts = []
        for y, q_slot in states:
            q = grid.q_val[q_slot]
            here = []
            for u in (0, 1):
                y2 = int(grid.y_next[y, u])
                if y2 < 0:
                    continue
                fixed = float(grid.y_startup[y, u]) + spec.no_load * u
                if grid.u_floor[y] == 0:
                    here.append((0.0, u, fixed, 0.0, self.index[(y2, 0)]))
                    continue
                lo = q - spec.ramp_down
                hi = q + spec.ramp_up + (spec.b[0] if grid.headroom[y] else 0.0)
                if u == 0 and not relax:
                    hi = min(hi, cap)
                k_lo, k_hi = _grid_window(spec, lo, hi, relax)
                for k in range(k_lo, k_hi + 1):
                    nxt = self.index[(y2, 1 + k)] if u == 1 else self.index[(y2, 0)]
                    here.append((spec.b[k], u, fixed + spec.c[k], spec.c[k], nxt))
            here.sort(key=lambda a: (a[0], a[1]))
            acts.append(here)
        width = max(len(a) for a in acts)
        n = len(states)
        self.z = np.zeros((n, width))
        self.cost_run = np.zeros((n, width))
        self.cost_term = np.zeros((n, width))
        self.next = np.zeros((n, width), dtype=np.int64)
        self.feasible = np.zeros((n, width), dtype=bool)
        self.u = np.zeros((n, width), dtype=np.int8)
        for i, here in enumerate(acts):
            for j, (z, u, crun, cterm, nxt) in enumerate(here):
                self.z[i, j] = z
                self.u[i, j] = u
                self.cost_run[i, j] = crun
                self.cost_term[i, j] = cterm
                self.next[i, j] = nxt
                self.feasible[i, j] = True
        self.width = width

    def decode(self, j):
        return j


def _demand_chain(process):
    """Chain view of the raw demand indices (no summary attached)."""
    T = process.horizon
    atoms_d = [np.array([0])] + [np.arange(process.stage_size(t)) for t in range(2, T + 1)]
    trans, prows = [], []
    for t in range(1, T):
        ker = process.kernel(t)
        trans.append(np.tile(np.arange(process.stage_size(t + 1), dtype=np.int64),
                             (process.stage_size(t), 1)))
        prows.append(ker)
    return atoms_d, trans, prows


def _axis_view(vec, axis, n):
    shape = [1] * n
    shape[axis] = -1
    return vec.reshape(shape)


class _JointSweep:
    """Backward induction over the product space, with or without the
    linking constraint and the price term."""

    def __init__(self, instance, relax, cap):
        self.instance = instance
        self.gens = [_GenTable(g, relax) for g in instance.generators]
        sizes = [len(g.states) for g in self.gens]
        widths = [g.width for g in self.gens]
        measure = int(np.prod([s * w for s, w in zip(sizes, widths)], dtype=np.float64))
        if np.prod([float(s * w) for s, w in zip(sizes, widths)]) > cap:
            raise SizeCapExceeded(
                f"joint state-action space ~{measure:.3g} exceeds cap {cap:.3g}"
            )
        self.sizes = sizes

    def run(self, atoms_d, trans, prows, demand_values, lam_rows, link,
            want_policy=False):
        """lam_rows: per-stage per-atom multiplier values (None disables the
        price term); link: enforce the per-stage demand equality."""
        inst = self.instance
        n = inst.num_generators
        T = inst.horizon
        gens = self.gens
        J_next = np.zeros(tuple(self.sizes) + (1,))
        policy = [None] * T if want_policy else None
        for t in range(T, 0, -1):
            A = len(atoms_d[t - 1])
            delta = demand_values[t - 1]
            if t == T:
                JE = np.broadcast_to(J_next[..., 0:1], tuple(self.sizes) + (A,))
            else:
                gathered = J_next[..., trans[t - 1]]
                JE = np.einsum("...ar,ar->...a", gathered, prows[t - 1])
            J_t = np.full(tuple(self.sizes) + (A,), np.inf)
            arg = np.full(tuple(self.sizes) + (A,), -1, dtype=np.int32) if want_policy else None
            combos = itertools.product(*[range(g.width) for g in gens])
            for combo_id, js in enumerate(combos):
                feas = None
                z_sum = 0.0
                cost = 0.0
                for axis, (g, j) in enumerate(zip(gens, js)):
                    f = _axis_view(g.feasible[:, j], axis, n)
                    feas = f if feas is None else (feas & f)
                    z_sum = z_sum + _axis_view(g.z[:, j], axis, n)
                    carr = g.cost_term if t == T else g.cost_run
                    cost = cost + _axis_view(carr[:, j], axis, n)
                if not np.any(feas):
                    continue
                idx = tuple(
                    _axis_view(g.next[:, j], axis, n)
                    for axis, (g, j) in enumerate(zip(gens, js))
                )
                future = JE[idx + (slice(None),)]
                total = cost[..., None] + future
                if lam_rows is not None:
                    total = total + lam_rows[t - 1] * (z_sum[..., None] - delta)
                if link:
                    ok = feas[..., None] & (
                        np.abs(z_sum[..., None] - delta) <= LINK_TOL
                    )
                else:
                    ok = np.broadcast_to(feas[..., None], total.shape)
                total = np.where(ok, total, np.inf)
                better = total < J_t
                if want_policy:
                    arg = np.where(better, np.int32(combo_id), arg)
                J_t = np.where(better, total, J_t)
            J_next = J_t
            if want_policy:
                policy[t - 1] = arg
        return J_next, policy


def _stage_demand_values(process, atoms_d):
    return [process.stage_support(t)[atoms_d[t - 1]] for t in range(1, process.horizon + 1)]


class OraclePolicy:
    """Decoded argmin combos of the linked joint DP."""

    def __init__(self, sweep, policy, atoms_d):
        self.sweep = sweep
        self.policy = policy
        self.atoms_d = atoms_d

    def action(self, t, part_indices, d_index):
        a = int(np.flatnonzero(self.atoms_d[t - 1] == d_index)[0])
        combo = int(self.policy[t - 1][tuple(part_indices) + (a,)])
        if combo < 0:
            raise InfeasibleDemand(f"no feasible joint action at stage {t}")
        out = []
        for g in reversed(self.sweep.gens):
            combo, j = divmod(combo, g.width)
            out.append(j)
        js = list(reversed(out))
        return [
            (float(g.z[s, j]), int(g.u[s, j]))
            for g, s, j in zip(self.sweep.gens, part_indices, js)
        ]


def exact_dp(instance, process=None, discretized=True, cap=STATE_ACTION_CAP,
             want_policy=False):
    """Optimal value (and optionally policy) of the linked joint DP.

    Actions live on the breakpoint grid with true ramp windows; the
    demand equality must hold exactly over grid sums.
    """
    if not discretized:
        raise NotImplementedError(
            "the oracle is grid-only by design; continuous dispatch is covered"
            " by the MIP-vs-enumeration tests"
        )
    process = process or instance.demand
    sweep = _JointSweep(instance, relax=False, cap=cap)
    atoms_d, trans, prows = _demand_chain(process)
    demand_values = _stage_demand_values(process, atoms_d)
    J, policy = sweep.run(atoms_d, trans, prows, demand_values, None, link=True,
                          want_policy=want_policy)
    init = tuple(g.initial for g in sweep.gens) + (0,)
    value = float(J[init])
    if not np.isfinite(value):
        raise InfeasibleDemand("no grid action combination meets some reachable demand")
    if want_policy:
        return value, OraclePolicy(sweep, policy, atoms_d)
    return value


def exact_relaxed_dp(instance, process, summary, multipliers, cap=STATE_ACTION_CAP):
    """Joint value of the price-relaxed DP (linking dropped, price term
    added), computed without exploiting its decomposability."""
    chain = marginal_v_distribution(process, summary)
    sweep = _JointSweep(instance, relax=True, cap=cap)
    T = process.horizon
    atoms_d = [chain.atoms_d[t - 1] for t in range(1, T + 1)]
    demand_values = [chain.demand_values(t) for t in range(1, T + 1)]
    lam_rows = [
        np.asarray(multipliers.values[t - 1], dtype=float)[chain.atoms_v[t - 1]]
        for t in range(1, T + 1)
    ]
    J, _ = sweep.run(atoms_d, chain.trans, chain.prows, demand_values, lam_rows,
                     link=False)
    init = tuple(g.initial for g in sweep.gens) + (0,)
    return float(J[init])
