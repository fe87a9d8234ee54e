"""Per-generator relaxed MDP solved by exact backward induction.

The state grid couples a generator's (status, previous output) cells
with the jointly reachable (demand, summary) atoms of each stage.  The
previous-output axis carries slot 0 for q = 0 (an off generator, or the
period right after turn-on) and slots 1..K+1 for the cost breakpoints;
production decisions are restricted to the breakpoints, with the ramp
window optionally widened by one grid point past each bound, which is
what keeps the value recursion a valid lower-bound engine.

An off generator's value does not depend on the output it shut down
from: with the relaxed windows shutting down is unrestricted, and
without them the pre-shutdown output is capped at ramp_down + b_min, so
in both regimes the off value is computed once at the q = 0 slot.  The
turn-off action carries that cap explicitly in the unrelaxed sweep;
docs/value-grid-notes.md spells the argument out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .demand import marginal_v_distribution
from .errors import DomainError
from .model import GeneratorAction, _grid_window

Q_MATCH_TOL = 1e-9


@dataclass
class StateGrid:
    """Index layout of one generator's discretized state space."""

    spec: object
    b: np.ndarray = field(init=False)
    c: np.ndarray = field(init=False)
    q_val: np.ndarray = field(init=False)
    y_next: np.ndarray = field(init=False)
    y_startup: np.ndarray = field(init=False)
    u_floor: np.ndarray = field(init=False)
    headroom: np.ndarray = field(init=False)

    def __post_init__(self):
        spec = self.spec
        up, down = spec.min_up, spec.min_down
        Y = up + down
        self.b = np.asarray(spec.b, dtype=np.float64)
        self.c = np.asarray(spec.c, dtype=np.float64)
        self.q_val = np.concatenate(([0.0], self.b))
        y_next = np.full((Y, 2), -1, dtype=np.intc)
        y_startup = np.zeros((Y, 2), dtype=np.float64)
        for idx in range(up - 1):
            y_next[idx, 1] = idx + 1
        y_next[up - 1, 1] = up - 1
        y_next[up - 1, 0] = up
        for idx in range(up, up + down - 1):
            y_next[idx, 0] = idx + 1
        y_next[up + down - 1, 0] = up + down - 1
        y_next[up + down - 1, 1] = 0
        y_startup[up + down - 1, 1] = spec.startup
        self.y_next = y_next
        self.y_startup = y_startup
        self.u_floor = (np.arange(Y) < up).astype(np.int8)
        self.headroom = (np.arange(Y) == 0).astype(np.int8)

    @property
    def num_status(self):
        return self.spec.min_up + self.spec.min_down

    @property
    def num_q(self):
        return len(self.q_val)

    def y_index(self, y):
        alpha, beta = y
        if alpha >= 1 and beta == 0:
            if alpha > self.spec.min_up:
                raise DomainError(f"alpha={alpha} beyond min_up={self.spec.min_up}")
            return alpha - 1
        if beta >= 1 and alpha == 0:
            if beta > self.spec.min_down:
                raise DomainError(f"beta={beta} beyond min_down={self.spec.min_down}")
            return self.spec.min_up + beta - 1
        raise DomainError(f"invalid status tuple {y}")

    def y_tuple(self, idx):
        up = self.spec.min_up
        return (idx + 1, 0) if idx < up else (0, idx - up + 1)

    def q_slot(self, q):
        """Slot of an on-grid previous output; IndexError when off-grid."""
        if abs(q) <= Q_MATCH_TOL:
            return 0
        k = int(np.searchsorted(self.b, q - Q_MATCH_TOL))
        if k >= len(self.b) or abs(self.b[k] - q) > Q_MATCH_TOL:
            raise IndexError(f"q={q} is not a grid value for generator {self.spec.id}")
        return k + 1

    def action_of(self, z_slot, u):
        z = 0.0 if z_slot < 0 else float(self.b[z_slot])
        return GeneratorAction(z, int(u))


@dataclass
class ValueTable:
    """Backward-induction values and argmin actions of one subproblem.

    L[s], act_z[s], act_u[s] hold stage t = start_stage + s as arrays of
    shape (status, q slot, atom); the boundary stage T+1 is an implicit
    zero and is not stored.
    """

    grid: StateGrid
    chain: object
    relax: bool
    start_stage: int
    L: list
    act_z: list
    act_u: list

    def stage_arrays(self, t):
        s = t - self.start_stage
        return self.L[s], self.act_z[s], self.act_u[s]

    def initial_value(self):
        """L at the canonical initial state (off with down time served)."""
        y0 = self.grid.num_status - 1
        return float(self.L[0][y0, 0, 0])

    def value_at(self, t, y, q, d_index, v_index):
        L, _, _ = self.stage_arrays(t)
        a = self.chain.atom_index(t, d_index, v_index)
        return float(L[self.grid.y_index(y), self.grid.q_slot(q), a])


def solve_subproblem(spec, process, summary, multipliers, relax_ramp=True,
                     chain=None, grid=None, kernel=None):
    """Solve one generator's relaxed recursion over the full state grid.

    multipliers must expose .values with one vector per stage over the
    summary states.  Returns a ValueTable with deterministic argmin
    actions (ties break on lowest z, then staying off).
    """
    if chain is None:
        chain = marginal_v_distribution(process, summary)
    if grid is None:
        grid = StateGrid(spec)
    if kernel is None:
        kernel = _kernels.stage_sweep
    T = process.horizon
    start = chain.start_stage
    Y, Q = grid.num_status, grid.num_q
    n_stages = T - start + 1
    L = [None] * n_stages
    act_z = [None] * n_stages
    act_u = [None] * n_stages
    L_next = np.zeros((Y, Q, 1))
    for t in range(T, start - 1, -1):
        s = t - start
        A = chain.size(t)
        lam = np.ascontiguousarray(
            np.asarray(multipliers.values[t - 1], dtype=np.float64)[chain.atoms_v[s]]
        )
        if t == T:
            trans = np.zeros((A, 1), dtype=np.intc)
            prows = np.ones((A, 1))
        else:
            trans = np.ascontiguousarray(chain.trans[s], dtype=np.intc)
            prows = np.ascontiguousarray(chain.prows[s])
        L_t = np.empty((Y, Q, A))
        z_t = np.empty((Y, Q, A), dtype=np.int16)
        u_t = np.empty((Y, Q, A), dtype=np.int8)
        kernel(L_next, trans, prows, lam, grid.b, grid.c, grid.q_val,
               grid.y_next, grid.y_startup, grid.u_floor, grid.headroom,
               spec.no_load, spec.ramp_up, spec.ramp_down,
               int(t == T), int(relax_ramp),
               L_t, z_t, u_t)
        L[s], act_z[s], act_u[s] = L_t, z_t, u_t
        L_next = L_t
    return ValueTable(grid=grid, chain=chain, relax=relax_ramp,
                      start_stage=start, L=L, act_z=act_z, act_u=act_u)


def greedy_action(table, t, x, v):
    """Stored argmin action at a solved state; pure lookup."""
    grid = table.grid
    a = table.chain.atom_index(t, x.d_index, v)
    y = grid.y_index(x.y)
    q = grid.q_slot(x.q)
    _, act_z, act_u = table.stage_arrays(t)
    z_slot, u = int(act_z[y, q, a]), int(act_u[y, q, a])
    if z_slot == -9:
        raise DomainError(f"state {(x.y, x.q)} has no feasible action")
    return grid.action_of(z_slot, u)


def recompute_cell(table, multipliers, t, y_idx, q_slot, atom):
    """Re-evaluate the recursion at one cell by direct enumeration.

    Slow reference path used to check the kernels (Bellman residuals and
    argmin tie rules); mirrors the kernel's window construction through
    numpy primitives rather than sharing its code.
    """
    grid, chain = table.grid, table.chain
    spec = grid.spec
    T = chain.process.horizon
    s = t - table.start_stage
    lam = float(np.asarray(multipliers.values[t - 1])[chain.atoms_v[s][atom]])
    terminal = t == T
    cap = spec.ramp_down + spec.b[0]

    def future(y2, q2):
        if terminal:
            return 0.0
        L_next = table.L[s + 1]
        row = table.chain.trans[s][atom]
        return float(np.dot(table.chain.prows[s][atom], L_next[y2, q2, row]))

    best = (np.inf, np.inf, np.inf)
    best_action = (-9, -1)
    q = grid.q_val[q_slot]
    for u in (0, 1):
        y2 = int(grid.y_next[y_idx, u])
        if y2 < 0:
            continue
        fixed = 0.0 if terminal else grid.y_startup[y_idx, u] + spec.no_load * u
        if grid.u_floor[y_idx] == 0:
            if not table.relax and q > cap + Q_MATCH_TOL:
                continue
            val = fixed + future(y2, 0)
            key = (val, 0.0, u)
            if key < best:
                best, best_action = key, (-1, u)
            continue
        lo = q - spec.ramp_down
        hi = q + spec.ramp_up + (spec.b[0] if grid.headroom[y_idx] else 0.0)
        if u == 0 and not table.relax:
            hi = min(hi, cap)
        k_lo, k_hi = _grid_window(spec, lo, hi, table.relax)
        for k in range(k_lo, k_hi + 1):
            z = spec.b[k]
            val = fixed + spec.c[k] + lam * z + future(y2, 1 + k if u == 1 else 0)
            key = (val, z, u)
            if key < best:
                best, best_action = key, (k, u)
    return best[0], best_action
