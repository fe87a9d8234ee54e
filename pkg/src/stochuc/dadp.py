"""Dual ascent over demand-state-dependent multipliers.

The dual function is evaluated by solving one relaxed MDP per generator
and subtracting the exact expected price term, so the reported lower
bounds are deterministic.  Ascent steps follow a decaying schedule
rho * eta^k along stochastic (batch-averaged) or exact supergradients;
since supergradient ascent is not monotone, the best bound seen is
tracked and returned alongside the final iterate.

Gradient cells live in probability-weighted coordinates: the component
for (t, v) is E[(total production - demand) * 1{v_t = v}], which is both
what a batch of simulated paths estimates when cell sums are divided by
the batch size and the true partial derivative of the dual function with
respect to lambda_t(v).
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .demand import marginal_v_distribution, sample_paths, summary_demand_value
from .errors import CapacityShortfall, DomainError
from .subproblem import solve_subproblem

log = logging.getLogger(__name__)

LAMBDA_GUARD = 1e6


@dataclass
class MultiplierTable:
    """lambda_t(v) for every stage and summary state; entries free-signed."""

    values: list
    mode: str

    def copy(self):
        return MultiplierTable([np.array(v, dtype=float) for v in self.values], self.mode)

    @classmethod
    def zeros(cls, summary):
        return cls([np.zeros(n) for n in summary.sizes], summary.mode)

    def embed(self, summary):
        """Broadcast this table onto a richer summary (e.g. constant-mode
        multipliers copied to every demand state); the relaxed problem and
        its bound are unchanged by the embedding."""
        if self.mode == summary.mode:
            return self.copy()
        if self.mode != "constant":
            raise DomainError(f"cannot embed {self.mode} multipliers into {summary.mode}")
        return MultiplierTable(
            [np.full(n, float(v[0])) for v, n in zip(self.values, summary.sizes)],
            summary.mode,
        )

    def max_abs(self):
        return max(float(np.max(np.abs(v))) for v in self.values)


@dataclass
class DualIterate:
    k: int
    bound: float
    step: float
    grad_norm: float
    wall_time: float


@dataclass
class DadpConfig:
    rho: float = None
    eta: float = 0.99
    max_iters: int = 250
    batch_size: int = 1000
    seed: int = 0
    exact_gradient: bool = False
    workers: int = 1
    init: MultiplierTable = None

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise DomainError("eta must lie in (0, 1)")
        if self.max_iters < 0 or self.batch_size < 1:
            raise DomainError("max_iters must be >= 0 and batch_size >= 1")
        if self.rho is not None and self.rho <= 0:
            raise DomainError("rho must be positive")


@dataclass
class DadpResult:
    best_multipliers: MultiplierTable
    best_bound: float
    best_iteration: int
    last_multipliers: MultiplierTable
    iterates: list = field(default_factory=list)

    @property
    def bound(self):
        return self.best_bound


def merit_order_price(instance, demand_value):
    """Slope of the marginal unit when demand is stacked in merit order."""
    slopes = np.array([g.marginal_slope() for g in instance.generators])
    caps = np.array([g.b_max for g in instance.generators])
    order = np.argsort(slopes, kind="stable")
    cum = np.cumsum(caps[order])
    if demand_value > cum[-1] + 1e-9:
        raise CapacityShortfall(
            f"demand {demand_value} exceeds total capacity {cum[-1]}"
        )
    j = int(np.searchsorted(cum, demand_value - 1e-9))
    j = min(j, len(cum) - 1)
    return float(slopes[order][j])


def init_multipliers(instance, process, summary):
    """Merit-order initialization: each multiplier starts at the slope of
    the last unit needed to cover its demand state (the stage's expected
    demand in constant mode)."""
    marginals = process.stage_marginals()
    values = []
    for t in range(1, process.horizon + 1):
        n = summary.size(t)
        row = np.empty(n)
        for v in range(n):
            d = summary_demand_value(process, summary, t, v)
            if d is None:
                d = float(np.dot(marginals[t - 1], process.stage_support(t)))
            row[v] = merit_order_price(instance, d)
        values.append(row)
    return MultiplierTable(values, summary.mode)


def default_step_scale(instance, process):
    """rho = 50 / peak expected demand, which matches 50 / (mu * TotCap)
    for instances generated from a normalized profile."""
    marginals = process.stage_marginals()
    peak = max(
        float(np.dot(marginals[t - 1], process.stage_support(t)))
        for t in range(2, process.horizon + 1)
    )
    return 50.0 / peak


def solve_all_subproblems(instance, process, summary, multipliers, relax_ramp=True,
                          chain=None, workers=1):
    """One relaxed MDP solve per generator, optionally fanned out over a
    thread pool (the compiled kernel releases the GIL)."""
    if chain is None:
        chain = marginal_v_distribution(process, summary)

    def solve(spec):
        return solve_subproblem(spec, process, summary, multipliers,
                                relax_ramp=relax_ramp, chain=chain)

    if workers > 1 and instance.num_generators > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(solve, instance.generators))
    return [solve(g) for g in instance.generators]


def lower_bound(tables, process, summary, multipliers, chain=None,
                initial_parts=None):
    """Dual value: sum of subproblem values at the initial state minus the
    exact expected price term."""
    if chain is None:
        chain = tables[0].chain
    if initial_parts is None:
        total = sum(tab.initial_value() for tab in tables)
    else:
        total = sum(
            float(tab.L[0][y, q, 0]) for tab, (y, q) in zip(tables, initial_parts)
        )
    return total - chain.expected_price_term(multipliers)


def _policy_rollout(tables, chain, paths):
    """Greedy-policy simulation of all paths at once.

    Returns (viol, v_idx): per-(stage, path) total demand violation and
    the summary index visited, both shaped (stages, num_paths).
    """
    process = chain.process
    start = chain.start_stage
    T = process.horizon
    n_paths = paths.shape[0]
    n_stages = T - start + 1
    viol = np.empty((n_stages, n_paths))
    v_seen = np.empty((n_stages, n_paths), dtype=np.int64)
    atom = np.zeros(n_paths, dtype=np.int64)
    gen_y = [np.full(n_paths, tab.grid.num_status - 1, dtype=np.int64) for tab in tables]
    gen_q = [np.zeros(n_paths, dtype=np.int64) for tab in tables]
    for s in range(n_stages):
        t = start + s
        total_z = np.zeros(n_paths)
        for i, tab in enumerate(tables):
            grid = tab.grid
            az = tab.act_z[s][gen_y[i], gen_q[i], atom]
            au = tab.act_u[s][gen_y[i], gen_q[i], atom].astype(np.int64)
            z = np.where(az >= 0, grid.b[np.maximum(az, 0)], 0.0)
            total_z += z
            if t < T:
                on = grid.u_floor[gen_y[i]] == 1
                gen_q[i] = np.where((au == 1) & on, az.astype(np.int64) + 1, 0)
                gen_y[i] = grid.y_next[gen_y[i], au].astype(np.int64)
        delta = process.stage_support(t)[chain.atoms_d[s][atom]]
        viol[s] = total_z - delta
        v_seen[s] = chain.atoms_v[s][atom]
        if t < T:
            atom = chain.trans[s][atom, paths[:, s + 1]]
    return viol, v_seen


def sampled_supergradient(tables, process, summary, multipliers, batch_size, seed,
                          chain=None, path_offset=0):
    """Batch estimate of the supergradient.

    Each path adds its stage-t demand violation to the cell of the
    summary state it visited; cell sums are divided by the batch size, so
    unvisited cells stay zero and the estimate is unbiased for the
    probability-weighted gradient.  Keyed RNG streams make the result
    independent of evaluation order and worker count.
    """
    if chain is None:
        chain = tables[0].chain
    start = chain.start_stage
    start_d = int(chain.atoms_d[0][0])
    ids = range(path_offset, path_offset + batch_size)
    paths = sample_paths(process, seed, ids, start_stage=start, start_index=start_d)
    viol, v_seen = _policy_rollout(tables, chain, paths)
    g = [np.zeros(summary.size(t)) for t in range(start, process.horizon + 1)]
    for s in range(viol.shape[0]):
        np.add.at(g[s], v_seen[s], viol[s] / batch_size)
    return g


def exact_supergradient(tables, process, summary, multipliers, chain=None):
    """Exact probability-weighted supergradient by forward propagation of
    each generator's (state, atom) law under its greedy policy."""
    if chain is None:
        chain = tables[0].chain
    start = chain.start_stage
    T = process.horizon
    n_stages = T - start + 1
    g = []
    for s in range(n_stages):
        t = start + s
        row = np.zeros(summary.size(t))
        np.add.at(row, chain.atoms_v[s],
                  -chain.marginals[s] * chain.demand_values(t))
        g.append(row)
    for tab in tables:
        grid = tab.grid
        Y, Q = grid.num_status, grid.num_q
        dist = np.zeros((Y, Q, 1))
        dist[Y - 1, 0, 0] = 1.0
        for s in range(n_stages):
            t = start + s
            az, au = tab.act_z[s], tab.act_u[s]
            zval = np.where(az >= 0, grid.b[np.maximum(az, 0)], 0.0)
            per_atom = np.einsum("yqa,yqa->a", dist, zval)
            np.add.at(g[s], chain.atoms_v[s], per_atom)
            if t == T:
                break
            A2 = chain.size(t + 1)
            nxt = np.zeros((Y, Q, A2))
            on = (grid.u_floor[:, None, None] == 1)
            y2 = grid.y_next[np.arange(Y)[:, None, None],
                             np.maximum(au, 0).astype(np.int64)]
            q2 = np.where((au == 1) & on, az.astype(np.int64) + 1, 0)
            mass_ok = dist > 0
            for r in range(chain.trans[s].shape[1]):
                a2 = chain.trans[s][:, r]
                w = chain.prows[s][:, r]
                m = dist * w[None, None, :]
                sel = mass_ok
                np.add.at(
                    nxt,
                    (y2[sel], q2[sel], np.broadcast_to(a2, dist.shape)[sel]),
                    m[sel],
                )
            dist = nxt
    return g


def run_dadp(instance, process, summary, config, chain=None):
    """Full dual ascent (initialize, iterate, track the best bound).

    Re-solves every subproblem from scratch each iteration; the final
    multipliers are evaluated too, so max_iters=0 just reports the
    initialization bound.
    """
    if chain is None:
        chain = marginal_v_distribution(process, summary)
    rho = config.rho if config.rho is not None else default_step_scale(instance, process)
    lam = (config.init.embed(summary) if config.init is not None
           else init_multipliers(instance, process, summary))
    best = None
    best_k = -1
    best_bound = -np.inf
    iterates = []
    t0 = time.perf_counter()
    for k in range(1, config.max_iters + 2):
        tables = solve_all_subproblems(instance, process, summary, lam,
                                       chain=chain, workers=config.workers)
        bound = lower_bound(tables, process, summary, lam, chain=chain)
        if bound > best_bound:
            best_bound, best, best_k = bound, lam.copy(), k - 1
        if k == config.max_iters + 1:
            iterates.append(DualIterate(k - 1, bound, 0.0, 0.0,
                                        time.perf_counter() - t0))
            break
        if config.exact_gradient:
            g = exact_supergradient(tables, process, summary, lam, chain=chain)
        else:
            g = sampled_supergradient(tables, process, summary, lam,
                                      config.batch_size, config.seed, chain=chain,
                                      path_offset=(k - 1) * config.batch_size)
        step = rho * config.eta ** k
        grad_norm = float(np.sqrt(sum(float(np.dot(gi, gi)) for gi in g)))
        lam = MultiplierTable(
            [v + step * gi for v, gi in zip(lam.values, g)], lam.mode
        )
        if lam.max_abs() > LAMBDA_GUARD:
            log.warning("multiplier magnitude passed %g at iteration %d",
                        LAMBDA_GUARD, k)
        iterates.append(DualIterate(k - 1, bound, step, grad_norm,
                                    time.perf_counter() - t0))
    return DadpResult(best_multipliers=best, best_bound=best_bound,
                      best_iteration=best_k, last_multipliers=lam,
                      iterates=iterates)
