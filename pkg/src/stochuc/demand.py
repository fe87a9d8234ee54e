"""Finite Markov demand processes, quadrature scenario generation, path
sampling, and the summary-state machinery that multipliers are indexed by.

Stages are numbered t = 1..T.  Stage 1 always carries the single atom
D_1 = 0 (no dispatch happens in the first period, only commitment
decisions for period 2).  Internally all per-stage lists are 0-indexed,
so ``supports[0]`` belongs to stage 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SizeCapExceeded

PROB_TOL = 1e-12

SUMMARY_MODES = ("constant", "current_demand", "full_history")


def gauss_legendre_nodes(count, lo, hi):
    """Gauss-Legendre nodes and weights mapped affinely to [lo, hi].

    The returned weights sum to ``hi - lo``; the rule integrates
    polynomials up to degree ``2*count - 1`` exactly.
    """
    if count < 1:
        raise DomainError(f"need at least one node, got {count}")
    if not lo < hi:
        raise DomainError(f"empty interval [{lo}, {hi}]")
    x, w = np.polynomial.legendre.leggauss(count)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


@dataclass(frozen=True)
class DemandProcess:
    """Per-stage finite demand supports with Markov transition kernels.

    supports[t-1] holds the sorted demand values of stage t; kernels[t-1]
    is the row-stochastic matrix P_t(. | d) mapping stage-t values to
    stage-(t+1) values.  ``independent`` marks processes whose kernel rows
    are identical within each stage (stagewise independent demand).
    """

    supports: tuple
    kernels: tuple
    independent: bool = False

    def __post_init__(self):
        if len(self.supports) < 2:
            raise DomainError("a demand process needs at least two stages")
        if len(self.kernels) != len(self.supports) - 1:
            raise DomainError("need exactly T-1 transition kernels")
        first = np.asarray(self.supports[0])
        if first.shape != (1,) or first[0] != 0.0:
            raise DomainError("stage 1 must be the single atom D_1 = 0")
        for t, sup in enumerate(self.supports):
            sup = np.asarray(sup)
            if np.any(np.diff(sup) <= 0):
                raise DomainError(f"stage {t + 1} support not strictly increasing")
            if t > 0 and np.any(sup < 0):
                raise DomainError(f"stage {t + 1} has negative demand values")
        for t, ker in enumerate(self.kernels):
            ker = np.asarray(ker)
            if ker.shape != (len(self.supports[t]), len(self.supports[t + 1])):
                raise DomainError(f"kernel {t + 1} has wrong shape {ker.shape}")
            if np.any(ker < 0):
                raise DomainError(f"kernel {t + 1} has negative entries")
            if np.any(np.abs(ker.sum(axis=1) - 1.0) > PROB_TOL):
                raise DomainError(f"kernel {t + 1} rows do not sum to 1")

    @property
    def horizon(self):
        return len(self.supports)

    def stage_size(self, t):
        return len(self.supports[t - 1])

    def stage_support(self, t):
        return np.asarray(self.supports[t - 1], dtype=float)

    def kernel(self, t):
        """Transition matrix from stage t to stage t+1."""
        return np.asarray(self.kernels[t - 1], dtype=float)

    @classmethod
    def from_marginals(cls, supports, probs):
        """Stagewise-independent process: probs[t-1] is the marginal of
        stage t (stage 1 entry may be omitted or [1.0])."""
        supports = [np.asarray(s, dtype=float) for s in supports]
        probs = [np.asarray(p, dtype=float) for p in probs]
        if len(probs) == len(supports) - 1:
            probs = [np.array([1.0])] + probs
        kernels = tuple(
            np.tile(probs[t + 1], (len(supports[t]), 1)) for t in range(len(supports) - 1)
        )
        return cls(tuple(map(tuple, supports)), tuple(map(lambda k: tuple(map(tuple, k)), kernels)), independent=True)

    @classmethod
    def markov(cls, supports, kernels):
        supports = tuple(tuple(map(float, s)) for s in supports)
        kernels = tuple(tuple(map(tuple, np.asarray(k, dtype=float))) for k in kernels)
        return cls(supports, kernels, independent=False)

    def stage_marginals(self):
        """Forward marginal law of D_t for every stage."""
        out = [np.array([1.0])]
        for t in range(1, self.horizon):
            out.append(out[-1] @ self.kernel(t))
        return out

    def max_demand(self):
        return max(float(np.max(self.stage_support(t))) for t in range(1, self.horizon + 1))


def build_scenarios(mean_profile, mu, sigma, total_capacity, count=10):
    """Quadrature demand scenarios around a scaled mean profile.

    The stage-t support consists of ``count`` Gauss-Legendre nodes on
    [d - 4*sigma*d, d + 4*sigma*d] with d = mean_profile[t-2] * mu *
    total_capacity.  Node probabilities are the truncated-normal density
    at each node times its quadrature weight, renormalized to one; this
    choice is not forced by the quadrature construction and is recorded
    in instance metadata (`scenario_weighting`).
    """
    profile = np.asarray(mean_profile, dtype=float)
    if mu <= 0 or sigma <= 0:
        raise DomainError("mu and sigma must be positive")
    if np.any(profile <= 0) or np.any(profile > 1.0 + 1e-9):
        raise DomainError("mean profile must be normalized to (0, 1]")
    supports = [np.array([0.0])]
    probs = [np.array([1.0])]
    for d_rel in profile:
        d = d_rel * mu * total_capacity
        width = 4.0 * sigma * d
        nodes, weights = gauss_legendre_nodes(count, d - width, d + width)
        if nodes[0] < 0:
            raise DomainError(
                f"negative demand node {nodes[0]:.3f} (mean {d:.3f}, sigma {sigma});"
                " reduce sigma or the interval"
            )
        dens = np.exp(-0.5 * ((nodes - d) / (sigma * d)) ** 2)
        p = dens * weights
        probs.append(p / p.sum())
        supports.append(nodes)
    return DemandProcess.from_marginals(supports, probs)


@dataclass(frozen=True)
class SamplePath:
    """Demand indices for stages 1..T drawn from one keyed RNG stream."""

    indices: np.ndarray
    seed: int
    path_id: int

    def __post_init__(self):
        if self.indices[0] != 0:
            raise DomainError("stage 1 of a sample path must be the D_1 = 0 atom")


def _path_uniforms(seed, path_ids, draws):
    """One row of uniforms per path id from counter-based Philox streams.

    Streams are keyed by (seed, path_id), so results do not depend on
    evaluation order or how paths are split across workers.
    """
    out = np.empty((len(path_ids), draws))
    for row, pid in enumerate(path_ids):
        bitgen = np.random.Philox(key=(int(seed) & (2**64 - 1)) * 2**64 + (int(pid) & (2**64 - 1)))
        out[row] = np.random.Generator(bitgen).random(draws)
    return out


def sample_paths(process, seed, path_ids, start_stage=1, start_index=0):
    """Vectorized inverse-CDF sampling of many paths; rows follow path_ids.

    Column s of the result is the demand index at stage start_stage + s;
    column 0 is pinned to start_index (the D_1 = 0 atom by default).
    """
    T = process.horizon
    draws = T - start_stage
    uniforms = _path_uniforms(seed, path_ids, draws)
    n = len(path_ids)
    idx = np.zeros((n, draws + 1), dtype=np.int64)
    idx[:, 0] = start_index
    for s in range(draws):
        cdf = np.cumsum(process.kernel(start_stage + s), axis=1)
        rows = cdf[idx[:, s]]
        idx[:, s + 1] = np.minimum(
            np.sum(rows < uniforms[:, s][:, None], axis=1), rows.shape[1] - 1
        )
    return idx


def sample_path(process, seed, path_id):
    idx = sample_paths(process, seed, [path_id])[0]
    return SamplePath(indices=idx, seed=seed, path_id=path_id)


@dataclass(frozen=True)
class SummaryMap:
    """Finite summary v_t of the demand history, as index tables.

    sizes[t-1] is |V_t|; update[t-1] maps (v index at stage t, next demand
    index r) to the v index at stage t+1.  v_values[t-1] carries the
    representative value of each summary state where one exists (the
    demand value in current_demand mode, 0.0 in constant mode, None in
    full_history mode).
    """

    mode: str
    sizes: tuple
    update: tuple
    v_values: tuple

    def size(self, t):
        return self.sizes[t - 1]

    def next_v(self, t, v_idx, r):
        """Summary index at stage t+1 after observing demand index r."""
        return int(self.update[t - 1][v_idx, r])


def build_summary(process, mode, cap=100_000):
    """Construct the summary map for one of the three supported modes.

    constant mode requires a stagewise-independent process (otherwise a
    time-only multiplier cannot know the conditional law of future
    demands); this is enforced here rather than at solve time.
    """
    if mode not in SUMMARY_MODES:
        raise DomainError(f"unknown summary mode {mode!r}")
    T = process.horizon
    if mode == "constant":
        if not process.independent:
            for t in range(1, T):
                ker = process.kernel(t)
                if np.any(np.abs(ker - ker[0]) > PROB_TOL):
                    raise DomainError(
                        "constant summary mode requires stagewise-independent demand"
                    )
        sizes = tuple(1 for _ in range(T))
        update = tuple(
            np.zeros((1, process.stage_size(t + 1)), dtype=np.int32) for t in range(1, T)
        )
        v_values = tuple(np.array([0.0]) for _ in range(T))
        return SummaryMap(mode, sizes, update, v_values)
    if mode == "current_demand":
        sizes = tuple(process.stage_size(t) for t in range(1, T + 1))
        update = tuple(
            np.tile(
                np.arange(process.stage_size(t + 1), dtype=np.int32),
                (process.stage_size(t), 1),
            )
            for t in range(1, T)
        )
        v_values = tuple(process.stage_support(t) for t in range(1, T + 1))
        return SummaryMap(mode, sizes, update, v_values)
    # full_history: v enumerates demand-index prefixes (D_1 .. D_t)
    sizes = [1]
    update = []
    for t in range(1, T):
        r = process.stage_size(t + 1)
        nxt = sizes[-1] * r
        if nxt > cap:
            raise SizeCapExceeded(
                f"full-history summary needs {nxt} states at stage {t + 1} (cap {cap})"
            )
        update.append(
            (np.arange(sizes[-1], dtype=np.int32)[:, None] * r
             + np.arange(r, dtype=np.int32)[None, :])
        )
        sizes.append(nxt)
    v_values = tuple(None for _ in range(T))
    return SummaryMap("full_history", tuple(sizes), tuple(update), v_values)


def summary_demand_value(process, summary, t, v_idx):
    """Demand value pinned by a summary state, where the mode pins one."""
    if summary.mode == "current_demand":
        return float(process.stage_support(t)[v_idx])
    if summary.mode == "full_history":
        return float(process.stage_support(t)[v_idx % process.stage_size(t)])
    return None


@dataclass
class SummaryChain:
    """Exact forward law of the joint pair (v_t, D_t) on its reachable atoms.

    Off-support (v, d) combinations are never enumerated: an atom is one
    jointly-reachable pair.  atoms_d/atoms_v give the demand and summary
    indices of each atom, trans maps (atom, next demand index) to the next
    stage's atom, prows holds the corresponding kernel rows, and marginals
    the forward probabilities (starting from (v_1, D_1) = (0, 0), or from
    an arbitrary (stage, atom) for conditional chains).
    """

    process: DemandProcess
    summary: SummaryMap
    start_stage: int
    atoms_d: list = field(default_factory=list)
    atoms_v: list = field(default_factory=list)
    trans: list = field(default_factory=list)
    prows: list = field(default_factory=list)
    marginals: list = field(default_factory=list)

    def stage_slot(self, t):
        return t - self.start_stage

    def size(self, t):
        return len(self.atoms_d[self.stage_slot(t)])

    def atom_index(self, t, d_idx, v_idx):
        s = self.stage_slot(t)
        hits = np.flatnonzero((self.atoms_d[s] == d_idx) & (self.atoms_v[s] == v_idx))
        if len(hits) == 0:
            raise DomainError(f"(d={d_idx}, v={v_idx}) is not reachable at stage {t}")
        return int(hits[0])

    def demand_values(self, t):
        s = self.stage_slot(t)
        return self.process.stage_support(t)[self.atoms_d[s]]

    def v_probability(self, t):
        """Marginal law of v_t alone, as a vector over summary indices."""
        s = self.stage_slot(t)
        out = np.zeros(self.summary.size(t))
        np.add.at(out, self.atoms_v[s], self.marginals[s])
        return out

    def expected_price_term(self, multipliers):
        """Sum over stages of E[lambda_t(v_t) * D_t], computed exactly."""
        total = 0.0
        for t in range(self.start_stage, self.process.horizon + 1):
            s = self.stage_slot(t)
            lam = np.asarray(multipliers.values[t - 1])[self.atoms_v[s]]
            total += float(np.dot(self.marginals[s], lam * self.demand_values(t)))
        return total


def marginal_v_distribution(process, summary, start_stage=1, start_atom=None):
    """Exact forward propagation of the joint law of (v_t, D_t).

    Returns a SummaryChain whose per-stage `marginals` are the joint
    probability vectors over reachable (v, D) atoms.  With start_stage > 1
    the chain is conditional on the given starting atom (d_idx, v_idx).
    """
    T = process.horizon
    chain = SummaryChain(process=process, summary=summary, start_stage=start_stage)
    if start_stage == 1:
        d0, v0 = np.array([0]), np.array([0])
    else:
        if start_atom is None:
            raise DomainError("conditional chains need a starting (d, v) atom")
        d0, v0 = np.array([start_atom[0]]), np.array([start_atom[1]])
    chain.atoms_d.append(d0)
    chain.atoms_v.append(v0)
    chain.marginals.append(np.array([1.0]))
    for t in range(start_stage, T):
        d_cur, v_cur = chain.atoms_d[-1], chain.atoms_v[-1]
        r_next = process.stage_size(t + 1)
        upd = summary.update[t - 1]
        pairs = {}
        trans = np.empty((len(d_cur), r_next), dtype=np.int32)
        for a in range(len(d_cur)):
            for r in range(r_next):
                key = (r, int(upd[v_cur[a], r]))
                if key not in pairs:
                    pairs[key] = len(pairs)
                trans[a, r] = pairs[key]
        order = sorted(pairs, key=lambda k: k)
        remap = np.empty(len(pairs), dtype=np.int32)
        for new, key in enumerate(order):
            remap[pairs[key]] = new
        trans = remap[trans]
        kernel = process.kernel(t)
        prows = kernel[d_cur]
        nxt_d = np.array([k[0] for k in order], dtype=np.int64)
        nxt_v = np.array([k[1] for k in order], dtype=np.int64)
        marg = np.zeros(len(order))
        np.add.at(marg, trans.ravel(), (chain.marginals[-1][:, None] * prows).ravel())
        chain.atoms_d.append(nxt_d)
        chain.atoms_v.append(nxt_v)
        chain.trans.append(trans)
        chain.prows.append(prows)
        chain.marginals.append(marg)
    return chain
