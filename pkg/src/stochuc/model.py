"""Unit-commitment data model: generator parameters, dynamic states,
feasible actions, state transitions, and per-stage costs.

Conventions (shared across the package):
  * A generator's status counter y = (alpha, beta) tracks consecutive
    on/off periods; exactly one of the two is nonzero.
  * The action (z, u) produces z MW in the current period and commits
    the generator on/off for the *next* period.
  * Production is bounded by [b_min, b_max] while committed and pinned to
    zero while off; ramping couples z to the previous output q, with a
    b_min allowance when turning on or shutting down.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .demand import DemandProcess
from .errors import CapacityShortfall, DomainError, InvalidAction

RAMP_TOL = 1e-9


@dataclass(frozen=True)
class GeneratorSpec:
    """Static parameters of one generator.

    b and c are the power/cost breakpoints of the piecewise-linear
    generation cost (b[0] = b_min, b[-1] = b_max).  Costs are per stage;
    startup may only be negative for trading pseudo-units, which must opt
    in via allow_negative_startup.
    """

    id: int
    b: tuple
    c: tuple
    min_up: int
    min_down: int
    ramp_up: float
    ramp_down: float
    no_load: float
    startup: float
    allow_negative_startup: bool = False

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if len(b) < 2:
            raise DomainError(f"generator {self.id}: need K >= 1 breakpoints")
        if np.any(np.diff(b) <= 0):
            raise DomainError(f"generator {self.id}: breakpoints must strictly increase")
        if b[0] < 0:
            raise DomainError(f"generator {self.id}: b_min must be nonnegative")
        if len(self.c) != len(b):
            raise DomainError(f"generator {self.id}: b and c length mismatch")
        if self.min_up < 1 or self.min_down < 1:
            raise DomainError(f"generator {self.id}: min up/down times must be >= 1")
        if self.ramp_up <= 0 or self.ramp_down <= 0:
            raise DomainError(f"generator {self.id}: ramp rates must be positive")
        if self.no_load < 0:
            raise DomainError(f"generator {self.id}: no-load cost must be nonnegative")
        if self.startup < 0 and not self.allow_negative_startup:
            raise DomainError(
                f"generator {self.id}: negative startup cost requires allow_negative_startup"
            )
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        object.__setattr__(self, "c", tuple(float(x) for x in self.c))

    @property
    def num_segments(self):
        return len(self.b) - 1

    @property
    def b_min(self):
        return self.b[0]

    @property
    def b_max(self):
        return self.b[-1]

    def generation_cost(self, z, committed=True):
        """Piecewise-linear cost F(z); F(0) = 0 for an off generator."""
        if not committed:
            if abs(z) > RAMP_TOL:
                raise DomainError(f"off generator cannot produce z={z}")
            return 0.0
        if z < self.b_min - RAMP_TOL or z > self.b_max + RAMP_TOL:
            raise DomainError(
                f"z={z} outside [{self.b_min}, {self.b_max}] for generator {self.id}"
            )
        return float(np.interp(z, self.b, self.c))

    def marginal_slope(self):
        """Cost of the fully-loaded unit per MW, used for merit ordering."""
        return (self.startup + self.no_load + self.c[-1]) / self.b_max


@dataclass(frozen=True)
class GeneratorState:
    """Dynamic state of one generator: counters, previous output, demand index."""

    alpha: int
    beta: int
    q: float
    d_index: int

    def __post_init__(self):
        if (self.alpha == 0) == (self.beta == 0):
            raise DomainError(f"exactly one of alpha/beta must be zero, got {self}")
        if self.alpha < 0 or self.beta < 0:
            raise DomainError("counters must be nonnegative")
        if self.q < 0:
            raise DomainError("previous production must be nonnegative")
        if self.beta >= 2 and self.q != 0:
            raise DomainError("a generator off for two or more periods has q = 0")

    @property
    def y(self):
        return (self.alpha, self.beta)


@dataclass(frozen=True)
class GeneratorAction:
    z: float
    u: int

    def __post_init__(self):
        if self.u not in (0, 1):
            raise DomainError(f"commitment u must be 0/1, got {self.u}")


def applied_commitment(y):
    """The commitment currently in effect (decided last period): 1 iff on."""
    alpha, beta = y
    return 1 if alpha >= 1 and beta == 0 else 0


def commitment_bounds(y, min_up, min_down):
    """Bounds (u_lo, u_hi) on the next-period commitment.

    u is forced to 1 while the minimum up time is unexpired and to 0
    while the minimum down time is unexpired; otherwise it is free.
    """
    alpha, beta = y
    u_lo = 1 if 1 <= alpha <= min_up - 1 else 0
    u_hi = 0 if 1 <= beta <= min_down - 1 else 1
    return u_lo, u_hi


def turn_on_indicator(y):
    """1 iff the generator turned on this period (ramp gets b_min headroom)."""
    return 1 if y == (1, 0) else 0


def ramp_window(state, spec):
    """Continuous production window implied by ramping at this state."""
    y = state.y
    ub = applied_commitment(y)
    lo = state.q - spec.ramp_down - (1 - ub) * spec.b_min
    hi = state.q + spec.ramp_up + turn_on_indicator(y) * spec.b_min
    return lo, hi


def _grid_window(spec, lo, hi, relax):
    """Breakpoint index range covering [lo, hi] on the production grid.

    With relax, the range is widened to include one grid point at or
    below lo and one at or above hi (empty windows cannot occur); without
    it the range is the exact in-window grid points and may be empty.
    """
    b = np.asarray(spec.b)
    K = len(b) - 1
    if relax:
        k_lo = max(0, int(np.searchsorted(b, lo + RAMP_TOL, side="right")) - 1)
        k_hi = int(np.searchsorted(b, hi - RAMP_TOL, side="left"))
        k_hi = min(k_hi, K)
    else:
        k_lo = int(np.searchsorted(b, lo - RAMP_TOL, side="left"))
        k_hi = int(np.searchsorted(b, hi + RAMP_TOL, side="right")) - 1
    return k_lo, k_hi


def shutdown_cap(spec):
    """Largest output from which the generator may turn off next period
    (its first off period must satisfy the ramp-down constraint at z=0)."""
    return spec.ramp_down + spec.b_min


def feasible_actions(state, spec, discretized=True, relax_ramp=False):
    """All feasible (z, u) pairs at a state.

    With discretized, z is restricted to the breakpoints (or 0 when off);
    relax_ramp widens the grid window by one point past each ramp bound,
    which is the device that keeps grid value recursions valid lower
    bounds.  In continuous mode (discretized=False) the returned set
    consists of the window endpoints plus interior breakpoints, which
    carries the full [min z, max z] range of the true action set.

    The returned list is sorted by (z, u) and may be empty only for an
    off generator whose pre-shutdown output exceeded ramp_down + b_min
    (a dead state that feasible commitment choices avoid).
    """
    y = state.y
    ub = applied_commitment(y)
    u_lo, u_hi = commitment_bounds(y, spec.min_up, spec.min_down)
    u_choices = [u for u in (0, 1) if u_lo <= u <= u_hi]
    actions = []
    if ub == 0:
        lo, _ = ramp_window(state, spec)
        if lo <= RAMP_TOL or relax_ramp:
            actions = [GeneratorAction(0.0, u) for u in u_choices]
        return actions
    lo, hi = ramp_window(state, spec)
    lo = max(lo, spec.b_min)
    hi = min(hi, spec.b_max)
    for u in u_choices:
        u_hi_z = hi
        if u == 0 and not relax_ramp:
            u_hi_z = min(u_hi_z, shutdown_cap(spec))
        if discretized:
            k_lo, k_hi = _grid_window(spec, lo, u_hi_z, relax_ramp)
            zs = [spec.b[k] for k in range(k_lo, k_hi + 1)]
        else:
            if u_hi_z < lo - RAMP_TOL:
                zs = []
            else:
                zs = sorted(
                    {lo, u_hi_z}
                    | {bk for bk in spec.b if lo < bk < u_hi_z}
                )
        actions.extend(GeneratorAction(float(z), u) for z in zs)
    actions.sort(key=lambda a: (a.z, a.u))
    return actions


def check_action(state, action, spec, tol=1e-7):
    """Raise InvalidAction unless (z, u) satisfies the production,
    commitment, and ramp constraints at this state."""
    y = state.y
    u_lo, u_hi = commitment_bounds(y, spec.min_up, spec.min_down)
    if not u_lo <= action.u <= u_hi:
        raise InvalidAction(f"u={action.u} violates commitment bounds {u_lo, u_hi} at {y}")
    ub = applied_commitment(y)
    if ub == 0:
        if abs(action.z) > tol:
            raise InvalidAction(f"off generator must have z=0, got {action.z}")
    else:
        if not spec.b_min - tol <= action.z <= spec.b_max + tol:
            raise InvalidAction(f"z={action.z} outside [{spec.b_min}, {spec.b_max}]")
    lo, hi = ramp_window(state, spec)
    if not lo - tol <= action.z <= hi + tol:
        raise InvalidAction(f"z={action.z} outside ramp window [{lo}, {hi}]")


def transition(state, action, next_demand_index, spec):
    """Next state after applying a feasible action.

    The status counter follows the six-case update (increment while the
    min up/down clock runs, saturate at the clock limit, switch on u);
    the previous-output coordinate becomes z.  Only the commitment bounds
    are validated here: callers feeding ramp-relaxed grid actions stay
    within this function's contract.
    """
    u_lo, u_hi = commitment_bounds(state.y, spec.min_up, spec.min_down)
    if not u_lo <= action.u <= u_hi:
        raise InvalidAction(
            f"u={action.u} violates commitment bounds {(u_lo, u_hi)} at {state.y}"
        )
    alpha, beta, u = state.alpha, state.beta, action.u
    if 0 < alpha < spec.min_up:
        y_next = (alpha + 1, 0)
    elif 0 < beta < spec.min_down:
        y_next = (0, beta + 1)
    elif alpha == spec.min_up:
        y_next = (spec.min_up, 0) if u == 1 else (0, 1)
    else:  # beta == min_down
        y_next = (0, spec.min_down) if u == 0 else (1, 0)
    return GeneratorState(y_next[0], y_next[1], float(action.z), int(next_demand_index))


def stage_cost(state, action, t, horizon, spec):
    """Startup + no-load + generation cost; the last stage charges
    generation only (its commitment decision has no effect)."""
    committed = applied_commitment(state.y) == 1
    cost = spec.generation_cost(action.z, committed=committed)
    if t < horizon:
        if state.y == (0, spec.min_down) and action.u == 1:
            cost += spec.startup
        cost += spec.no_load * action.u
    return cost


@dataclass(frozen=True)
class Instance:
    """A unit-commitment instance: fleet, horizon, and demand process.

    All generators start off with their minimum down time served
    (y_1 = (0, min_down), q_1 = 0) and stage 1 carries zero demand.
    """

    generators: tuple
    demand: DemandProcess
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.horizon < 2:
            raise DomainError("horizon must be at least 2 stages")
        if len(self.generators) == 0:
            raise DomainError("an instance needs at least one generator")
        ids = [g.id for g in self.generators]
        if len(set(ids)) != len(ids):
            raise DomainError("generator ids must be unique")
        total = sum(g.b_max for g in self.generators)
        peak = self.demand.max_demand()
        if total < peak:
            raise CapacityShortfall(
                f"total capacity {total:.3f} cannot cover peak demand {peak:.3f}"
            )
        object.__setattr__(self, "generators", tuple(self.generators))

    @property
    def horizon(self):
        return self.demand.horizon

    @property
    def num_generators(self):
        return len(self.generators)

    def initial_state(self, i):
        return GeneratorState(0, self.generators[i].min_down, 0.0, 0)

    def total_capacity(self):
        return sum(g.b_max for g in self.generators)
