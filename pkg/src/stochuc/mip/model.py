"""Dense mixed-integer linear model container.

Holds a variable registry, linear constraints, and a linear objective;
solvers and writers consume the dense arrays it exports.  Variables carry
an optional metadata tag linking them back to (generator, stage,
breakpoint) coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError

SENSES = ("<", "=", ">")

FEAS_TOL = 1e-7
INT_TOL = 1e-6


@dataclass
class Variable:
    name: str
    kind: str
    lo: float
    hi: float
    tag: tuple = None


@dataclass
class Constraint:
    coeffs: dict
    sense: str
    rhs: float
    name: str


class MipModel:
    def __init__(self, name="model"):
        self.name = name
        self.variables = []
        self.constraints = []
        self.objective = {}
        self.objective_constant = 0.0
        self._by_name = {}

    def add_var(self, name, lo=0.0, hi=None, kind="continuous", tag=None):
        if name in self._by_name:
            raise DomainError(f"duplicate variable name {name!r}")
        if kind not in ("continuous", "binary"):
            raise DomainError(f"unknown variable kind {kind!r}")
        if kind == "binary":
            lo = 0.0 if lo is None else float(lo)
            hi = 1.0 if hi is None else float(hi)
            if not (0 <= lo <= hi <= 1):
                raise DomainError(f"binary bounds [{lo}, {hi}] invalid for {name}")
        else:
            if hi is None or not (math.isfinite(lo) and math.isfinite(hi)):
                raise DomainError(f"continuous variable {name} needs finite bounds")
        idx = len(self.variables)
        self.variables.append(Variable(name, kind, float(lo), float(hi), tag))
        self._by_name[name] = idx
        return idx

    def var_index(self, name):
        return self._by_name[name]

    def add_constraint(self, coeffs, sense, rhs, name=None):
        if sense not in SENSES:
            raise DomainError(f"unknown sense {sense!r}")
        clean = {}
        for idx, coef in (coeffs.items() if isinstance(coeffs, dict) else coeffs):
            if not 0 <= idx < len(self.variables):
                raise DomainError(f"constraint references unknown variable {idx}")
            if coef != 0.0:
                clean[idx] = clean.get(idx, 0.0) + float(coef)
        if name is None:
            name = f"c{len(self.constraints)}"
        self.constraints.append(Constraint(clean, sense, float(rhs), name))

    def add_objective(self, idx, coef):
        if coef != 0.0:
            self.objective[idx] = self.objective.get(idx, 0.0) + float(coef)

    @property
    def num_vars(self):
        return len(self.variables)

    @property
    def num_constraints(self):
        return len(self.constraints)

    def binary_indices(self):
        return [i for i, v in enumerate(self.variables) if v.kind == "binary"]

    def dense(self):
        n, m = self.num_vars, self.num_constraints
        c = np.zeros(n)
        for i, coef in self.objective.items():
            c[i] = coef
        A = np.zeros((m, n))
        b = np.empty(m)
        senses = []
        for r, con in enumerate(self.constraints):
            for i, coef in con.coeffs.items():
                A[r, i] = coef
            b[r] = con.rhs
            senses.append(con.sense)
        lo = np.array([v.lo for v in self.variables])
        hi = np.array([v.hi for v in self.variables])
        return c, A, senses, b, lo, hi

    def objective_value(self, x):
        return self.objective_constant + sum(
            coef * x[i] for i, coef in self.objective.items()
        )

    def max_violation(self, x):
        """Largest constraint/bound violation of a candidate point."""
        worst = 0.0
        for v, xi in zip(self.variables, x):
            worst = max(worst, v.lo - xi, xi - v.hi)
        for con in self.constraints:
            lhs = sum(coef * x[i] for i, coef in con.coeffs.items())
            if con.sense == "<":
                worst = max(worst, lhs - con.rhs)
            elif con.sense == ">":
                worst = max(worst, con.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - con.rhs))
        return worst


@dataclass
class MipSolution:
    status: str
    objective: float = None
    x: np.ndarray = None
    bound: float = None
    stats: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status == "optimal"
