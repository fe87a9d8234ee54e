"""Fixed-format MPS writer/parser and the plain-text solution format.

The writer emits the classic column layout (fields at columns 2, 5, 15,
25, 40, 50), OBJSENSE MIN, integer markers around binary runs, a complete
RHS section, and explicit BOUNDS; RANGES is never used.  The parser
accepts exactly this subset, which is what the external-solver bridge
exchanges.  Solution files are `variable value` lines, one per variable,
with optional `#` comments and an optional `=obj=` line.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericalFailure, ParseError
from .model import MipModel, MipSolution

OBJ_ROW = "COST"


def _num(x):
    return f"{x:.12g}"


def _field(f1, f2, f3="", f4="", f5="", f6=""):
    line = f" {f1:<2} {f2:<8}"
    if f3 or f4 != "":
        line = f"{line:<14} {f3:<8}  {f4:<12}"
    if f5 or f6 != "":
        line = f"{line:<39} {f5:<8}  {f6:<12}"
    return line.rstrip()


def write_mps(model, path):
    """Serialize a model; minimization objective, binaries via markers."""
    lines = [f"NAME          {model.name}", "OBJSENSE", "    MIN", "ROWS"]
    lines.append(_field("N", OBJ_ROW))
    for con in model.constraints:
        sense = {"<": "L", "=": "E", ">": "G"}[con.sense]
        lines.append(_field(sense, con.name))
    lines.append("COLUMNS")
    marker_on = False
    n_marker = 0
    for idx, var in enumerate(model.variables):
        want = var.kind == "binary"
        if want != marker_on:
            kind = "'INTORG'" if want else "'INTEND'"
            lines.append(f"    MKR{n_marker:<5} {'MARKER':<19}{kind}")
            n_marker += 1
            marker_on = want
        entries = []
        if idx in model.objective:
            entries.append((OBJ_ROW, model.objective[idx]))
        for con in model.constraints:
            if idx in con.coeffs:
                entries.append((con.name, con.coeffs[idx]))
        if not entries:
            entries.append((OBJ_ROW, 0.0))
        for row, coef in entries:
            lines.append(_field("", var.name, row, _num(coef)))
    if marker_on:
        lines.append(f"    MKR{n_marker:<5} {'MARKER':<19}'INTEND'")
    lines.append("RHS")
    if model.objective_constant != 0.0:
        lines.append(_field("", "RHS", OBJ_ROW, _num(-model.objective_constant)))
    for con in model.constraints:
        if con.rhs != 0.0:
            lines.append(_field("", "RHS", con.name, _num(con.rhs)))
    lines.append("BOUNDS")
    for var in model.variables:
        if var.lo == var.hi:
            lines.append(_field("FX", "BND", var.name, _num(var.lo)))
        elif var.kind == "binary":
            if (var.lo, var.hi) == (0.0, 1.0):
                lines.append(_field("BV", "BND", var.name))
            else:
                lines.append(_field("LO", "BND", var.name, _num(var.lo)))
                lines.append(_field("UP", "BND", var.name, _num(var.hi)))
        else:
            if var.lo != 0.0:
                lines.append(_field("LO", "BND", var.name, _num(var.lo)))
            lines.append(_field("UP", "BND", var.name, _num(var.hi)))
    lines.append("ENDATA")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mps(path):
    """Parse the documented MPS subset back into a MipModel."""
    section = None
    name = "model"
    rows = []  # (sense, name) in order, objective excluded
    row_sense = {}
    obj_row = None
    columns = {}  # var -> list of (row, coef)
    integer = {}
    marker_on = False
    rhs = {}
    bounds = {}
    order = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("*"):
                continue
            if not line[0].isspace():
                head = line.split()
                section = head[0].upper()
                if section == "NAME" and len(head) > 1:
                    name = head[1]
                if section == "ENDATA":
                    break
                if section == "RANGES":
                    raise ParseError("RANGES sections are not supported", lineno)
                continue
            tok = line.split()
            if section == "OBJSENSE":
                if tok[0].upper() != "MIN":
                    raise ParseError(f"unsupported objective sense {tok[0]!r}", lineno)
            elif section == "ROWS":
                sense, rname = tok[0].upper(), tok[1]
                if sense == "N":
                    if obj_row is not None:
                        raise ParseError("multiple objective rows", lineno)
                    obj_row = rname
                elif sense in ("L", "E", "G"):
                    rows.append(rname)
                    row_sense[rname] = {"L": "<", "E": "=", "G": ">"}[sense]
                else:
                    raise ParseError(f"unknown row sense {sense!r}", lineno)
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "MARKER":
                    marker_on = "INTORG" in tok[2]
                    continue
                vname = tok[0]
                if vname not in columns:
                    columns[vname] = []
                    integer[vname] = marker_on
                    order.append(vname)
                pairs = tok[1:]
                if len(pairs) % 2:
                    raise ParseError("odd number of column fields", lineno)
                for rname, val in zip(pairs[::2], pairs[1::2]):
                    try:
                        columns[vname].append((rname, float(val)))
                    except ValueError as exc:
                        raise ParseError(str(exc), lineno) from None
            elif section == "RHS":
                pairs = tok[1:]
                for rname, val in zip(pairs[::2], pairs[1::2]):
                    rhs[rname] = float(val)
            elif section == "BOUNDS":
                btype = tok[0].upper()
                vname = tok[2]
                lo, hi = bounds.get(vname, (0.0, None))
                if btype == "UP":
                    hi = float(tok[3])
                elif btype == "LO":
                    lo = float(tok[3])
                elif btype == "FX":
                    lo = hi = float(tok[3])
                elif btype == "BV":
                    lo, hi = 0.0, 1.0
                elif btype == "FR":
                    lo, hi = -np.inf, None
                else:
                    raise ParseError(f"unsupported bound type {btype!r}", lineno)
                bounds[vname] = (lo, hi)
            elif section in (None, "NAME"):
                raise ParseError("data before any section header", lineno)
    if obj_row is None:
        raise ParseError("no objective row declared")
    model = MipModel(name)
    for vname in order:
        lo, hi = bounds.get(vname, (0.0, None))
        if integer[vname]:
            if hi is None:
                hi = 1.0
            model.add_var(vname, lo=lo, hi=hi, kind="binary")
        else:
            if hi is None:
                raise ParseError(
                    f"continuous variable {vname} has no upper bound; only the"
                    " boxed subset written by this package is supported"
                )
            model.add_var(vname, lo=lo, hi=hi)
    by_row = {rname: {} for rname in rows}
    for vname in order:
        idx = model.var_index(vname)
        for rname, coef in columns[vname]:
            if rname == obj_row:
                model.add_objective(idx, coef)
            elif rname in by_row:
                by_row[rname][idx] = by_row[rname].get(idx, 0.0) + coef
            else:
                raise ParseError(f"coefficient for undeclared row {rname!r}")
    for rname in rows:
        model.add_constraint(by_row[rname], row_sense[rname], rhs.get(rname, 0.0),
                             name=rname)
    model.objective_constant = -rhs.get(obj_row, 0.0)
    return model


def write_solution(path, model, solution):
    with open(path, "w") as fh:
        fh.write(f"# status {solution.status}\n")
        if solution.objective is not None:
            fh.write(f"=obj= {_num(solution.objective)}\n")
        for var, val in zip(model.variables, solution.x):
            fh.write(f"{var.name} {_num(val)}\n")


def read_solution(path, model, feas_tol=1e-6):
    """Parse `variable value` lines into a solution against a model.

    Missing variables default to their lower bound; the point must
    satisfy the model within feas_tol or NumericalFailure is raised.
    """
    x = np.array([v.lo for v in model.variables])
    seen_obj = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tok = line.split()
            if tok[0] == "=obj=":
                seen_obj = float(tok[1])
                continue
            if len(tok) != 2:
                raise ParseError(f"expected 'variable value', got {line!r}", lineno)
            try:
                idx = model.var_index(tok[0])
            except KeyError:
                raise ParseError(f"unknown variable {tok[0]!r}", lineno) from None
            try:
                x[idx] = float(tok[1])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
    worst = model.max_violation(x)
    if worst > feas_tol:
        raise NumericalFailure(
            f"solution violates the model by {worst:.3g} (tol {feas_tol:g})"
        )
    obj = model.objective_value(x)
    if seen_obj is not None and abs(seen_obj - obj) > 1e-4 * max(1.0, abs(obj)):
        raise NumericalFailure(
            f"solution file objective {seen_obj} disagrees with recomputed {obj}"
        )
    return MipSolution("optimal", objective=float(obj), x=x, bound=float(obj))
