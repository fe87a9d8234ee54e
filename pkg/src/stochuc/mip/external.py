"""Bridge to a user-supplied MIP solver via file exchange.

The wrapper script named by SUC_MIP_SOLVER is invoked as

    $SUC_MIP_SOLVER model.mps out.sol

and must write the documented `variable value` solution format.  This is
the path for full-scale perfect-information runs that exceed the
built-in solver's practical range.
"""

from __future__ import annotations

import os
import subprocess
import tempfile

from ..errors import StochucError
from .mps import read_solution, write_mps

ENV_VAR = "SUC_MIP_SOLVER"


def external_solver_command():
    cmd = os.environ.get(ENV_VAR)
    if not cmd:
        raise StochucError(
            f"--solver external needs the {ENV_VAR} environment variable to"
            " name a wrapper script"
        )
    return cmd


def solve_external(model, workdir=None, timeout=None):
    cmd = external_solver_command()
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        mps_path = os.path.join(tmp, "model.mps")
        sol_path = os.path.join(tmp, "out.sol")
        write_mps(model, mps_path)
        proc = subprocess.run([cmd, mps_path, sol_path], capture_output=True,
                              text=True, timeout=timeout)
        if proc.returncode != 0:
            raise StochucError(
                f"external solver exited with {proc.returncode}: {proc.stderr[-500:]}"
            )
        return read_solution(sol_path, model)


def get_solver(name):
    """Uniform solve callable for 'builtin' or 'external'."""
    if name == "builtin":
        from .branch_bound import solve_bb

        return solve_bb
    if name == "external":
        external_solver_command()  # fail fast before any solve
        return lambda model, **kw: solve_external(model)
    raise StochucError(f"unknown solver {name!r} (expected builtin or external)")
