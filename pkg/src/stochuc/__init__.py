"""Bounds and policies for multi-stage stochastic unit commitment.

The library computes Lagrangian lower bounds with demand-state-dependent
multipliers, a feasible one-step-lookahead policy with statistical upper
bounds, and a perfect-information lower bound, all verifiable against an
exact joint dynamic program at desk scale.
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
