"""Kernel backend selection.

Prefers the compiled extension (built from _core.pyx) and falls back to
the numpy implementation when the extension is missing or when
STOCHUC_PURE_PYTHON=1 is set.  Both backends expose the same
stage_sweep signature and produce the same tables.
"""

import os

from . import fallback

if os.environ.get("STOCHUC_PURE_PYTHON", "") == "1":
    _impl = fallback
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = fallback

BACKEND = _impl.BACKEND
stage_sweep = _impl.stage_sweep


def available_backends():
    """Names of importable kernel backends (for tests and benchmarks)."""
    names = ["python"]
    try:
        from . import _core  # noqa: F401

        names.insert(0, "cython")
    except ImportError:
        pass
    return names


def get_backend(name):
    if name == "python":
        return fallback
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown kernel backend {name!r}")
