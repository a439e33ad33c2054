"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy implementations in ``_pure`` take over. Setting the environment
variable ``WAVEMAX_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pure

__all__ = ["BACKEND", "diag_traces", "weighted_gram", "refine_modulation", "backend_module"]


def _load():
    if os.environ.get("WAVEMAX_PURE_PYTHON", "").strip() not in ("", "0"):
        return _pure, "python"
    try:
        from . import _kernels
    except ImportError:
        return _pure, "python"
    return _kernels, "compiled"


_impl, BACKEND = _load()

diag_traces = _impl.diag_traces
weighted_gram = _impl.weighted_gram
refine_modulation = _impl.refine_modulation


def backend_module(name):
    """Return the kernel module for ``"python"`` or ``"compiled"``."""
    if name == "python":
        return _pure
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
