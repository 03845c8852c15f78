"""Backend selection for the density-matrix kernels.

The compiled extension is used when it imports; setting ``QPALG_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

from . import _kernels_py

BACKENDS = {"python": _kernels_py}

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    BACKENDS["cython"] = _compiled

if _compiled is not None and not os.environ.get("QPALG_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_active = BACKENDS[BACKEND]
conjugate = _active.conjugate
partial_trace = _active.partial_trace


def use_backend(name: str) -> str:
    """Switch the active kernels; returns the previous backend name."""
    global BACKEND, _active, conjugate, partial_trace
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} is not available (have {sorted(BACKENDS)})")
    previous = BACKEND
    BACKEND, _active = name, BACKENDS[name]
    conjugate = _active.conjugate
    partial_trace = _active.partial_trace
    return previous
