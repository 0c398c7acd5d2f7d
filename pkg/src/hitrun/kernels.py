"""Backend selection for the hit-and-run inner loops.

The compiled extension ``hitrun._kernels`` is used when it imports; otherwise
the pure-Python module is used.  Setting ``HITRUN_PURE_PYTHON=1`` in the
environment forces the fallback.  ``BACKEND`` names the active choice.
"""

import os

from . import _kernels_py as python_backend

compiled_backend = None
try:
    from . import _kernels as compiled_backend
except ImportError:  # extension not built
    pass

if compiled_backend is not None and os.environ.get("HITRUN_PURE_PYTHON", "") in ("", "0"):
    _active = compiled_backend
    BACKEND = "cython"
else:
    _active = python_backend
    BACKEND = "python"

ball_walk = _active.ball_walk
box_walk = _active.box_walk
polytope_walk = _active.polytope_walk


def get_backend(name=None):
    """Return a kernel module by name (``"cython"``/``"python"``), or the active one."""
    if name is None:
        return _active
    if name == "python":
        return python_backend
    if name == "cython":
        if compiled_backend is None:
            raise ImportError("the compiled kernels are not built")
        return compiled_backend
    raise ValueError(f"unknown backend {name!r}")
