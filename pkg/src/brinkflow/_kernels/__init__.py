"""Kernel backend selection.

The compiled extension is preferred; the pure-Python fallback is used when
the extension is unavailable or when ``BRINKFLOW_PURE_PYTHON`` is set in
the environment.
"""

import os

if os.environ.get("BRINKFLOW_PURE_PYTHON"):
    from . import pyfallback as impl
else:
    try:
        from . import _core as impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pyfallback as impl

from . import pyfallback

BACKEND = impl.BACKEND_NAME
residual = impl.residual
dgs_sweep = impl.dgs_sweep


def backend_name():
    return BACKEND
