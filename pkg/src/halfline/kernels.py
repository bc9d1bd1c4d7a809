"""Hot-loop backend selection.

The compiled extension is used when it imports; otherwise the NumPy fallback.
Set ``HALFLINE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
volterra_sweep = _kernels_py.volterra_sweep

if os.environ.get("HALFLINE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        volterra_sweep = _compiled.volterra_sweep
        BACKEND = "compiled"

__all__ = ["BACKEND", "volterra_sweep"]
