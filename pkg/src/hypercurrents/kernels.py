"""Backend selection for the hot kernels.

The compiled extension is used when importable; setting the environment
variable HYPERCURRENTS_PURE_PYTHON=1 forces the numpy fallback.
"""

import os

from . import _pykernels as python_backend

OK, RECEDING, CHART_EXIT, REJECTED = 0, 1, 2, 3

compiled_backend = None
if not os.environ.get("HYPERCURRENTS_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

rk4_batch = backend.rk4_batch
rk4_path = backend.rk4_path
polyline_crossings = backend.polyline_crossings
disk_union_area = backend.disk_union_area
