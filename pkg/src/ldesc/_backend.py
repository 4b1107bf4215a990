"""Select the integration backend at import time.

The compiled extension is preferred; the NumPy fallback is used when the
extension is missing or when ``LDESC_PURE_PYTHON=1`` is set (useful for
benchmarking and debugging).  Both modules expose the same two entry
points: ``integrate_point`` and ``compute_m_batch``.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("LDESC_PURE_PYTHON") == "1":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

#: "compiled" or "python"
BACKEND = kernels.BACKEND_NAME

METHOD_RK4 = _kernels_py.METHOD_RK4
METHOD_RK45 = _kernels_py.METHOD_RK45
KIND_SADDLE = _kernels_py.KIND_SADDLE
KIND_EXPR = _kernels_py.KIND_EXPR
