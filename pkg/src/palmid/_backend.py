"""Feature-kernel selection: compiled extension if available, NumPy otherwise.

Set ``PALMID_PURE_PYTHON=1`` to force the fallback (useful for
benchmarks and for debugging the compiled path against it).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PALMID_PURE_PYTHON"):
    _impl = _kernels_py
    KERNEL_BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        KERNEL_BACKEND = "c"
    except ImportError:
        _impl = _kernels_py
        KERNEL_BACKEND = "python"

feature_matrix_kernel = _impl.feature_matrix
