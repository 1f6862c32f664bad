"""Select the compiled kernel extension or the numpy fallback.

Set SUPERTOROID_PURE=1 to force the numpy implementation (used by the
kernel benchmark and by tests that exercise the fallback).
"""

import os

from . import _kernels_np

if os.environ.get("SUPERTOROID_PURE", "0") not in ("", "0"):
    _impl = _kernels_np
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_np

BACKEND = _impl.BACKEND_NAME

meridian_residuals = _impl.meridian_residuals
implicit_values = _impl.implicit_values


def backend_name() -> str:
    """Name of the active kernel backend ("cython" or "python")."""
    return BACKEND
