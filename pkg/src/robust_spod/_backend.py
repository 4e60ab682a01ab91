"""Select the stencil kernel at import time.

The compiled kernel is used when it was built; set ``ROBUST_SPOD_PURE=1`` to
force the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
shift_rows = _pykernels.shift_rows

if os.environ.get("ROBUST_SPOD_PURE", "") != "1":
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        shift_rows = _ckernels.shift_rows
        BACKEND = "cython"

__all__ = ["BACKEND", "shift_rows"]
