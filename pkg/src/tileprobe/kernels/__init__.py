"""Hot numeric kernels with a compiled core and a NumPy fallback.

The compiled backend is selected at import when available. Set
TILEPROBE_KERNELS=python to force the fallback, or TILEPROBE_KERNELS=c to
require the extension (ImportError if it was not built).
"""

from __future__ import annotations

import os

from . import _py

_requested = os.environ.get("TILEPROBE_KERNELS", "auto").lower()

if _requested == "python":
    _impl = _py
elif _requested == "c":
    from . import _ckernels as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _py

assign_cells = _impl.assign_cells
mask_in_rect = _impl.mask_in_rect
count_in_rect = _impl.count_in_rect
partition_order = _impl.partition_order
group_stats = _impl.group_stats


def backend() -> str:
    """Name of the active backend: "c" or "python"."""
    return _impl.BACKEND
