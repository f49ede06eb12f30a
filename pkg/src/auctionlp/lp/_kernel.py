"""Pivot kernel selection, resolved once at import.

The compiled kernel is preferred when its extension module was built;
AUCTIONLP_PURE=1 forces the pure-Python kernel (used by the benchmark
and as an escape hatch).
"""

import os

if os.environ.get("AUCTIONLP_PURE"):
    from ._pivot_py import KERNEL, eliminate
else:
    try:
        from ._pivot_cy import KERNEL, eliminate  # type: ignore[no-redef]
    except ImportError:
        from ._pivot_py import KERNEL, eliminate  # type: ignore[no-redef]

__all__ = ["KERNEL", "eliminate"]
