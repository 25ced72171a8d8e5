"""Kernel backend selection.

The compiled Cython core is preferred when present; the NumPy fallback is
used otherwise, or when PAIRMINE_NO_EXT=1 is set. Index *training* always
goes through the NumPy assignment kernel (see vindex.kmeans) so trained
indexes are identical regardless of which backend serves queries.
"""

from __future__ import annotations

import os

from . import _numpy

if os.environ.get("PAIRMINE_NO_EXT") == "1":
    _impl = _numpy
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _numpy

BACKEND: str = _impl.BACKEND
assign_nearest = _impl.assign_nearest
scan_lists = _impl.scan_lists

# training-grade kernels: fixed to the NumPy implementation for determinism
assign_nearest_training = _numpy.assign_nearest


def backend_name() -> str:
    return BACKEND
