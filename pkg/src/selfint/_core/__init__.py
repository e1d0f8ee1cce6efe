"""Hot kernels: compiled Cython module when available, numpy fallback otherwise.

Set ``SELFINT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pycore
from ._pycore import frames_to_points

BACKEND = "python"
trace_walk = _pycore.trace_walk
segment_crossings = _pycore.segment_crossings
min_dist_to_segments = _pycore.min_dist_to_segments

if os.environ.get("SELFINT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ccore
    except ImportError:  # extension not built
        _ccore = None
    if _ccore is not None:
        trace_walk = _ccore.trace_walk
        segment_crossings = _ccore.segment_crossings
        min_dist_to_segments = _ccore.min_dist_to_segments
        BACKEND = "cython"

__all__ = [
    "BACKEND",
    "trace_walk",
    "segment_crossings",
    "frames_to_points",
    "min_dist_to_segments",
]
