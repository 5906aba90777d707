"""Kernel selection: compiled extension if importable, else pure Python.

Set ``STREAMCKPT_PURE=1`` to force the fallback.
"""

import os

from . import _pycore

BACKEND = "python"

if os.environ.get("STREAMCKPT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pycore
else:
    _impl = _pycore


def fnv1a64(data: bytes, h: int = _pycore.FNV_OFFSET) -> int:
    """64-bit FNV-1a over ``data``, optionally continuing from ``h``."""
    if _impl is _pycore:
        return _pycore.fnv1a64(data, h)
    return _impl.fnv1a64(data, h)


strict_reach_marks = _impl.strict_reach_marks
zpath_lowest_intervals = _impl.zpath_lowest_intervals
