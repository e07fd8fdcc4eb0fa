"""Kernel backend selection.

The hot inner loops (max flow, line DP, feasible-step enumeration) exist
twice: a compiled Cython module ``_core`` and a pure-Python module ``_pure``
with identical interfaces. The compiled backend is used when it imported
successfully and the caller's scaled integers fit comfortably in int64;
``TVTRIP_PURE_PYTHON=1`` forces the pure backend.
"""

from __future__ import annotations

import os

from . import _pure

# magnitudes above this must use the arbitrary-precision pure backend
INT64_SAFE = 2**60

if os.environ.get("TVTRIP_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from . import _core as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

active = _compiled if _compiled is not None else _pure
pure = _pure
BACKEND = active.BACKEND


def backend_for(max_abs_value: int):
    """Pick the backend able to handle integers of the given magnitude."""
    if _compiled is not None and max_abs_value < INT64_SAFE:
        return _compiled
    return _pure


def available_backends():
    out = {"pure": _pure}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
