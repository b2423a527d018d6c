"""Kernel selection: the compiled extension when present, else pure Python.

Set TRAPKIT_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("TRAPKIT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
independent_sets = _impl.independent_sets
tableau_measure = _impl.tableau_measure
tableau_rotate_measure = _impl.tableau_rotate_measure
count_failures = _impl.count_failures

__all__ = ["BACKEND", "independent_sets", "tableau_measure", "tableau_rotate_measure", "count_failures"]
