"""Recursion-kernel backend selection.

Prefers the compiled extension, falls back to numpy if it is absent.
Set CTSYSID_KERNEL=python to force the fallback (used by the benchmark
and the parity tests).
"""

from __future__ import annotations

import os

from . import _kernel_py

if os.environ.get("CTSYSID_KERNEL", "").lower() == "python":
    _impl = _kernel_py
    BACKEND = "python"
else:
    try:
        from . import _kernel_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernel_py
        BACKEND = "python"

linear_recursion = _impl.linear_recursion


def backend_name() -> str:
    return BACKEND
