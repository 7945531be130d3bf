"""
Kernel selection.

The compiled ``adar._core`` extension is used when importable; otherwise
the numpy implementation in ``adar._fallback`` is used. Setting the
environment variable ``ADAR_PURE_PYTHON=1`` forces the fallback.
"""
import os

from adar import _fallback

BACKEND = "python"
_impl = _fallback
if os.environ.get("ADAR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from adar import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _fallback

simulate_recursion = _impl.simulate_recursion
project_batch = _impl.project_batch

__all__ = ["BACKEND", "simulate_recursion", "project_batch"]
