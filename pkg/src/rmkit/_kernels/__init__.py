"""Kernel backend selection.

The compiled Cython kernel is used when importable; otherwise the numpy
fallback. Set RMKIT_KERNEL=python or RMKIT_KERNEL=compiled to force one
(the latter raises if the extension was not built).
"""

from __future__ import annotations

import os

from . import _fallback
from ._fallback import hash_key

_FORCED = os.environ.get("RMKIT_KERNEL", "").strip().lower()
if _FORCED not in ("", "python", "compiled"):
    raise ImportError(f"RMKIT_KERNEL must be 'python' or 'compiled', got {_FORCED!r}")

if _FORCED == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _FORCED == "compiled":
            raise
        _impl = _fallback
        BACKEND = "python"

best_weight_squared = _impl.best_weight_squared
best_weight_linear_sum = _impl.best_weight_linear_sum
unit_hash = _impl.unit_hash


def get_backend(name: str):
    """Return the named backend module (for cross-checks and benchmarks)."""
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _core  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    return names


__all__ = [
    "BACKEND",
    "available_backends",
    "best_weight_linear_sum",
    "best_weight_squared",
    "get_backend",
    "hash_key",
    "unit_hash",
]
