"""Kernel backend selection.

The compiled extension is used when importable; ``EVDECODE_BACKEND=python``
forces the pure-Python kernels.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def available() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def get(name: str | None = None) -> ModuleType:
    name = name or os.environ.get("EVDECODE_BACKEND") or ("compiled" if _compiled is not None else "python")
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; reinstall with a C compiler and Cython")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


DEFAULT = get()
