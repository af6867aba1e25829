"""Kernel backend selection.

Every hot loop in :mod:`fareyflow.kernels` has a numba-compiled version and a
vectorised numpy version. ``FAREYFLOW_BACKEND=numpy`` selects the latter; the
default is ``numba`` whenever numba imports.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def _initial_backend() -> str:
    name = os.environ.get("FAREYFLOW_BACKEND", "numba").strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"FAREYFLOW_BACKEND must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


_current = _initial_backend()


def njit(func=None, **kwargs):
    """``numba.njit`` with nogil/cache on; identity when numba is missing."""
    opts = {"nogil": True, "cache": True}
    opts.update(kwargs)

    def wrap(f):
        if not HAVE_NUMBA:
            f.py_func = f
            return f
        return numba.njit(**opts)(f)

    if func is not None:
        return wrap(func)
    return wrap


def backend() -> str:
    return _current


def set_backend(name: str) -> None:
    global _current
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _current = name


@contextmanager
def use_backend(name: str):
    prev = _current
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)
