"""Backend selection: numba when importable, plain numpy otherwise.

Set ``GAUSS_TS_DISABLE_NUMBA=1`` to force the numpy path even when numba
is installed.  The flag is read once at import time.
"""
from __future__ import annotations

import os

_DISABLED = os.environ.get("GAUSS_TS_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

try:
    if _DISABLED:
        raise ImportError("numba disabled by GAUSS_TS_DISABLE_NUMBA")
    import numba as _numba

    HAS_NUMBA = True
except ImportError:
    _numba = None
    HAS_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` if available, identity decorator otherwise."""
    if HAS_NUMBA:
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def decorator(func):
        return func

    return decorator


def default_backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"


def resolve_backend(backend: str | None) -> str:
    if backend is None:
        return default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable")
    return backend
