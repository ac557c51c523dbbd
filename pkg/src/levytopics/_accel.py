"""numba switch for the hot loops.

Set ``LEVYTOPICS_DISABLE_NUMBA=1`` to run every kernel as plain Python over
numpy arrays. Results are identical on both paths.
"""
from __future__ import annotations

import os

try:
    import numba

    NUMBA_OK = True
except ImportError:  # pragma: no cover
    numba = None
    NUMBA_OK = False

USE_NUMBA = NUMBA_OK and os.environ.get("LEVYTOPICS_DISABLE_NUMBA", "").lower() not in (
    "1",
    "true",
    "yes",
)


def njit(func):
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


def python_impl(func):
    """The uncompiled version of a kernel (the function itself when numba is off)."""
    return getattr(func, "py_func", func)


def set_threads(n: int | None) -> None:
    if n is None or not USE_NUMBA:
        return
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


__all__ = ["njit", "python_impl", "set_threads", "NUMBA_OK", "USE_NUMBA"]
