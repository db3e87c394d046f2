"""Numba switch.

Set ``PENTAPOD_ASD_NUMBA=0`` to run every kernel through its pure-numpy
path. The flag is read once at import time.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("PENTAPOD_ASD_NUMBA", "1").lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def njit(func):
    """Compile ``func`` in nopython mode when numba is enabled, else return it."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
