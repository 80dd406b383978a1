"""Numba toggle.

Hot kernels are written once as plain Python over NumPy arrays and compiled
with :func:`njit` when numba is importable and not disabled. Set
``BLMAB_DISABLE_NUMBA=1`` to force the pure-NumPy fallback kernels.
"""

import os

_DISABLED = os.environ.get("BLMAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(func):
    """Compile ``func`` in nopython mode with the GIL released, if available."""
    if not USE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
