"""Optional numba acceleration.

Hot loops are written once as scalar Python and compiled with
``numba.njit`` when available.  Setting ``INVCIRCLE_DISABLE_JIT=1`` in the
environment (or running without numba installed) keeps the plain Python
functions, and callers that have a vectorised numpy alternative switch to it
via :data:`JIT_ENABLED`.
"""

import logging
import os

_FLAG = os.environ.get("INVCIRCLE_DISABLE_JIT", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

JIT_ENABLED = numba is not None and _FLAG in ("", "0", "false", "no", "off")

if numba is not None:
    logging.getLogger("numba").setLevel(logging.WARNING)


def njit(func):
    """Compile ``func`` in nopython mode, or return it unchanged."""
    if not JIT_ENABLED:
        return func
    return numba.njit(cache=True, nogil=True)(func)
