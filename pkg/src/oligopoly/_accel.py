"""Switch between numba-compiled kernels and the plain Python/numpy path.

Set ``OLIGOPOLY_NUMBA=0`` (or ``false``/``off``/``no``) before import to run
everything without numba.  The flag is read once, at import time.
"""

import os

_OFF = {"0", "false", "off", "no"}


def _numba_requested():
    return os.environ.get("OLIGOPOLY_NUMBA", "1").strip().lower() not in _OFF


try:
    if not _numba_requested():
        raise ImportError("numba disabled by OLIGOPOLY_NUMBA")
    import numba
except ImportError:
    numba = None

NUMBA_ENABLED = numba is not None


def jit(fn):
    """Compile ``fn`` in nopython mode when numba is active, else return it."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
