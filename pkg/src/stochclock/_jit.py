"""Optional numba acceleration.

Set ``STOCHCLOCK_DISABLE_NUMBA=1`` to run every kernel as plain Python over
numpy arrays. Both paths consume the same uniform variates and produce
identical results; only speed differs.
"""
import os

_FLAG = "STOCHCLOCK_DISABLE_NUMBA"


def _disabled_by_env():
    return os.environ.get(_FLAG, "").strip().lower() not in ("", "0", "false", "no")


try:
    from numba import njit as _njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not _disabled_by_env()


def maybe_njit(func):
    """Compile ``func`` with ``njit(cache=True)`` unless acceleration is off."""
    if not USE_NUMBA:
        return func
    return _njit(cache=True)(func)

