"""Numba switch.

Hot kernels are compiled with numba when it is importable, unless the
environment variable ``WEEDSPEED_NO_NUMBA`` is set to a truthy value, in
which case every kernel falls back to its numpy/scipy implementation.
The flag is read once at import time.
"""
import os

ENV_FLAG = "WEEDSPEED_NO_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _flag_set(value: str | None) -> bool:
    return value is not None and value.strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and not _flag_set(os.environ.get(ENV_FLAG))


def njit(*args, **kwargs):
    """``numba.njit`` with cache and nogil on; returns None when numba is missing."""
    if not HAVE_NUMBA:
        return lambda fn: None
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return numba.njit(*args, **kwargs)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
