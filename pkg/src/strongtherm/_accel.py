"""Numba switch.

Set ``STRONGTHERM_DISABLE_NUMBA=1`` to force the pure-numpy kernels. When numba
is not importable the numpy path is used silently.
"""

from __future__ import annotations

import os

_FLAG = "STRONGTHERM_DISABLE_NUMBA"


def numba_requested() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() not in {"1", "true", "yes", "on"}


try:
    import numba as _numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and numba_requested()


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or a pass-through decorator without numba."""
    if not HAS_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)
