"""Kernel backend selection.

The numerically hot routines (matrix permanent, the double-permutation
interference sum) exist in two functionally identical variants: a compiled
one built with numba's ``@njit`` and a pure numpy one.  The environment
variable ``INDISTINGUO_BACKEND`` picks between them:

* ``numba``  - require the compiled kernels, fail if numba is unavailable
* ``numpy``  - force the pure numpy fallback
* unset      - use numba when importable, otherwise fall back silently

``INDISTINGUO_THREADS`` caps the numba threading layer.  Each kernel uses a
fixed summation order, so within one backend results are bit-identical
across runs and thread settings; across backends they agree to floating
point roundoff.
"""

from __future__ import annotations

import os

__all__ = ["active_backend", "numba_available", "NUMBA_OK"]

_ENV_BACKEND = "INDISTINGUO_BACKEND"
_ENV_THREADS = "INDISTINGUO_THREADS"

try:
    import numba as _nb

    NUMBA_OK = True
except ImportError:  # pragma: no cover - exercised only without numba
    _nb = None
    NUMBA_OK = False


def numba_available() -> bool:
    return NUMBA_OK


def active_backend() -> str:
    """Resolve the backend name, honoring the environment override."""
    choice = os.environ.get(_ENV_BACKEND, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not NUMBA_OK:
            raise RuntimeError(
                "INDISTINGUO_BACKEND=numba but numba is not importable"
            )
        return "numba"
    if choice not in ("", "auto"):
        raise RuntimeError(f"unknown INDISTINGUO_BACKEND value: {choice!r}")
    return "numba" if NUMBA_OK else "numpy"


def _apply_thread_cap() -> None:
    raw = os.environ.get(_ENV_THREADS, "").strip()
    if not raw or not NUMBA_OK:
        return
    try:
        n = int(raw)
    except ValueError:
        raise RuntimeError(f"INDISTINGUO_THREADS must be an integer, got {raw!r}")
    if n >= 1:
        _nb.set_num_threads(min(n, _nb.config.NUMBA_NUM_THREADS))


_apply_thread_cap()
