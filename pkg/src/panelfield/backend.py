"""Backend selection: numba-accelerated kernels vs the pure-numpy fallback.

The hot loops (kernel batches, matrix assembly) exist twice: a scalar form
compiled with numba and a vectorized numpy form.  Selection order:

1. ``PANELFIELD_NUMBA=0`` (or ``off``/``false``) forces the numpy path.
2. Otherwise numba is used when it imports cleanly.

``active_backend()`` reports which one is live; ``set_num_threads`` routes to
numba's thread pool (``--threads`` / ``PANELFIELD_THREADS`` in the CLI).
Per-entry results are bit-identical across backends' thread counts: every
matrix entry is computed independently and written to a disjoint slot.
"""

import os

_ENV_FLAG = "PANELFIELD_NUMBA"
_FALSEY = {"0", "off", "false", "no"}


def numba_requested() -> bool:
    return os.environ.get(_ENV_FLAG, "1").strip().lower() not in _FALSEY


_HAVE_NUMBA = False
if numba_requested():
    try:
        import numba  # noqa: F401

        _HAVE_NUMBA = True
    except ImportError:
        _HAVE_NUMBA = False


def numba_available() -> bool:
    return _HAVE_NUMBA


def active_backend() -> str:
    """Name of the live backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if _HAVE_NUMBA else "numpy"


def set_num_threads(n: int) -> None:
    """Cap the worker-thread count used by parallel assembly (numba only)."""
    if n < 1:
        raise ValueError(f"thread count must be >= 1, got {n}")
    if _HAVE_NUMBA:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def threads_from_env(default: int = 0) -> int:
    """Thread count from PANELFIELD_THREADS, or ``default`` (0 = leave as is)."""
    raw = os.environ.get("PANELFIELD_THREADS", "").strip()
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default
