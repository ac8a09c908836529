"""Select the compiled (numba) or pure-Python kernel path.

Set ``LPNORM_DISABLE_NUMBA=1`` before import to force the pure-Python path.
The flag is read once; both paths compute bit-for-bit the same sequence of
floating point operations up to compiler reassociation.
"""

import os

_flag = os.environ.get("LPNORM_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag not in ("", "0", "false", "no")

try:  # pragma: no cover - depends on the environment
    if NUMBA_DISABLED:
        raise ImportError
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def jit(func):
    """Compile ``func`` with ``numba.njit`` when available, else return it unchanged."""
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


def backend_name():
    return "numba" if HAVE_NUMBA else "python"
