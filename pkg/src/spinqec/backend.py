"""Backend selection for the hot numerical kernels.

Two implementations exist for every heavy inner loop (cyclic Jacobi sweeps,
two-level gate application on the register): a numba-compiled one and a pure
numpy one.  Which one runs is decided by the ``SPINQEC_BACKEND`` environment
variable:

* ``auto``  (default) -- numba if importable, numpy otherwise
* ``numba`` -- force the compiled path, error out if numba is missing
* ``numpy`` -- force the pure-numpy path

The flag is read at call time, so tests can flip it per-case.
"""

import os

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        """No-op stand-in for numba.njit when numba is unavailable."""

        def wrap(fn):
            return fn

        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return wrap


ENV_FLAG = "SPINQEC_BACKEND"
_VALID = ("auto", "numba", "numpy")


def backend_name():
    """Return the requested backend name after validation."""
    mode = os.environ.get(ENV_FLAG, "auto").strip().lower()
    if mode not in _VALID:
        raise ValueError(
            f"{ENV_FLAG}={mode!r} not understood; expected one of {_VALID}"
        )
    return mode


def use_numba():
    """True if the compiled kernels should run for this call."""
    mode = backend_name()
    if mode == "numpy":
        return False
    if mode == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError(
                f"{ENV_FLAG}=numba requested but numba is not importable"
            )
        return True
    return HAVE_NUMBA
