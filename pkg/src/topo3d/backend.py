"""Kernel backend selection.

Hot numeric loops exist twice: a numba @njit implementation and a pure-numpy
fallback. The T3D_BACKEND environment variable picks the paths at import:

    unset / "auto"      measured-best mix: geometry and meshing kernels run
                        jitted, convolutions run on the im2col/BLAS fallback
                        (see benchmarks/bench_backends.py for why)
    T3D_BACKEND=numba   force the jitted kernels everywhere
    T3D_BACKEND=numpy   force the pure-numpy fallback everywhere

Without numba installed, "auto" degrades to the numpy paths.
"""

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

_requested = os.environ.get("T3D_BACKEND", "auto").strip().lower() or "auto"

if _requested not in ("auto", "numpy", "numba"):
    raise ValueError(f"T3D_BACKEND must be 'numba', 'numpy' or 'auto', got {_requested!r}")
if _requested == "numba" and not HAVE_NUMBA:
    raise ImportError("T3D_BACKEND=numba requested but numba is not importable")

MODE = _requested if HAVE_NUMBA else "numpy"

CONV_BACKEND = {"auto": "numpy", "numpy": "numpy", "numba": "numba"}[MODE]
GEOM_BACKEND = {"auto": "numba", "numpy": "numpy", "numba": "numba"}[MODE]


def using_numba() -> bool:
    """True when any jitted kernel family is active."""
    return GEOM_BACKEND == "numba"
