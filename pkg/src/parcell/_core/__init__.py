"""Hot-kernel backend selection.

The event-selection tree and the RNG are the innermost loop of the
simulator.  They exist twice: a Cython extension (``_kernel``) and a pure
Python module (``fallback``) with identical draw-for-draw behaviour.  The
compiled one is used when importable; set ``PARCELL_PURE=1`` to force the
fallback.  ``benchmarks/bench_core.py`` compares the two.
"""

import os

from parcell._core import fallback

if os.environ.get("PARCELL_PURE"):
    _impl = fallback
    COMPILED = False
else:
    try:
        from parcell._core import _kernel as _impl

        COMPILED = True
    except ImportError:
        _impl = fallback
        COMPILED = False

RateTable = _impl.RateTable
Xoshiro256StarStar = _impl.Xoshiro256StarStar

BACKEND_NAME = "compiled" if COMPILED else "pure"


def available_backends():
    """Names of importable backends ('pure' always; 'compiled' if built)."""
    names = ["pure"]
    try:
        from parcell._core import _kernel  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Fetch a backend module by name ('pure' or 'compiled')."""
    if name == "pure":
        return fallback
    if name == "compiled":
        from parcell._core import _kernel

        return _kernel
    raise ValueError(f"unknown backend {name!r}")
