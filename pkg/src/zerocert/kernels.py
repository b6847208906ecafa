"""Backend selection for the numerical hot loops.

The compiled extension ``zerocert._kernels`` is used when it was built;
otherwise the numpy implementations in ``zerocert._pykernels`` are used.
Setting ``ZEROCERT_KERNELS=python`` in the environment forces the fallback.
Both expose the same functions with identical semantics.
"""

import os

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _pykernels}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _pykernels if _compiled is None or os.environ.get("ZEROCERT_KERNELS") == "python" else _compiled


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend_name() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def use_backend(name: str) -> str:
    """Switch the active backend ("compiled" or "python"); returns the previous name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    prev = backend_name()
    _active = _BACKENDS[name]
    return prev


def pivot(T, r, c):
    _active.pivot(T, r, c)


def power_iteration(A, x0, rtol, maxiter):
    return _active.power_iteration(A, x0, rtol, maxiter)
