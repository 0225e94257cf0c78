"""Hot numerical kernels with a compiled backend and a numpy fallback.

The Cython extension ``_ckernels`` is used when it was built; otherwise the
pure numpy module ``_pykernels`` is selected at import. Both expose the same
functions, so callers never need to know which one is active::

    from ntoslab import kernels
    kernels.BACKEND            # "cython" or "python"
    kernels.winding_grid(...)

``use_backend`` switches the active implementation, which the tests and the
benchmark use to compare the two.
"""
from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

__all__ = [
    "BACKEND",
    "available_backends",
    "use_backend",
    "winding_number",
    "winding_grid",
    "charpoly_real",
    "log_delta_grid",
    "STATUS_OK",
    "STATUS_GAP_CLOSED",
    "STATUS_UNRESOLVED",
]

STATUS_OK = _pykernels.STATUS_OK
STATUS_GAP_CLOSED = _pykernels.STATUS_GAP_CLOSED
STATUS_UNRESOLVED = _pykernels.STATUS_UNRESOLVED

_IMPLS = {"python": _pykernels}
if _ckernels is not None:
    _IMPLS["cython"] = _ckernels


def available_backends():
    return sorted(_IMPLS)


def use_backend(name):
    """Select the kernel implementation by name ("cython" or "python")."""
    global BACKEND, winding_number, winding_grid, charpoly_real, log_delta_grid
    try:
        impl = _IMPLS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}") from None
    BACKEND = name
    winding_number = impl.winding_number
    winding_grid = impl.winding_grid
    charpoly_real = impl.charpoly_real
    log_delta_grid = impl.log_delta_grid


BACKEND = "python"
winding_number = _pykernels.winding_number
winding_grid = _pykernels.winding_grid
charpoly_real = _pykernels.charpoly_real
log_delta_grid = _pykernels.log_delta_grid

use_backend("cython" if _ckernels is not None else "python")
