"""Hot loops behind a backend switch.

``PNORMCUT_BACKEND=numpy`` forces the pure-numpy path; the default is numba
when it imports, numpy otherwise.  Both backends expose the same four
functions with identical semantics (see ``_numpy`` for the reference
definitions).
"""

import os
import warnings

from . import _numpy

_requested = os.environ.get("PNORMCUT_BACKEND", "numba").strip().lower()

if _requested not in ("numba", "numpy"):
    raise ImportError(f"PNORMCUT_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numba":
    try:
        from . import _numba as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - depends on environment
        warnings.warn("numba not importable, falling back to numpy kernels")
        _impl = _numpy
        BACKEND = "numpy"
else:
    _impl = _numpy
    BACKEND = "numpy"

cut_values = _impl.cut_values
sign_power_sums = _impl.sign_power_sums
ascent_batch = _impl.ascent_batch
gadget_values = _impl.gadget_values

__all__ = ["BACKEND", "cut_values", "sign_power_sums", "ascent_batch", "gadget_values"]
